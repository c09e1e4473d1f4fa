#pragma once

#include <complex>
#include <map>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "barrier/multi_index.hpp"

namespace barrier {

/// Graded enumeration of the monomials x^α, |α| ≤ N, in n variables.
class MonomialBasis {
 public:
  static std::shared_ptr<const MonomialBasis> get(int n, int N);

  int dim() const { return n_; }
  int max_degree() const { return N_; }
  std::size_t size() const { return list_.size(); }
  const MultiIndex& operator[](std::size_t k) const { return list_[k]; }
  /// Position of α, or size() when |α| > N.
  std::size_t index(const MultiIndex& a) const;
  /// Positions [begin(d), begin(d+1)) hold the monomials of degree d.
  std::size_t begin(int d) const { return start_[d]; }
  std::size_t end(int d) const { return start_[d + 1]; }

  MonomialBasis(int n, int N);

 private:
  int n_;
  int N_;
  std::vector<MultiIndex> list_;
  std::vector<std::size_t> start_;
  std::map<MultiIndex, std::size_t> pos_;
};

/// Truncated multivariate power series Σ_{|α|≤N} c_α x^α with complex coefficients.
///
/// Products and derivatives truncate at the degree of the result; there is never a
/// coefficient above N.
class TruncatedSeries {
 public:
  using Scalar = std::complex<double>;

  TruncatedSeries() = default;
  TruncatedSeries(int n, int N);

  int dim() const { return basis_->dim(); }
  int degree() const { return basis_->max_degree(); }
  const MonomialBasis& basis() const { return *basis_; }

  Scalar coeff(const MultiIndex& a) const;
  void set(const MultiIndex& a, Scalar c);
  void add_to(const MultiIndex& a, Scalar c);
  /// ∂^α f(0) = α! c_α
  Scalar derivative_at_zero(const MultiIndex& a) const { return factorial(a) * coeff(a); }

  Scalar& at(std::size_t k) { return c_[k]; }
  Scalar at(std::size_t k) const { return c_[k]; }
  const std::vector<Scalar>& coefficients() const { return c_; }

  static TruncatedSeries constant(int n, int N, Scalar c);
  static TruncatedSeries variable(int n, int N, int j);

  /// ∂_j f, kept at the same truncation degree (top degree becomes 0).
  TruncatedSeries partial(int j) const;
  /// Copy with coefficients of degree > M dropped (truncation degree unchanged).
  TruncatedSeries truncated(int M) const;
  /// Degree-d homogeneous part.
  TruncatedSeries homogeneous(int d) const;
  /// Same coefficients re-housed at truncation degree M (drops any above M).
  TruncatedSeries resized(int M) const;
  /// f(R y) for a linear change of variables x = R y.
  TruncatedSeries compose_linear(const Eigen::MatrixXd& R) const;

  Scalar eval(const std::vector<Scalar>& x) const;
  Scalar eval(const std::vector<double>& x) const;
  std::vector<Scalar> gradient(const std::vector<double>& x) const;

  double max_abs() const;

  TruncatedSeries& operator+=(const TruncatedSeries& o);
  TruncatedSeries& operator-=(const TruncatedSeries& o);
  TruncatedSeries& operator*=(Scalar s);

  friend TruncatedSeries operator+(TruncatedSeries a, const TruncatedSeries& b) { return a += b; }
  friend TruncatedSeries operator-(TruncatedSeries a, const TruncatedSeries& b) { return a -= b; }
  friend TruncatedSeries operator*(TruncatedSeries a, Scalar s) { return a *= s; }
  friend TruncatedSeries operator*(Scalar s, TruncatedSeries a) { return a *= s; }
  /// Product truncated at min of the two degrees.
  friend TruncatedSeries operator*(const TruncatedSeries& a, const TruncatedSeries& b);

 private:
  std::shared_ptr<const MonomialBasis> basis_;
  std::vector<Scalar> c_;
};

}  // namespace barrier
