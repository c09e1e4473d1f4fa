#include "barrier/series.hpp"

#include <algorithm>
#include <mutex>
#include <sstream>

#include "barrier/error.hpp"

namespace barrier {

namespace {

void fill_degree(int n, int d, int pos, MultiIndex& cur, std::vector<MultiIndex>& out) {
  if (pos == n - 1) {
    cur[pos] = d;
    out.push_back(cur);
    return;
  }
  for (int k = d; k >= 0; --k) {
    cur[pos] = k;
    fill_degree(n, d - k, pos + 1, cur, out);
  }
}

}  // namespace

std::vector<MultiIndex> monomials_of_degree(int n, int d) {
  std::vector<MultiIndex> out;
  if (n <= 0 || d < 0) return out;
  MultiIndex cur(n, 0);
  fill_degree(n, d, 0, cur, out);
  return out;
}

std::string to_string(const MultiIndex& a) {
  std::ostringstream os;
  for (std::size_t i = 0; i < a.size(); ++i) os << (i ? "," : "") << a[i];
  return os.str();
}

MultiIndex parse_multi_index(const std::string& s) {
  MultiIndex a;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(tok, &used);
    } catch (const std::exception&) {
      throw PreconditionError("bad multi-index '" + s + "'");
    }
    if (v < 0) throw PreconditionError("negative multi-index entry in '" + s + "'");
    a.push_back(v);
  }
  return a;
}

MonomialBasis::MonomialBasis(int n, int N) : n_(n), N_(N) {
  if (n < 1 || N < 0) throw PreconditionError("monomial basis needs n >= 1 and N >= 0");
  start_.push_back(0);
  for (int d = 0; d <= N; ++d) {
    auto m = monomials_of_degree(n, d);
    list_.insert(list_.end(), m.begin(), m.end());
    start_.push_back(list_.size());
  }
  for (std::size_t k = 0; k < list_.size(); ++k) pos_.emplace(list_[k], k);
}

std::size_t MonomialBasis::index(const MultiIndex& a) const {
  auto it = pos_.find(a);
  return it == pos_.end() ? list_.size() : it->second;
}

std::shared_ptr<const MonomialBasis> MonomialBasis::get(int n, int N) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::shared_ptr<const MonomialBasis>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{n, N}];
  if (!slot) slot = std::make_shared<const MonomialBasis>(n, N);
  return slot;
}

TruncatedSeries::TruncatedSeries(int n, int N)
    : basis_(MonomialBasis::get(n, N)), c_(basis_->size(), Scalar(0)) {}

TruncatedSeries::Scalar TruncatedSeries::coeff(const MultiIndex& a) const {
  if (static_cast<int>(a.size()) != dim()) throw PreconditionError("multi-index length mismatch");
  std::size_t k = basis_->index(a);
  return k < c_.size() ? c_[k] : Scalar(0);
}

void TruncatedSeries::set(const MultiIndex& a, Scalar c) {
  std::size_t k = basis_->index(a);
  if (k >= c_.size()) throw PreconditionError("multi-index " + to_string(a) + " beyond truncation");
  c_[k] = c;
}

void TruncatedSeries::add_to(const MultiIndex& a, Scalar c) {
  std::size_t k = basis_->index(a);
  if (k >= c_.size()) throw PreconditionError("multi-index " + to_string(a) + " beyond truncation");
  c_[k] += c;
}

TruncatedSeries TruncatedSeries::constant(int n, int N, Scalar c) {
  TruncatedSeries s(n, N);
  s.c_[0] = c;
  return s;
}

TruncatedSeries TruncatedSeries::variable(int n, int N, int j) {
  TruncatedSeries s(n, N);
  if (N >= 1) s.set(unit_index(n, j), 1.0);
  return s;
}

TruncatedSeries TruncatedSeries::partial(int j) const {
  TruncatedSeries r(dim(), degree());
  const auto& B = *basis_;
  for (std::size_t k = 0; k < B.size(); ++k) {
    const MultiIndex& a = B[k];
    if (a[j] == 0 || c_[k] == Scalar(0)) continue;
    MultiIndex b = a;
    b[j] -= 1;
    r.c_[B.index(b)] += static_cast<double>(a[j]) * c_[k];
  }
  return r;
}

TruncatedSeries TruncatedSeries::truncated(int M) const {
  TruncatedSeries r(*this);
  if (M < degree())
    for (std::size_t k = basis_->begin(std::max(M + 1, 0)); k < c_.size(); ++k) r.c_[k] = 0;
  return r;
}

TruncatedSeries TruncatedSeries::homogeneous(int d) const {
  TruncatedSeries r(dim(), degree());
  if (d < 0 || d > degree()) return r;
  for (std::size_t k = basis_->begin(d); k < basis_->end(d); ++k) r.c_[k] = c_[k];
  return r;
}

TruncatedSeries TruncatedSeries::resized(int M) const {
  TruncatedSeries r(dim(), M);
  int top = std::min(M, degree());
  for (std::size_t k = 0; k < basis_->end(top); ++k) r.c_[k] = c_[k];
  return r;
}

TruncatedSeries TruncatedSeries::compose_linear(const Eigen::MatrixXd& R) const {
  const int n = dim(), N = degree();
  if (R.rows() != n || R.cols() != n) throw PreconditionError("compose_linear: matrix size mismatch");
  // x_i = Σ_j R_ij y_j as degree-1 series in y
  std::vector<TruncatedSeries> lin;
  for (int i = 0; i < n; ++i) {
    TruncatedSeries s(n, N);
    for (int j = 0; j < n; ++j)
      if (N >= 1) s.set(unit_index(n, j), R(i, j));
    lin.push_back(std::move(s));
  }
  // powers x_i^k
  std::vector<std::vector<TruncatedSeries>> pw(n);
  for (int i = 0; i < n; ++i) {
    pw[i].push_back(constant(n, N, 1.0));
    for (int k = 1; k <= N; ++k) pw[i].push_back(pw[i].back() * lin[i]);
  }
  TruncatedSeries out(n, N);
  for (std::size_t k = 0; k < c_.size(); ++k) {
    if (c_[k] == Scalar(0)) continue;
    const MultiIndex& a = (*basis_)[k];
    TruncatedSeries term = constant(n, N, c_[k]);
    for (int i = 0; i < n; ++i)
      if (a[i] > 0) term = term * pw[i][a[i]];
    out += term;
  }
  return out;
}

TruncatedSeries::Scalar TruncatedSeries::eval(const std::vector<Scalar>& x) const {
  Scalar s = 0;
  for (std::size_t k = 0; k < c_.size(); ++k)
    if (c_[k] != Scalar(0)) s += c_[k] * monomial(x, (*basis_)[k]);
  return s;
}

TruncatedSeries::Scalar TruncatedSeries::eval(const std::vector<double>& x) const {
  return eval(std::vector<Scalar>(x.begin(), x.end()));
}

std::vector<TruncatedSeries::Scalar> TruncatedSeries::gradient(const std::vector<double>& x) const {
  std::vector<Scalar> g(dim());
  for (int j = 0; j < dim(); ++j) g[j] = partial(j).eval(x);
  return g;
}

double TruncatedSeries::max_abs() const {
  double m = 0;
  for (auto v : c_) m = std::max(m, std::abs(v));
  return m;
}

TruncatedSeries& TruncatedSeries::operator+=(const TruncatedSeries& o) {
  if (o.dim() != dim()) throw PreconditionError("series dimension mismatch");
  const auto& B = *o.basis_;
  int top = std::min(degree(), o.degree());
  for (std::size_t k = 0; k < B.end(top); ++k) c_[k] += o.c_[k];
  return *this;
}

TruncatedSeries& TruncatedSeries::operator-=(const TruncatedSeries& o) {
  if (o.dim() != dim()) throw PreconditionError("series dimension mismatch");
  const auto& B = *o.basis_;
  int top = std::min(degree(), o.degree());
  for (std::size_t k = 0; k < B.end(top); ++k) c_[k] -= o.c_[k];
  return *this;
}

TruncatedSeries& TruncatedSeries::operator*=(Scalar s) {
  for (auto& v : c_) v *= s;
  return *this;
}

TruncatedSeries operator*(const TruncatedSeries& a, const TruncatedSeries& b) {
  if (a.dim() != b.dim()) throw PreconditionError("series dimension mismatch");
  const int N = std::min(a.degree(), b.degree());
  TruncatedSeries r(a.dim(), N);
  const auto& B = r.basis();
  const auto& Ba = a.basis();
  const auto& Bb = b.basis();
  for (std::size_t i = 0; i < Ba.end(N); ++i) {
    if (a.c_[i] == TruncatedSeries::Scalar(0)) continue;
    const int di = degree(Ba[i]);
    for (std::size_t j = 0; j < Bb.end(N - di); ++j) {
      if (b.c_[j] == TruncatedSeries::Scalar(0)) continue;
      r.c_[B.index(add(Ba[i], Bb[j]))] += a.c_[i] * b.c_[j];
    }
  }
  return r;
}

}  // namespace barrier
