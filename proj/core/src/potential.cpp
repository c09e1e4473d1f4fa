#include "barrier/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "barrier/error.hpp"

namespace barrier {

namespace {

double mono(const Eigen::VectorXd& x, const MultiIndex& a) {
  double r = 1.0;
  for (int i = 0; i < x.size(); ++i) r *= std::pow(x[i], a[i]);
  return r;
}

// ∂_j x^α
double mono_d(const Eigen::VectorXd& x, const MultiIndex& a, int j) {
  if (a[j] == 0) return 0.0;
  MultiIndex b = a;
  b[j] -= 1;
  return a[j] * mono(x, b);
}

// ∂_j∂_k x^α
double mono_dd(const Eigen::VectorXd& x, const MultiIndex& a, int j, int k) {
  if (a[j] == 0) return 0.0;
  MultiIndex b = a;
  b[j] -= 1;
  return a[j] * mono_d(x, b, k);
}

void check_square(const Eigen::MatrixXd& Q) {
  if (Q.rows() != Q.cols() || Q.rows() < 1) throw PreconditionError("potential.Q must be square");
  if (!Q.allFinite()) throw PreconditionError("potential.Q has non-finite entries");
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-14 * (1.0 + Q.cwiseAbs().maxCoeff()))
    throw PreconditionError("potential.Q must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q);
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw PreconditionError("potential.Q must be positive definite");
}

}  // namespace

std::string kind_name(PotentialKind k) {
  switch (k) {
    case PotentialKind::QuadraticLocal: return "quadratic-local";
    case PotentialKind::Gaussian: return "gaussian";
    case PotentialKind::AnisotropicGaussian: return "anisotropic-gaussian";
    case PotentialKind::GaussianPlusCubic: return "gaussian-plus-cubic";
    case PotentialKind::UserTabulated: return "user-tabulated-derivatives";
    case PotentialKind::Free: return "free";
  }
  return "unknown";
}

PotentialKind parse_kind(const std::string& name) {
  for (auto k : {PotentialKind::QuadraticLocal, PotentialKind::Gaussian, PotentialKind::AnisotropicGaussian,
                 PotentialKind::GaussianPlusCubic, PotentialKind::UserTabulated, PotentialKind::Free})
    if (kind_name(k) == name) return k;
  throw PreconditionError("unknown potential kind '" + name + "'");
}

PotentialModel PotentialModel::quadratic_local(double E0, std::vector<double> lambdas) {
  if (lambdas.empty()) throw PreconditionError("quadratic-local needs at least one rate");
  for (double l : lambdas)
    if (!(l > 0.0) || !std::isfinite(l)) throw PreconditionError("quadratic-local rates must be positive");
  PotentialModel m;
  m.kind_ = PotentialKind::QuadraticLocal;
  m.n_ = static_cast<int>(lambdas.size());
  m.E0_ = E0;
  m.rates_ = std::move(lambdas);
  m.Q_ = Eigen::MatrixXd::Zero(m.n_, m.n_);
  for (int i = 0; i < m.n_; ++i) m.Q_(i, i) = m.rates_[i] * m.rates_[i];
  return m;
}

PotentialModel PotentialModel::gaussian(double E0, int n) {
  if (n < 1) throw PreconditionError("dimension must be positive");
  PotentialModel m;
  m.kind_ = PotentialKind::Gaussian;
  m.n_ = n;
  m.E0_ = E0;
  m.Q_ = Eigen::MatrixXd::Identity(n, n);
  return m;
}

PotentialModel PotentialModel::anisotropic_gaussian(double E0, const Eigen::MatrixXd& Q) {
  check_square(Q);
  PotentialModel m;
  m.kind_ = PotentialKind::AnisotropicGaussian;
  m.n_ = static_cast<int>(Q.rows());
  m.E0_ = E0;
  m.Q_ = Q;
  return m;
}

PotentialModel PotentialModel::gaussian_plus_cubic(double E0, const Eigen::MatrixXd& Q,
                                                   std::vector<CubicTerm> cubic) {
  check_square(Q);
  const int n = static_cast<int>(Q.rows());
  for (const auto& t : cubic)
    if (static_cast<int>(t.alpha.size()) != n || degree(t.alpha) != 3)
      throw PreconditionError("potential.cubic terms must be degree-3 multi-indices of length n");
  PotentialModel m;
  m.kind_ = PotentialKind::GaussianPlusCubic;
  m.n_ = n;
  m.E0_ = E0;
  m.Q_ = Q;
  m.cubic_ = std::move(cubic);
  return m;
}

PotentialModel PotentialModel::user_tabulated(double E0, int n, const std::map<MultiIndex, double>& derivs) {
  if (n < 1) throw PreconditionError("dimension must be positive");
  PotentialModel m;
  m.kind_ = PotentialKind::UserTabulated;
  m.n_ = n;
  m.E0_ = E0;
  m.tab_ = TruncatedSeries(n, 4);
  for (const auto& [a, v] : derivs) {
    if (static_cast<int>(a.size()) != n) throw PreconditionError("potential.derivatives: wrong multi-index length");
    int d = degree(a);
    if (d < 2 || d > 4) throw PreconditionError("potential.derivatives: orders 2..4 only");
    m.tab_.set(a, v / factorial(a));
  }
  m.Q_ = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m.Q_(i, j) = -m.tab_.derivative_at_zero(add(unit_index(n, i), unit_index(n, j))).real();
  return m;
}

PotentialModel PotentialModel::free(int n) {
  if (n < 1) throw PreconditionError("dimension must be positive");
  PotentialModel m;
  m.kind_ = PotentialKind::Free;
  m.n_ = n;
  m.E0_ = 0.0;
  m.Q_ = Eigen::MatrixXd::Identity(n, n);
  return m;
}

PotentialModel PotentialModel::scaled(double eps) const {
  PotentialModel m(*this);
  m.scale_ *= eps;
  m.E0_ *= eps;
  return m;
}

bool PotentialModel::gaussian_family() const {
  return kind_ == PotentialKind::Gaussian || kind_ == PotentialKind::AnisotropicGaussian ||
         kind_ == PotentialKind::GaussianPlusCubic;
}

double PotentialModel::decay_exponent() const {
  if (gaussian_family() || kind_ == PotentialKind::Free) return std::numeric_limits<double>::infinity();
  return 0.0;
}

bool PotentialModel::decaying() const { return gaussian_family() || kind_ == PotentialKind::Free; }

// Beyond this value of xᵀQx the Gaussian factor underflows; returning 0 avoids inf·0 from the polynomial.
constexpr double kUnderflowQ = 1480.0;

// In the Gaussian family E0_ already carries scale_, the cubic part does not.
double PotentialModel::poly(const Eigen::VectorXd& x) const {
  double p = E0_;
  for (const auto& t : cubic_) p += scale_ * t.coeff * mono(x, t.alpha);
  return p;
}

Eigen::VectorXd PotentialModel::poly_grad(const Eigen::VectorXd& x) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n_);
  for (const auto& t : cubic_)
    for (int j = 0; j < n_; ++j) g[j] += scale_ * t.coeff * mono_d(x, t.alpha, j);
  return g;
}

Eigen::MatrixXd PotentialModel::poly_hess(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n_, n_);
  for (const auto& t : cubic_)
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k) H(j, k) += scale_ * t.coeff * mono_dd(x, t.alpha, j, k);
  return H;
}

double PotentialModel::eval(const Eigen::VectorXd& x) const {
  switch (kind_) {
    case PotentialKind::Free: return 0.0;
    case PotentialKind::QuadraticLocal: {
      double s = 0;
      for (int i = 0; i < n_; ++i) s += rates_[i] * rates_[i] * x[i] * x[i];
      return E0_ - 0.5 * scale_ * s;
    }
    case PotentialKind::UserTabulated: {
      std::vector<double> xv(x.data(), x.data() + n_);
      return E0_ + scale_ * tab_.eval(xv).real();
    }
    default: {
      const double q = x.dot(Q_ * x);
      if (q > kUnderflowQ) return 0.0;
      return std::exp(-0.5 * q) * poly(x);
    }
  }
}

Eigen::VectorXd PotentialModel::gradient(const Eigen::VectorXd& x) const {
  switch (kind_) {
    case PotentialKind::Free: return Eigen::VectorXd::Zero(n_);
    case PotentialKind::QuadraticLocal: {
      Eigen::VectorXd g(n_);
      for (int i = 0; i < n_; ++i) g[i] = -scale_ * rates_[i] * rates_[i] * x[i];
      return g;
    }
    case PotentialKind::UserTabulated: {
      std::vector<double> xv(x.data(), x.data() + n_);
      Eigen::VectorXd g(n_);
      for (int j = 0; j < n_; ++j) g[j] = scale_ * tab_.partial(j).eval(xv).real();
      return g;
    }
    default: {
      const Eigen::VectorXd Qx = Q_ * x;
      if (x.dot(Qx) > kUnderflowQ) return Eigen::VectorXd::Zero(n_);
      const double G = std::exp(-0.5 * x.dot(Qx));
      return G * (poly_grad(x) - poly(x) * Qx);
    }
  }
}

Eigen::MatrixXd PotentialModel::hessian(const Eigen::VectorXd& x) const {
  switch (kind_) {
    case PotentialKind::Free: return Eigen::MatrixXd::Zero(n_, n_);
    case PotentialKind::QuadraticLocal: {
      Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n_, n_);
      for (int i = 0; i < n_; ++i) H(i, i) = -scale_ * rates_[i] * rates_[i];
      return H;
    }
    case PotentialKind::UserTabulated: {
      std::vector<double> xv(x.data(), x.data() + n_);
      Eigen::MatrixXd H(n_, n_);
      for (int j = 0; j < n_; ++j) {
        auto dj = tab_.partial(j);
        for (int k = 0; k < n_; ++k) H(j, k) = scale_ * dj.partial(k).eval(xv).real();
      }
      return H;
    }
    default: {
      const Eigen::VectorXd Qx = Q_ * x;
      if (x.dot(Qx) > kUnderflowQ) return Eigen::MatrixXd::Zero(n_, n_);
      const double G = std::exp(-0.5 * x.dot(Qx));
      const double p = poly(x);
      const Eigen::VectorXd dp = poly_grad(x);
      // ∇²(G p) with ∇G = -G Qx, ∇²G = G (Qx Qxᵀ - Q)
      return G * ((Qx * Qx.transpose() - Q_) * p - Qx * dp.transpose() - dp * Qx.transpose() + poly_hess(x));
    }
  }
}

TruncatedSeries PotentialModel::taylor(int N) const {
  if (N < 0) throw PreconditionError("taylor degree must be non-negative");
  TruncatedSeries out(n_, N);
  switch (kind_) {
    case PotentialKind::Free: return out;
    case PotentialKind::QuadraticLocal:
      out.set(MultiIndex(n_, 0), E0_);
      if (N >= 2)
        for (int i = 0; i < n_; ++i)
          out.set(add(unit_index(n_, i), unit_index(n_, i)), -0.5 * scale_ * rates_[i] * rates_[i]);
      return out;
    case PotentialKind::UserTabulated:
      out = tab_.resized(N) * scale_;
      out.add_to(MultiIndex(n_, 0), E0_);
      return out;
    default: break;
  }
  // e^{-q/2} = Σ_k (-q/2)^k / k!
  TruncatedSeries mq(n_, N);
  if (N >= 2)
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) mq.add_to(add(unit_index(n_, i), unit_index(n_, j)), -0.5 * Q_(i, j));
  TruncatedSeries term = TruncatedSeries::constant(n_, N, 1.0);
  TruncatedSeries expo = term;
  for (int k = 1; 2 * k <= N; ++k) {
    term = term * mq;
    term *= 1.0 / k;
    expo += term;
  }
  TruncatedSeries p = TruncatedSeries::constant(n_, N, E0_);
  if (N >= 3)
    for (const auto& t : cubic_) p.add_to(t.alpha, scale_ * t.coeff);
  return expo * p;
}

std::map<MultiIndex, double> PotentialModel::derivative_tensor(int order) const {
  if (order < 1 || order > 4) throw PreconditionError("derivative_tensor: order must be in 1..4");
  TruncatedSeries T = taylor(order);
  std::map<MultiIndex, double> out;
  for (const auto& a : monomials_of_degree(n_, order)) out[a] = T.derivative_at_zero(a).real();
  return out;
}

double decay_constant(const PotentialModel& model, double rho, double r_max, int samples) {
  if (!model.decaying()) throw PreconditionError("decay check needs a decaying potential kind");
  const int n = model.dim();
  double C = 0.0;
  std::vector<Eigen::VectorXd> dirs;
  for (int i = 0; i < n; ++i) {
    dirs.push_back(Eigen::VectorXd::Unit(n, i));
    dirs.push_back(-Eigen::VectorXd::Unit(n, i));
  }
  dirs.push_back(Eigen::VectorXd::Ones(n).normalized());
  for (const auto& d : dirs)
    for (int s = 0; s < samples; ++s) {
      const double r = r_max * s / (samples - 1);
      const Eigen::VectorXd x = r * d;
      const double w = std::sqrt(1.0 + r * r);
      C = std::max(C, std::abs(model.eval(x)) * std::pow(w, rho));
      C = std::max(C, model.gradient(x).norm() * std::pow(w, rho + 1));
      C = std::max(C, model.hessian(x).norm() * std::pow(w, rho + 2));
    }
  return C;
}

std::optional<double> line_integral_closed_form(const PotentialModel& model, const Eigen::VectorXd& p,
                                                const Eigen::VectorXd& d, double a, double b) {
  if (model.kind() == PotentialKind::Free) return 0.0;
  if (model.kind() != PotentialKind::Gaussian && model.kind() != PotentialKind::AnisotropicGaussian)
    return std::nullopt;
  if (!(a <= b)) throw PreconditionError("line integral needs a <= b");
  const Eigen::MatrixXd& Q = model.Q();
  const double A = d.dot(Q * d);
  if (!(A > 0.0)) throw PreconditionError("line integral needs a nonzero direction");
  const double B = d.dot(Q * p);
  const double C = p.dot(Q * p);
  const double s0 = -B / A;
  const double k = std::sqrt(0.5 * A);
  const double lo = (a - s0) * k, hi = (b - s0) * k;
  double diff;
  if (lo >= 0.0)
    diff = std::erfc(lo) - std::erfc(hi);
  else if (hi <= 0.0)
    diff = std::erfc(-hi) - std::erfc(-lo);
  else
    diff = 2.0 - std::erfc(-lo) - std::erfc(hi);
  const double amp = model.eval(Eigen::VectorXd::Zero(model.dim()));
  return amp * std::exp(-0.5 * (C - B * B / A)) * std::sqrt(M_PI / (2.0 * A)) * diff;
}

double line_integral_numeric(const PotentialModel& model, const Eigen::VectorXd& p, const Eigen::VectorXd& d, double a,
                             double b, double* error) {
  using namespace boost::math::quadrature;
  if (!(a <= b)) throw PreconditionError("line integral needs a <= b");
  const double dd = d.squaredNorm();
  if (!(dd > 0.0)) throw PreconditionError("line integral needs a nonzero direction");
  if (!model.decaying() && (std::isinf(a) || std::isinf(b)))
    throw PreconditionError("infinite line integral needs a decaying potential kind");
  const double sc = std::clamp(-p.dot(d) / dd, a, b);
  auto f = [&](double s) { return model.eval(p + s * d); };
  constexpr double tol = 1e-14;
  double total = 0.0, err = 0.0;
  auto piece = [&](double lo, double hi) {
    if (lo == hi) return;
    double e = 0.0;
    if (std::isinf(lo) && std::isinf(hi)) {
      total += sinh_sinh<double>().integrate(f, tol, &e);
    } else if (std::isinf(lo) || std::isinf(hi)) {
      total += exp_sinh<double>().integrate(f, lo, hi, tol, &e);
    } else {
      total += tanh_sinh<double>().integrate(f, lo, hi, tol, &e);
    }
    err += e;
  };
  piece(a, sc);
  piece(sc, b);
  if (error) *error = err;
  return total;
}

}  // namespace barrier
