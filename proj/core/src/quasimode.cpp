#include "barrier/quasimode.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "barrier/error.hpp"
#include "barrier/io.hpp"
#include "barrier/oscillatory.hpp"
#include "barrier/parallel.hpp"

namespace barrier {

namespace {

// S and its first two derivatives, written through g = 1/x − 1/(1 − x) so S = 1/(1 + e^g).
struct Step {
  double s = 0.0, d1 = 0.0, d2 = 0.0;
};

Step step3(double x) {
  if (x <= 0.0) return {0.0, 0.0, 0.0};
  if (x >= 1.0) return {1.0, 0.0, 0.0};
  const double g = 1.0 / x - 1.0 / (1.0 - x);
  const double s = smooth_step(x);
  const double c = std::cosh(0.5 * g);
  const double w = std::abs(g) > 1400.0 ? 0.0 : 1.0 / (4.0 * c * c);  // S(1 − S)
  const double k = 1.0 / (x * x) + 1.0 / ((1.0 - x) * (1.0 - x));
  const double dk = -2.0 / (x * x * x) + 2.0 / ((1.0 - x) * (1.0 - x) * (1.0 - x));
  const double d1 = w * k;
  return {s, d1, d1 * (1.0 - 2.0 * s) * k + w * dk};
}

struct Jet {
  double f = 0.0, d1 = 0.0, d2 = 0.0;
};

Jet phi_jet(double t) {  // t ≥ 0
  const Step S = step3(t - 1.0);
  return {1.0 - S.s, -S.d1, -S.d2};
}

Jet chi_jet(double x) {
  const Step S = step3(x - 1.0);
  return {x * (1.0 - S.s) + 2.0 * S.s, 1.0 - S.s + (2.0 - x) * S.d1, -2.0 * S.d1 + (2.0 - x) * S.d2};
}

// One-dimensional factor on t > 0: v = φ(t/h^α)χ(h^β t^{−1/2}) and its derivatives.
Jet v_jet(double t, double h, const QuasimodeExponents& e) {
  const double ha = std::pow(h, e.alpha), hb = std::pow(h, e.beta);
  const Jet A0 = phi_jet(t / ha);
  const Jet A{A0.f, A0.d1 / ha, A0.d2 / (ha * ha)};
  const double y = hb / std::sqrt(t);
  const double y1 = -y / (2.0 * t), y2 = 3.0 * y / (4.0 * t * t);
  const Jet C = chi_jet(y);
  const Jet B{C.f, C.d1 * y1, C.d2 * y1 * y1 + C.d1 * y2};
  return {A.f * B.f, A.d1 * B.f + A.f * B.d1, A.d2 * B.f + 2.0 * A.d1 * B.d1 + A.f * B.d2};
}

struct Factor {
  double vv = 0.0;                 // ‖v‖²
  double ww = 0.0;                 // ‖W‖²
  std::complex<double> vw = 0.0;   // ⟨v, W⟩
  double moment[4] = {0, 0, 0, 0}; // ∫t^{2p}v²
};

Factor factor_integrals(double lambda, double h, const QuasimodeExponents& e) {
  const double ha = std::pow(h, e.alpha), hb2 = std::pow(h, 2.0 * e.beta);
  // Breakpoints where a cutoff switches; between them the integrand is smooth in ln t.
  std::vector<double> cuts{hb2 / 4.0, hb2, ha, 2.0 * ha};
  std::sort(cuts.begin(), cuts.end());
  Factor F;
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  auto add = [&](auto&& g, double a, double b) {  // ∫_a^b g(t)dt in s = ln t
    return GK::integrate([&](double s) { const double t = std::exp(s); return g(t) * t; }, std::log(a), std::log(b), 15,
                         1e-13);
  };
  auto W = [&](double t) {
    const Jet v = v_jet(t, h, e);
    return std::complex<double>(h * h * v.d2, h * lambda * (2.0 * t * v.d1 + v.f));
  };
  // On (0, h^{2β}/4] v ≡ 2, so W = 2ihλ and the pieces are elementary.
  const double t0 = cuts.front();
  F.vv = 4.0 * t0;
  F.ww = 4.0 * h * h * lambda * lambda * t0;
  F.vw = std::complex<double>(0.0, 4.0 * h * lambda * t0);
  for (int p = 0; p < 4; ++p) F.moment[p] = 4.0 * std::pow(t0, 2 * p + 1) / (2 * p + 1);
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = cuts[k], b = cuts[k + 1];
    if (!(b > a)) continue;
    F.vv += add([&](double t) { const double v = v_jet(t, h, e).f; return v * v; }, a, b);
    F.ww += add([&](double t) { return std::norm(W(t)); }, a, b);
    F.vw += std::complex<double>(add([&](double t) { return v_jet(t, h, e).f * W(t).real(); }, a, b),
                                 add([&](double t) { return v_jet(t, h, e).f * W(t).imag(); }, a, b));
    for (int p = 0; p < 4; ++p)
      F.moment[p] += add([&](double t) { const double v = v_jet(t, h, e).f; return std::pow(t, 2 * p) * v * v; }, a, b);
  }
  // Even in t: double the half-line values.
  F.vv *= 2.0;
  F.ww *= 2.0;
  F.vw *= 2.0;
  for (double& m : F.moment) m *= 2.0;
  return F;
}

}  // namespace

double quasimode_phi(double t) { return phi_jet(std::abs(t)).f; }
double quasimode_chi(double x) { return chi_jet(x).f; }

QuasimodeNorms quasimode_norms(const std::vector<double>& lambdas, double h, const QuasimodeExponents& e) {
  if (lambdas.empty()) throw PreconditionError("quasimode needs at least one rate");
  if (!(h > 0.0 && h <= 0.1)) throw PreconditionError("quasimode needs 0 < h <= 0.1");
  if (!(e.alpha > 0.0 && e.alpha < 2.0 * e.beta)) throw PreconditionError("quasimode exponents need 0 < alpha < 2 beta");
  const int n = static_cast<int>(lambdas.size());
  std::vector<Factor> F;
  for (double l : lambdas) F.push_back(factor_integrals(l, h, e));

  QuasimodeNorms r;
  r.h = h;
  double uu = 1.0;
  for (const auto& f : F) uu *= f.vv;
  r.norm_u = std::sqrt(uu);
  // (P − E₀)u = −½ Σ_k W_k Π_{j≠k} u_j up to the common phase.
  double rr = 0.0;
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) {
      double others = 1.0;
      for (int j = 0; j < n; ++j)
        if (j != k && j != l) others *= F[j].vv;
      if (k == l)
        rr += F[k].ww * others;
      else
        rr += (std::conj(F[k].vw) * F[l].vw).real() * others;
    }
  r.norm_residual = 0.5 * std::sqrt(std::max(rr, 0.0));
  // |x|⁶ = Σ_{i,j,k} x_i²x_j²x_k².
  double cubic = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        std::vector<int> pw(n, 0);
        ++pw[i];
        ++pw[j];
        ++pw[k];
        double term = 1.0;
        for (int m = 0; m < n; ++m) term *= F[m].moment[pw[m]];
        cubic += term;
      }
  r.norm_cubic = std::sqrt(cubic);
  return r;
}

QuasimodeReport resolvent_lower_bound_check(const std::vector<double>& lambdas, const std::vector<double>& h_grid,
                                            const QuasimodeExponents& e, int threads) {
  if (h_grid.size() < 3) throw PreconditionError("h grid needs at least three points");
  for (std::size_t k = 1; k < h_grid.size(); ++k)
    if (!(h_grid[k] < h_grid[k - 1])) throw PreconditionError("h grid must be decreasing");
  if (!(h_grid.front() / h_grid.back() >= 100.0 * (1.0 - 1e-12)))
    throw PreconditionError("h grid must span at least two decades");
  const int n = static_cast<int>(lambdas.size());
  QuasimodeReport rep;
  rep.n = n;
  rep.exponents = e;
  rep.h = h_grid;
  const std::size_t m = h_grid.size();
  std::vector<QuasimodeNorms> N(m);
  parallel_for(m, threads, [&](std::size_t k) { N[k] = quasimode_norms(lambdas, h_grid[k], e); });
  for (const auto& q : N) {
    const double L = std::abs(std::log(q.h));
    rep.norm_u.push_back(q.norm_u);
    rep.norm_residual.push_back(q.norm_residual);
    rep.norm_cubic.push_back(q.norm_cubic);
    rep.normalized.push_back(q.norm_u / (std::pow(q.h, e.beta * n) * std::pow(L, 0.5 * n)));
    rep.ratio.push_back(q.norm_u / q.norm_residual);
  }
  rep.normalized_spread = *std::max_element(rep.normalized.begin(), rep.normalized.end()) /
                          *std::min_element(rep.normalized.begin(), rep.normalized.end());
  auto fit = [](const std::vector<double>& x, const std::vector<double>& y, double* rms) {
    const double k = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sx += x[i];
      sy += y[i];
      sxx += x[i] * x[i];
      sxy += x[i] * y[i];
    }
    const double b = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    const double a = (sy - b * sx) / k;
    if (rms) {
      double r = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) r += std::pow(y[i] - a - b * x[i], 2);
      *rms = std::sqrt(r / k);
    }
    return b;
  };
  std::vector<double> lx, ly, ll, lt;
  for (std::size_t k = 0; k < m; ++k) {
    lx.push_back(-std::log(h_grid[k]));
    ly.push_back(std::log(rep.ratio[k]));
    ll.push_back(std::log(std::abs(std::log(h_grid[k]))));
    lt.push_back(std::log(h_grid[k] * rep.ratio[k]));
  }
  rep.slope = fit(lx, ly, &rep.fit_residual);
  rep.log_trend = fit(ll, lt, nullptr);
  rep.slope_ok = rep.slope >= 0.95 && rep.slope <= 1.05;
  if (rep.fit_residual > 0.05)
    throw NumericalError("log-log fit residual " + format_double(rep.fit_residual) + " is too large");
  return rep;
}

}  // namespace barrier
