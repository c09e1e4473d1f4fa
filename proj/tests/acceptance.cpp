// Acceptance run: one PASS/FAIL line per criterion, each with its runtime budget.
// Usage: acceptance [criterion ...]   (default: all)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "amplitude_oracle.hpp"
#include "barrier/amplitude.hpp"
#include "barrier/coupling.hpp"
#include "barrier/cross_section.hpp"
#include "barrier/dynamics.hpp"
#include "barrier/manifolds.hpp"
#include "barrier/oscillatory.hpp"
#include "barrier/quasimode.hpp"
#include "barrier/transport.hpp"
#include "models.hpp"

using namespace barrier;

namespace {

constexpr double pi = std::numbers::pi;

struct Verdict {
  bool ok = true;
  std::string detail;
};

// Accumulates a worst-case measure against its bound.
struct Worst {
  double value = 0.0;
  void add(double v) { value = std::max(value, std::isnan(v) ? INFINITY : v); }
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Eigen::VectorXd v2(double a, double b) { return (Eigen::VectorXd(2) << a, b).finished(); }

std::vector<MultiIndex> indices_of_degree(int n, int d) {
  const auto B = MonomialBasis::get(n, d);
  return {&(*B)[B->begin(d)], &(*B)[B->begin(d)] + (B->end(d) - B->begin(d))};
}

Verdict transport_structure() {
  Verdict o;
  int checked = 0;
  for (const auto& l : std::vector<std::vector<double>>{{1, 2}, {1, 1}, {1, std::sqrt(2.0)}}) {
    const auto frame = diagonal_frame(PotentialModel::quadratic_local(0.5, l), 6);
    const auto& spec = frame.spec;
    for (int N = 3; N <= 6; ++N) {
      const auto phi = eikonal_taylor(frame, N);
      for (double mu : spec.mu_seq) {
        if (mu > 2.0 * spec.lambda1() * (1.0 + 1e-12)) break;
        const auto st = analyze_transport(phi, mu, N);
        if (spec.equal(mu, 2.0 * spec.lambda1())) {
          o.ok &= st.dim_kernel == spec.count(2, spec.lambda1()) + psi_map(phi, spec).nullity;
          o.ok &= st.dim_kernel_cap_image2 == 0;
        } else {
          o.ok &= st.dim_kernel == spec.count(1, mu);
          o.ok &= st.dim_kernel_cap_image == 0;
        }
        ++checked;
      }
    }
  }
  o.detail = std::to_string(checked) + " (lambda, N, mu) cases";
  return o;
}

Verdict closed_forms() {
  Worst w;
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(a)); };
  for (const auto& m : models::builtin()) {
    const auto frame = diagonal_frame(m, 6);
    const auto phi = eikonal_taylor(frame, 6);
    for (int d : {3, 4})
      for (const auto& a : indices_of_degree(frame.dim(), d))
        w.add(rel(phi.derivative_at_zero(a).real(), phi_plus_closed_form(frame, a)));
    Eigen::VectorXd g1 = Eigen::VectorXd::Zero(frame.dim());
    g1[0] = -0.6;
    const auto phi1 = phi1_taylor(phi, frame.spec, g1, 5);
    for (int d : {2, 3})
      for (const auto& a : indices_of_degree(frame.dim(), d))
        w.add(rel(phi1.derivative_at_zero(a).real(), phi1_closed_form(frame, g1, a)));
    const auto pa = phi_jhat2(frame, g1);
    const auto pb = phi_jhat2_from_series(frame.spec, phi, phi1);
    w.add((pa - pb).max_abs() / std::max(1.0, pa.max_abs()));
    const auto gh = ghat_j_coeffs(frame, g1);
    const auto ca = c1_closed_form(frame, g1, gh.g0);
    const auto cb = c1_from_series(frame.spec, phi, phi1, g1, gh.g0, gh.g1);
    if (ca.size() != cb.size()) return {false, "c1 index sets differ"};
    for (const auto& [alpha, v] : ca) w.add(std::abs(v - cb.at(alpha)) / std::max(1.0, std::abs(v)));
  }
  return {w.value <= 1e-10, "max rel diff " + fmt("%.3g", w.value)};
}

TrappedTrajectory radial_incoming(int n, const TrappedOptions& opts = {}) {
  const auto m = PotentialModel::gaussian(0.5, n);
  return analyze_trapped(m, diagonal_frame(m, 6), Eigen::VectorXd::Unit(n, 0), Side::Incoming,
                         Eigen::VectorXd::Zero(n), opts);
}

Verdict trajectory_asymptotics() {
  Verdict o;
  TrappedOptions shifted;
  shifted.fit_hi = 3e-3;
  shifted.fit_lo = 3e-8;
  Worst window, secular;
  for (int n : {1, 2}) {
    const auto a = radial_incoming(n);
    const auto b = radial_incoming(n, shifted);
    window.add((a.g_coeffs.at({1, 0}) - b.g_coeffs.at({1, 0})).norm());
    const auto spec = barrier_spectrum(PotentialModel::gaussian(0.5, n));
    if (!spec.index_set(1, 2.0 * spec.lambda1()).empty()) return {false, "radial spectrum has a rate at 2 lambda1"};
    const auto key = std::make_pair(spec.jhat, 1);
    if (a.g_coeffs.count(key)) secular.add(a.g_coeffs.at(key).norm() / a.g_coeffs.at({1, 0}).norm());
  }
  // Cubic model: g_{ĵ,1} on e₂ equals ∂₁²∂₂V(0)(g₁)₁²/(8λ₁), the third derivative taken by central
  // differences of the Hessian in the diagonal frame.
  const auto m = models::cubic();
  const auto frame = diagonal_frame(m, 6);
  const auto zs = find_trapped_impact(m, v2(1, 0), Side::Incoming);
  if (zs.size() != 1) return {false, "expected one trapped curve on the cubic model"};
  const auto T = analyze_trapped(m, frame, v2(1, 0), Side::Incoming, zs[0]);
  const double step = 1e-3;
  auto H11 = [&](double s) { return (frame.R.transpose() * m.hessian(frame.R * v2(0, s)) * frame.R)(0, 0); };
  const double d112 = (H11(step) - H11(-step)) / (2.0 * step);
  const double g = T.g_coeffs.at({1, 0})[0];
  const double expected = 0.5 * d112 * g * g / (4.0 * frame.spec.lambda1());
  const auto key = std::make_pair(frame.spec.jhat, 1);
  if (!T.g_coeffs.count(key)) return {false, "no secular coefficient fitted on the cubic model"};
  const double cubic_rel = std::abs(T.g_coeffs.at(key)[1] - expected) / std::abs(expected);
  o.ok = window.value <= 1e-4 && secular.value <= 1e-6 && cubic_rel <= 1e-3;
  o.detail = "window " + fmt("%.2g", window.value) + ", secular " + fmt("%.2g", secular.value) + ", cubic rel " +
             fmt("%.2g", cubic_rel);
  return o;
}

Verdict tangent_plane() {
  Worst w;
  for (int n : {1, 2}) {
    const auto T = radial_incoming(n);
    if (T.hessian.rows() != n) return {false, "no Hessian for n=" + std::to_string(n)};
    Eigen::MatrixXd expected = std::sqrt(0.5) * Eigen::MatrixXd::Identity(n, n);
    expected(0, 0) = -std::sqrt(0.5);
    w.add((T.hessian - expected).cwiseAbs().maxCoeff());
  }
  return {w.value <= 1e-3, "max entry error " + fmt("%.2g", w.value)};
}

Verdict oscillatory() {
  Worst at1e4;
  bool decreasing = true;
  for (double a : {0.5, 1.0, 1.5})
    for (double b : {0.0, 1.0}) {
      const auto c = asymptotic_sweep(a, b, {1e3, 1e4, 1e5});
      at1e4.add(c.rel_errors[1]);
      decreasing &= c.decreasing;
    }
  return {at1e4.value <= 0.05 && decreasing, "max rel error at 1e4 " + fmt("%.2g", at1e4.value) +
                                                 (decreasing ? ", decreasing" : ", not decreasing everywhere")};
}

Verdict quasimode() {
  std::vector<double> h;
  for (int k = 0; k <= 8; ++k) h.push_back(std::pow(10.0, -2.0 - 0.25 * k));
  const auto r = resolvent_lower_bound_check({1.0}, h);
  const auto [lo, hi] = std::minmax_element(r.normalized.begin(), r.normalized.end());
  const bool bounded = *lo >= 0.5 && *hi <= 2.0;
  const bool slope = std::abs(r.slope - 1.0) <= 0.05;
  return {bounded && slope, "normalized in [" + fmt("%.3f", *lo) + ", " + fmt("%.3f", *hi) + "], slope " +
                                fmt("%.4f", r.slope) + " (target 1.00 +- 0.05)"};
}

Verdict amplitude() {
  Worst entry, scaling;
  std::mt19937 rng(20240611);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::uniform_int_distribution<int> nu(-3, 7);
  for (char kase : {'a', 'b', 'c'})
    for (int trial = 0; trial < 10; ++trial) {
      oracle::Draw d;
      const int n = 1 + trial % 3;
      for (int j = 0; j < n; ++j) d.lambdas.push_back(0.5 + 1.5 * U(rng));
      std::sort(d.lambdas.begin(), d.lambdas.end());
      if (kase != 'a' && n > 1) d.lambdas[n - 1] = 2.0 * d.lambdas[0];
      const auto spec = spectrum_from_rates(d.lambdas, 0.5);
      d.E = 0.3 + 1.7 * U(rng);
      d.z = -2.0 + 4.0 * U(rng);
      d.g1m = 0.1 + 2.0 * U(rng);
      d.gllp = 0.1 + 2.0 * U(rng);
      d.Dm = 0.1 + 3.0 * U(rng);
      d.Dp = 0.1 + 3.0 * U(rng);
      d.Sm = -2.0 + 4.0 * U(rng);
      d.Sp = -2.0 + 4.0 * U(rng);
      d.num = nu(rng);
      d.nup = nu(rng);
      d.ip = -(0.1 + 2.0 * U(rng));
      d.M = (U(rng) < 0.5 ? -1.0 : 1.0) * (0.05 + U(rng));
      d.kase = kase;
      d.ll = spec.mu_position(d.lambdas[static_cast<int>(U(rng) * n)]);
      std::vector<int> below;
      for (int m = 1; m < spec.jhat; ++m) below.push_back(m);
      d.k = below[static_cast<int>(U(rng) * below.size())];
      const cplx expected = oracle::printed_coefficient(d, spec);
      const auto r = leading_singular_coefficient(spec, oracle::to_input(d, spec));
      entry.add(std::abs(r.coefficient - expected) / std::abs(expected));

      // h-scaling of the assembled term against its exponents.
      const double S = 0.5 * std::accumulate(d.lambdas.begin(), d.lambdas.end(), 0.0);
      const double l1 = spec.lambda1();
      const double e = kase == 'a' ? S / spec.mu_seq[d.k - 1] - 0.5 : S / (2.0 * l1) - 0.5;
      const double p = kase == 'a' ? 0.0 : kase == 'b' ? S / l1 : S / (2.0 * l1);
      auto norm = [&](double h) { return std::abs(r.value_at(h)) * std::pow(h, -e) * std::pow(std::abs(std::log(h)), p); };
      const double ref = norm(1e-2);
      for (double h = 1e-2; h >= 1e-4; h /= std::pow(10.0, 0.25)) scaling.add(std::abs(norm(h) / ref - 1.0));
    }
  std::vector<double> z;
  for (int k = 0; k <= 100; ++k) z.push_back(-5.0 + 0.1 * k);
  Worst gam;
  for (double l1 : {1.0, std::sqrt(0.5)}) gam.add(gamma_factor_identity_check(l1, z).max_rel_error);
  const bool ok = entry.value <= 1e-12 && gam.value <= 1e-10 && scaling.value <= 1e-6;
  return {ok, "double entry " + fmt("%.2g", entry.value) + ", gamma identity " + fmt("%.2g", gam.value) +
                  ", h-scaling " + fmt("%.2g", scaling.value)};
}

Verdict cross_section() {
  const auto m = PotentialModel::gaussian(0.5, 2);
  const auto a = total_cross_section(m, v2(1, 0), 0.5, 0.05, InnerMethod::Analytic);
  const auto b = total_cross_section(m, v2(1, 0), 0.5, 0.05, InnerMethod::Numeric);
  const double diff = std::abs(a.sigma - b.sigma);
  // σ(ε)/ε² → 4∫(a e^{−y²/2})² dy = 4a²√π with a = E₀√(2π)/(2√(2E)h).
  const double h = 0.05, amp = 0.5 * std::sqrt(2.0 * pi) / (2.0 * std::sqrt(2.0 * 0.5) * h);
  const double eps = 1e-3;
  const double born = total_cross_section(m.scaled(eps), v2(1, 0), 0.5, h).sigma / (eps * eps) /
                      (4.0 * amp * amp * std::sqrt(pi));
  return {diff <= 1e-6 && std::abs(born - 1.0) <= 1e-2,
          "analytic-numeric " + fmt("%.2g", diff) + ", Born ratio " + fmt("%.5f", born)};
}

// Start points: the stable manifold for the global quadratic saddle, a generic crossing otherwise.
PhasePoint start_for(const PotentialModel& m) {
  const int n = m.dim();
  PhasePoint p;
  p.x = Eigen::VectorXd::Zero(n);
  p.xi = Eigen::VectorXd::Zero(n);
  if (m.kind() == PotentialKind::QuadraticLocal) {
    const auto l = barrier_spectrum(m).lambdas;
    for (int j = 0; j < n; ++j) {
      p.x[j] = j == 0 ? -1.0 : 0.3;
      p.xi[j] = -l[j] * p.x[j];
    }
    return p;
  }
  p.x[0] = -2.0;
  p.xi[0] = 0.9;
  if (n > 1) {
    p.x[1] = 0.4;
    p.xi[1] = 0.1;
  }
  return p;
}

Verdict dynamics() {
  Worst drift, defect;
  for (const auto& m : models::builtin()) {
    // Tabulated derivatives carry no global V; their Taylor polynomial is not a scattering potential.
    if (m.kind() == PotentialKind::UserTabulated) continue;
    const PhasePoint s = start_for(m);
    const double E = hamiltonian(m, s);
    std::vector<double> ts;
    for (int k = 1; k <= 30; ++k) ts.push_back(k);
    const auto tr = flow(m, s, 0.0, 30.0, {}, ts);
    double window_start = E;
    for (std::size_t k = 0; k < tr.size(); ++k) {
      const double H = hamiltonian(m, tr.states[k]);
      drift.add(std::abs(H - window_start) / std::max(1.0, std::abs(E)));
      if ((k + 1) % 10 == 0) window_start = H;
    }
    const auto vt = variational_flow(m, s, 0.0, 10.0, {}, {2.0, 5.0, 10.0});
    for (const auto& J : vt.jacobians) defect.add(symplectic_defect(J));
  }
  return {drift.value <= 1e-9 && defect.value <= 1e-8,
          "energy drift per 10 units " + fmt("%.2g", drift.value) + ", symplectic defect " + fmt("%.2g", defect.value)};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "transport kernel structure", 1.0, transport_structure},
      {2, "closed-form cross-checks", 5.0, closed_forms},
      {3, "trajectory asymptotics", 120.0, trajectory_asymptotics},
      {4, "tangent-plane Hessian limit", 60.0, tangent_plane},
      {5, "oscillatory-integral asymptotics", 30.0, oscillatory},
      {6, "quasimode resolvent bound", 60.0, quasimode},
      {7, "amplitude formula integrity", 10.0, amplitude},
      {8, "cross-section checks", 60.0, cross_section},
      {9, "dynamics hygiene", 30.0, dynamics},
  };
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));
  int failures = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.budget_s;
    const bool pass = o.ok && in_time;
    failures += !pass;
    std::printf("criterion %d %s: %s (%s; %.2f s of %.0f s%s)\n", c.id, c.name, pass ? "PASS" : "FAIL",
                o.detail.c_str(), secs, c.budget_s, in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
