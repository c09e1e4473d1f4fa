#include "runner.hpp"

#include <algorithm>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "barrier/amplitude.hpp"
#include "barrier/coupling.hpp"
#include "barrier/cross_section.hpp"
#include "barrier/error.hpp"
#include "barrier/io.hpp"
#include "barrier/oscillatory.hpp"
#include "barrier/parallel.hpp"
#include "barrier/quasimode.hpp"
#include "barrier/scattering.hpp"
#include "barrier/spectrum.hpp"
#include "barrier/transport.hpp"

#ifndef BARRIER_VERSION
#define BARRIER_VERSION "0.0.0"
#endif

namespace barrier::cli {

using nlohmann::json;

namespace {

/// Thrown by a task whose inputs are unavailable; the task is reported as skipped.
struct Skip {
  std::string reason;
};

json vec_json(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json mat_json(const Eigen::MatrixXd& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) rows.push_back(vec_json(M.row(i).transpose()));
  return rows;
}

json cplx_json(cplx z) { return json::array({z.real(), z.imag()}); }

Eigen::VectorXd json_vec(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::MatrixXd json_mat(const json& j) {
  if (j.empty()) return {};
  Eigen::MatrixXd M(j.size(), j[0].size());
  for (std::size_t i = 0; i < j.size(); ++i) M.row(static_cast<Eigen::Index>(i)) = json_vec(j[i]).transpose();
  return M;
}

json series_json(const TruncatedSeries& s) {
  json o = json::object();
  const auto& B = s.basis();
  for (std::size_t k = 0; k < B.size(); ++k)
    if (s.at(k) != cplx(0.0)) o[to_string(B[k])] = cplx_json(s.at(k));
  return o;
}

std::string csv_row(const std::vector<double>& v) {
  std::string r;
  for (std::size_t k = 0; k < v.size(); ++k) r += (k ? "," : "") + format_double(v[k]);
  return r + "\n";
}

std::string fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

const PotentialModel& need_potential(const RunConfig& c) {
  if (!c.potential) throw ConfigError("potential", "required field is missing");
  return *c.potential;
}

const Eigen::VectorXd& need_dir(const std::optional<Eigen::VectorXd>& d, const char* name) {
  if (!d) throw ConfigError(name, "required field is missing");
  return *d;
}

const std::vector<double>& need_h(const RunConfig& c) {
  if (c.h_grid.empty()) throw ConfigError("h_grid", "required field is missing");
  return c.h_grid;
}

double classical_energy(const RunConfig& c) {
  return c.classical_energy ? *c.classical_energy : need_potential(c).E0();
}

struct TrappedSet {
  std::vector<TrappedTrajectory> incoming, outgoing;
};

struct Context {
  const RunConfig& config;
  std::filesystem::path out;
  int threads;
  TrappedOptions trapped_opts;
  std::optional<TrappedSet> trapped;
  std::optional<std::vector<ScatteringData>> regular;
  bool trapped_attempted = false;

  Context(const RunConfig& c, int th) : config(c), out(c.output_dir), threads(th), trapped_opts(c.trapped) {
    trapped_opts.scatter.threads = th;
  }

  void write(TaskRecord& rec, const std::string& name, const std::string& text) const {
    write_atomic(out / name, text);
    rec.outputs.push_back(name);
  }

  // Trapped data from this run, else from a trapped.json left in the output directory.
  const TrappedSet& trapped_data() {
    if (trapped) return *trapped;
    const auto cache = out / "trapped.json";
    if (trapped_attempted || !std::filesystem::exists(cache)) throw Skip{"missing dependency: trapped"};
    std::ifstream in(cache);
    const json j = json::parse(in);
    TrappedSet s;
    for (const auto& r : j.at("incoming")) s.incoming.push_back(trapped_from_json(r));
    for (const auto& r : j.at("outgoing")) s.outgoing.push_back(trapped_from_json(r));
    trapped = std::move(s);
    return *trapped;
  }

  const std::vector<ScatteringData>& regular_data() {
    if (!regular) {
      const auto& m = need_potential(config);
      regular = find_regular_trajectories(m, need_dir(config.omega, "omega"), need_dir(config.theta, "theta"),
                                          classical_energy(config), config.regular_box, trapped_opts.scatter);
    }
    return *regular;
  }
};

void task_trajectory(Context& cx, TaskRecord& rec) {
  const auto& rows = cx.regular_data();
  const int n = need_potential(cx.config).dim();
  std::string csv;
  for (int i = 0; i < n; ++i) csv += "omega_" + std::to_string(i + 1) + ",";
  for (int i = 0; i < n; ++i) csv += "z_" + std::to_string(i + 1) + ",";
  csv += "E,";
  for (int i = 0; i < n; ++i) csv += "xi_inf_" + std::to_string(i + 1) + ",";
  csv += "sigma_hat,S_inf,nu_inf,degenerate\n";
  for (const auto& r : rows) {
    std::vector<double> v(r.omega.data(), r.omega.data() + n);
    v.insert(v.end(), r.z.data(), r.z.data() + n);
    v.push_back(r.E);
    v.insert(v.end(), r.xi_inf.data(), r.xi_inf.data() + n);
    v.insert(v.end(), {r.sigma_hat, r.S_inf, static_cast<double>(r.nu_inf), r.degenerate ? 1.0 : 0.0});
    csv += csv_row(v);
  }
  cx.write(rec, "trajectory.csv", csv);
  rec.checks = {{"roots", rows.size()}};
}

void task_trapped(Context& cx, TaskRecord& rec) {
  cx.trapped_attempted = true;
  const auto& m = need_potential(cx.config);
  const auto& omega = need_dir(cx.config.omega, "omega");
  const auto& theta = need_dir(cx.config.theta, "theta");
  const auto frame = diagonal_frame(m, cx.config.series_degree);
  TrappedSet s;
  for (const auto& z : find_trapped_impact(m, omega, Side::Incoming, cx.trapped_opts))
    s.incoming.push_back(analyze_trapped(m, frame, omega, Side::Incoming, z, cx.trapped_opts));
  for (const auto& z : find_trapped_impact(m, theta, Side::Outgoing, cx.trapped_opts))
    s.outgoing.push_back(analyze_trapped(m, frame, theta, Side::Outgoing, z, cx.trapped_opts));
  json j{{"incoming", json::array()}, {"outgoing", json::array()}};
  for (const auto& t : s.incoming) j["incoming"].push_back(to_json(t));
  for (const auto& t : s.outgoing) j["outgoing"].push_back(to_json(t));
  cx.write(rec, "trapped.json", j.dump(2) + "\n");
  rec.checks = {{"incoming", s.incoming.size()}, {"outgoing", s.outgoing.size()}};
  cx.trapped = std::move(s);
}

Eigen::VectorXd coeff_or_zero(const GCoeffs& g, int j, int m, int n) {
  auto it = g.find({j, m});
  return it == g.end() ? Eigen::VectorXd::Zero(n) : it->second;
}

void task_series(Context& cx, TaskRecord& rec) {
  const auto& m = need_potential(cx.config);
  const int N = cx.config.series_degree;
  const auto frame = diagonal_frame(m, N);
  const auto phi = eikonal_taylor(frame, N);
  json j{{"degree", N},
         {"lambdas", frame.spec.lambdas},
         {"mu_seq", frame.spec.mu_seq},
         {"jhat", frame.spec.jhat},
         {"rotation", mat_json(frame.R)},
         {"V", series_json(frame.V)},
         {"phi_plus", series_json(phi)}};
  // Trajectory-dependent constants when trapped data exist; the Taylor data stand on their own.
  std::optional<TrappedSet> ts;
  try {
    ts = cx.trapped_data();
  } catch (const Skip& s) {
    j["pairs_note"] = s.reason;
  }
  if (ts) {
    const int n = frame.dim();
    json pairs = json::array();
    for (std::size_t k = 0; k < ts->incoming.size(); ++k)
      for (std::size_t l = 0; l < ts->outgoing.size(); ++l) {
        const auto& gi = ts->incoming[k].g_coeffs;
        const auto& go = ts->outgoing[l].g_coeffs;
        const Eigen::VectorXd g1m = coeff_or_zero(gi, 1, 0, n), g1p = coeff_or_zero(go, 1, 0, n);
        const int jh = frame.spec.jhat;
        pairs.push_back({{"k", k + 1},
                         {"l", l + 1},
                         {"M2", m2_coefficient(frame, g1m, g1p)},
                         {"M1", m1_coefficient(frame, g1m, g1p, coeff_or_zero(gi, jh, 0, n), coeff_or_zero(go, jh, 0, n))},
                         {"phi1_minus", series_json(phi1_taylor(phi, frame.spec, g1m, N))},
                         {"phi_jhat2", series_json(phi_jhat2(frame, g1m))}});
      }
    j["pairs"] = pairs;
  }
  cx.write(rec, "series.json", j.dump(2) + "\n");
}

void task_amplitude(Context& cx, TaskRecord& rec) {
  const auto& m = need_potential(cx.config);
  const auto& hs = need_h(cx.config);
  const TrappedSet& ts = cx.trapped_data();
  const auto frame = diagonal_frame(m, cx.config.series_degree);
  const auto& spec = frame.spec;
  const int n = frame.dim();
  const double E = classical_energy(cx.config);
  std::vector<AmplitudeResult> terms;
  json tj = json::array();
  auto add = [&](const AmplitudeResult& a, json meta) {
    meta["kind"] = term_kind_name(a.kind);
    meta["phase_action"] = a.phase_action;
    meta["coefficient"] = cplx_json(a.coefficient);
    meta["h_exponent"] = cplx_json(a.h_exponent);
    meta["log_h_power"] = cplx_json(a.log_h_power);
    meta["convention"] = a.convention;
    meta["order"] = "leading";
    tj.push_back(meta);
    terms.push_back(a);
  };
  const auto& reg = cx.regular_data();
  for (std::size_t j = 0; j < reg.size(); ++j) {
    if (reg[j].degenerate) throw NumericalError("degenerate direction: regular root " + std::to_string(j + 1) +
                                                " has vanishing angular density");
    add(leading_regular_coefficient(reg[j].sigma_hat, reg[j].nu_inf, reg[j].S_inf), {{"j", j + 1}});
  }
  const int jh = spec.jhat;
  for (std::size_t k = 0; k < ts.incoming.size(); ++k)
    for (std::size_t l = 0; l < ts.outgoing.size(); ++l) {
      const auto& in = ts.incoming[k];
      const auto& out = ts.outgoing[l];
      std::vector<Eigen::VectorXd> gm, gp;
      for (int q = 1; q < jh; ++q) {
        gm.push_back(coeff_or_zero(in.g_coeffs, q, 0, n));
        gp.push_back(coeff_or_zero(out.g_coeffs, q, 0, n));
      }
      const Eigen::VectorXd g1m = coeff_or_zero(in.g_coeffs, 1, 0, n), g1p = coeff_or_zero(out.g_coeffs, 1, 0, n);
      const double M2 = m2_coefficient(frame, g1m, g1p);
      const double M1 = m1_coefficient(frame, g1m, g1p, coeff_or_zero(in.g_coeffs, jh, 0, n),
                                       coeff_or_zero(out.g_coeffs, jh, 0, n));
      SingularInput si;
      si.coupling = classify_case(gm, gp, M2, M1, spec);
      si.sigma = sigma_E(spec, cx.config.z);
      si.E = E;
      si.g1_minus = g1m.norm();
      si.gll_plus = coeff_or_zero(out.g_coeffs, out.ll, 0, n).norm();
      si.ll = out.ll;
      si.D_minus = in.D;
      si.D_plus = out.D;
      si.nu_minus = in.nu;
      si.nu_plus = out.nu;
      si.S_minus = in.action;
      si.S_plus = out.action;
      add(leading_singular_coefficient(spec, si), {{"k", k + 1},
                                                   {"l", l + 1},
                                                   {"case", std::string(1, si.coupling.case_label)},
                                                   {"k_min", si.coupling.k_min},
                                                   {"M2", M2},
                                                   {"M1", M1},
                                                   {"inner_products", si.coupling.inner_products}});
    }
  if (terms.empty()) throw NumericalError("no regular or trapped trajectory contributes to the amplitude");
  json A = json::array();
  std::string csv = "h,A_re,A_im,abs_A\n";
  for (double h : hs) {
    const auto s = assemble_amplitude(terms, h);
    A.push_back(cplx_json(s.A));
    csv += csv_row({h, s.A.real(), s.A.imag(), std::abs(s.A)});
  }
  json j{{"E", E}, {"z", cx.config.z}, {"sigma", cplx_json(sigma_E(spec, cx.config.z).value)},
         {"terms", tj}, {"h_grid", hs}, {"A", A}};
  cx.write(rec, "amplitude.json", j.dump(2) + "\n");
  cx.write(rec, "amplitude.csv", csv);
  rec.checks = {{"terms", terms.size()}};
}

void task_cross_section(Context& cx, TaskRecord& rec) {
  const auto& m = need_potential(cx.config);
  const auto& omega = need_dir(cx.config.omega, "omega");
  const auto& hs = need_h(cx.config);
  std::vector<CrossSectionResult> res(hs.size());
  parallel_for(hs.size(), cx.threads, [&](std::size_t k) {
    res[k] = total_cross_section(m, omega, m.E0() + cx.config.z * hs[k], hs[k], cx.config.inner_method);
  });
  std::string csv = "h,E,sigma,error,box_radius,method\n";
  for (const auto& r : res) {
    std::string row = csv_row({r.h, r.E, r.sigma, r.error, r.box_radius});
    row.pop_back();
    csv += row + (r.method == InnerMethod::Numeric ? ",numeric\n" : ",analytic\n");
  }
  cx.write(rec, "cross_section.csv", csv);
}

void task_asymptotics(Context& cx, TaskRecord& rec) {
  const auto& a = cx.config.asymptotics;
  std::string csv = "alpha,beta,lambda,numeric_re,numeric_im,predicted_re,predicted_im,rel_error\n";
  json checks = json::array();
  for (double al : a.alpha)
    for (double be : a.beta) {
      const auto c = asymptotic_sweep(al, be, a.lambdas, {}, 1e-9, cx.threads);
      for (std::size_t k = 0; k < c.lambdas.size(); ++k)
        csv += csv_row({al, be, c.lambdas[k], c.numeric[k].real(), c.numeric[k].imag(), c.predicted[k].real(),
                        c.predicted[k].imag(), c.rel_errors[k]});
      checks.push_back({{"alpha", al},
                        {"beta", be},
                        {"full_expansion", c.full_expansion},
                        {"decreasing", c.decreasing},
                        {"monotonicity_claimed", c.monotonicity_claimed}});
    }
  cx.write(rec, "verify_asymptotics.csv", csv);
  rec.checks = checks;
}

void task_quasimode(Context& cx, TaskRecord& rec) {
  const auto& q = cx.config.quasimode;
  const auto& hs = q.h_grid.empty() ? need_h(cx.config) : q.h_grid;
  const auto r = resolvent_lower_bound_check(q.lambdas, hs, {}, cx.threads);
  std::string csv = "h,norm_u,norm_residual,norm_cubic,normalized,ratio\n";
  for (std::size_t k = 0; k < r.h.size(); ++k)
    csv += csv_row({r.h[k], r.norm_u[k], r.norm_residual[k], r.norm_cubic[k], r.normalized[k], r.ratio[k]});
  cx.write(rec, "quasimode.csv", csv);
  rec.checks = {{"n", r.n},
                {"alpha", r.exponents.alpha},
                {"beta", r.exponents.beta},
                {"slope", r.slope},
                {"slope_ok", r.slope_ok},
                {"fit_residual", r.fit_residual},
                {"log_trend", r.log_trend},
                {"normalized_spread", r.normalized_spread}};
}

using TaskFn = void (*)(Context&, TaskRecord&);

const std::map<std::string, TaskFn>& task_table() {
  static const std::map<std::string, TaskFn> t{{"trajectory", task_trajectory},
                                               {"trapped", task_trapped},
                                               {"series", task_series},
                                               {"amplitude", task_amplitude},
                                               {"cross-section", task_cross_section},
                                               {"verify-asymptotics", task_asymptotics},
                                               {"quasimode", task_quasimode}};
  return t;
}

}  // namespace

const char* status_name(TaskStatus s) {
  switch (s) {
    case TaskStatus::Ok: return "ok";
    case TaskStatus::Failed: return "failed";
    case TaskStatus::Skipped: return "skipped";
  }
  return "unknown";
}

bool RunReport::all_ok() const {
  for (const auto& t : tasks)
    if (t.status != TaskStatus::Ok) return false;
  return !tasks.empty();
}

int threads_from_env() {
  const char* v = std::getenv("BARRIER_THREADS");
  if (!v || !*v) return 1;
  char* end = nullptr;
  const long k = std::strtol(v, &end, 10);
  if (*end != '\0' || k < 1 || k > 1024) throw ConfigError("BARRIER_THREADS", "expected an integer in [1, 1024]");
  return static_cast<int>(k);
}

void write_atomic(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot write " + tmp.string());
    os << text;
    if (!os.flush()) throw Error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

json to_json(const TrappedTrajectory& t) {
  json g = json::array();
  for (const auto& [key, v] : t.g_coeffs) g.push_back({{"j", key.first}, {"m", key.second}, {"g", vec_json(v)}});
  json j{{"side", t.side == Side::Incoming ? "incoming" : "outgoing"},
         {"direction", vec_json(t.direction)},
         {"z_star", vec_json(t.z_star)},
         {"g_coeffs", g},
         {"action", t.action},
         {"D", t.D},
         {"D_spread", t.D_spread},
         {"nu", t.nu},
         {"ll", t.ll},
         {"g1_nonzero", t.g1_nonzero},
         {"momentum_nudge", t.momentum_nudge},
         {"stable_defect", t.stable_defect},
         {"fit_condition", t.fit_condition},
         {"stage_residuals", t.stage_residuals}};
  if (t.hessian.size()) {
    j["hessian"] = mat_json(t.hessian);
    j["hessian_expected"] = mat_json(t.hessian_expected);
  }
  return j;
}

TrappedTrajectory trapped_from_json(const json& j) {
  TrappedTrajectory t;
  t.side = j.at("side").get<std::string>() == "incoming" ? Side::Incoming : Side::Outgoing;
  t.direction = json_vec(j.at("direction"));
  t.z_star = json_vec(j.at("z_star"));
  for (const auto& g : j.at("g_coeffs")) t.g_coeffs[{g.at("j").get<int>(), g.at("m").get<int>()}] = json_vec(g.at("g"));
  t.action = j.at("action").get<double>();
  t.D = j.at("D").get<double>();
  t.D_spread = j.value("D_spread", 0.0);
  t.nu = j.at("nu").get<int>();
  t.ll = j.at("ll").get<int>();
  t.g1_nonzero = j.value("g1_nonzero", false);
  t.momentum_nudge = j.value("momentum_nudge", 0.0);
  t.stable_defect = j.value("stable_defect", 0.0);
  t.fit_condition = j.value("fit_condition", 0.0);
  if (j.contains("stage_residuals")) t.stage_residuals = j.at("stage_residuals").get<std::vector<double>>();
  if (j.contains("hessian")) {
    t.hessian = json_mat(j.at("hessian"));
    t.hessian_expected = json_mat(j.at("hessian_expected"));
  }
  return t;
}

RunReport run_tasks(const RunConfig& config, const std::vector<std::string>& tasks, const std::string& config_text,
                    int threads) {
  RunReport report;
  report.config_hash = fnv1a(config_text);
  report.version = BARRIER_VERSION;
  report.threads = threads;
  Context cx(config, threads);
  for (const auto& name : task_names()) {
    if (std::find(tasks.begin(), tasks.end(), name) == tasks.end()) continue;
    TaskRecord rec;
    rec.name = name;
    const auto start = std::chrono::steady_clock::now();
    try {
      task_table().at(name)(cx, rec);
      rec.status = TaskStatus::Ok;
    } catch (const Skip& s) {
      rec.status = TaskStatus::Skipped;
      rec.reason = s.reason;
    } catch (const std::exception& e) {
      rec.status = TaskStatus::Failed;
      rec.reason = e.what();
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.tasks.push_back(std::move(rec));
  }
  json tj = json::array();
  json manifest = json::array();
  for (const auto& t : report.tasks) {
    json o{{"name", t.name}, {"status", status_name(t.status)}, {"outputs", t.outputs}, {"seconds", t.seconds}};
    if (!t.reason.empty()) o["reason"] = t.reason;
    if (!t.checks.is_null()) o["checks"] = t.checks;
    tj.push_back(o);
    for (const auto& f : t.outputs) manifest.push_back(f);
  }
  const json rj{{"tool", "barrier-scatter"},
                {"version", report.version},
                {"config_hash", report.config_hash},
                {"threads", threads},
                {"tasks", tj},
                {"outputs", manifest}};
  write_atomic(config.output_dir / "report.json", rj.dump(2) + "\n");
  return report;
}

RunReport run_config(const std::filesystem::path& path, const std::filesystem::path& out_override) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  json j;
  try {
    j = json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
  }
  RunConfig c = parse_config(j);
  if (!out_override.empty()) c.output_dir = out_override;
  return run_tasks(c, c.tasks, ss.str(), threads_from_env());
}

}  // namespace barrier::cli
