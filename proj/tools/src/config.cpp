#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "barrier/error.hpp"
#include "barrier/multi_index.hpp"

namespace barrier::cli {

using nlohmann::json;

namespace {

const json* find(const json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

double number(const json& v, const std::string& field) {
  if (!v.is_number()) throw ConfigError(field, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(field, "expected a finite number");
  return d;
}

double positive(const json& v, const std::string& field) {
  const double d = number(v, field);
  if (!(d > 0.0)) throw ConfigError(field, "expected a positive number");
  return d;
}

int integer(const json& v, const std::string& field, int lo, int hi) {
  if (!v.is_number_integer()) throw ConfigError(field, "expected an integer");
  const long long k = v.get<long long>();
  if (k < lo || k > hi)
    throw ConfigError(field, "expected an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return static_cast<int>(k);
}

std::vector<double> numbers(const json& v, const std::string& field) {
  if (!v.is_array()) throw ConfigError(field, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t k = 0; k < v.size(); ++k) out.push_back(number(v[k], field + "[" + std::to_string(k) + "]"));
  return out;
}

Eigen::VectorXd vec(const json& v, const std::string& field) {
  const auto x = numbers(v, field);
  if (x.empty()) throw ConfigError(field, "expected a non-empty vector");
  return Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
}

Eigen::VectorXd unit_vec(const json& v, const std::string& field) {
  Eigen::VectorXd x = vec(v, field);
  if (std::abs(x.norm() - 1.0) > 1e-12) throw ConfigError(field, "expected a unit vector (|v| = 1 to 1e-12)");
  return x;
}

Eigen::MatrixXd matrix(const json& v, const std::string& field) {
  if (!v.is_array() || v.empty()) throw ConfigError(field, "expected a square matrix as an array of rows");
  const auto n = static_cast<Eigen::Index>(v.size());
  Eigen::MatrixXd Q(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::string row = field + "[" + std::to_string(i) + "]";
    const auto r = numbers(v[i], row);
    if (static_cast<Eigen::Index>(r.size()) != n) throw ConfigError(row, "expected " + std::to_string(n) + " entries");
    for (Eigen::Index k = 0; k < n; ++k) Q(i, k) = r[k];
  }
  if (!Q.isApprox(Q.transpose(), 1e-14)) throw ConfigError(field, "expected a symmetric matrix");
  return Q;
}

const json& require(const json& j, const char* key, const std::string& prefix) {
  const json* v = find(j, key);
  if (!v) throw ConfigError(prefix + key, "required field is missing");
  return *v;
}

std::vector<double> decreasing_grid(const json& v, const std::string& field) {
  auto h = numbers(v, field);
  if (h.empty()) throw ConfigError(field, "expected a non-empty grid");
  for (std::size_t k = 0; k < h.size(); ++k) {
    if (!(h[k] > 0.0)) throw ConfigError(field, "grid values must be positive");
    if (k > 0 && !(h[k] < h[k - 1])) throw ConfigError(field, "grid must be strictly decreasing");
  }
  return h;
}

MultiIndex index_key(const std::string& key, int n, const std::string& field) {
  MultiIndex a;
  try {
    a = parse_multi_index(key);
  } catch (const std::exception&) {
    throw ConfigError(field, "malformed multi-index '" + key + "'");
  }
  if (static_cast<int>(a.size()) != n || std::any_of(a.begin(), a.end(), [](int v) { return v < 0; }))
    throw ConfigError(field, "multi-index '" + key + "' needs " + std::to_string(n) + " non-negative entries");
  return a;
}

}  // namespace

PotentialModel parse_potential(const json& j) {
  const std::string P = "potential.";
  if (!j.is_object()) throw ConfigError("potential", "expected an object");
  const json& k = require(j, "kind", P);
  if (!k.is_string()) throw ConfigError("potential.kind", "expected a string");
  PotentialKind kind;
  try {
    kind = parse_kind(k.get<std::string>());
  } catch (const PreconditionError&) {
    throw ConfigError("potential.kind", "unknown potential kind '" + k.get<std::string>() + "'");
  }
  auto E0 = [&] { return positive(require(j, "E0", P), "potential.E0"); };
  auto dim = [&] { return integer(require(j, "n", P), "potential.n", 1, 6); };
  try {
    switch (kind) {
      case PotentialKind::Free:
        return PotentialModel::free(dim());
      case PotentialKind::Gaussian:
        return PotentialModel::gaussian(E0(), dim());
      case PotentialKind::QuadraticLocal: {
        auto l = numbers(require(j, "lambdas", P), "potential.lambdas");
        if (l.empty()) throw ConfigError("potential.lambdas", "expected at least one rate");
        return PotentialModel::quadratic_local(E0(), l);
      }
      case PotentialKind::AnisotropicGaussian:
        return PotentialModel::anisotropic_gaussian(E0(), matrix(require(j, "Q", P), "potential.Q"));
      case PotentialKind::GaussianPlusCubic: {
        const Eigen::MatrixXd Q = matrix(require(j, "Q", P), "potential.Q");
        const json& c = require(j, "cubic", P);
        if (!c.is_object()) throw ConfigError("potential.cubic", "expected an object {\"i,j,..\": coefficient}");
        std::vector<CubicTerm> terms;
        for (auto it = c.begin(); it != c.end(); ++it) {
          const std::string f = "potential.cubic." + it.key();
          MultiIndex a = index_key(it.key(), static_cast<int>(Q.rows()), f);
          if (degree(a) != 3) throw ConfigError(f, "cubic terms must have degree 3");
          terms.push_back({a, number(it.value(), f)});
        }
        return PotentialModel::gaussian_plus_cubic(E0(), Q, terms);
      }
      case PotentialKind::UserTabulated: {
        const int n = dim();
        const json& d = require(j, "derivatives", P);
        if (!d.is_object()) throw ConfigError("potential.derivatives", "expected an object {\"i,j,..\": value}");
        std::map<MultiIndex, double> derivs;
        for (auto it = d.begin(); it != d.end(); ++it) {
          const std::string f = "potential.derivatives." + it.key();
          MultiIndex a = index_key(it.key(), n, f);
          if (degree(a) < 2 || degree(a) > 4) throw ConfigError(f, "derivative orders run from 2 to 4");
          derivs[a] = number(it.value(), f);
        }
        return PotentialModel::user_tabulated(E0(), n, derivs);
      }
    }
  } catch (const PreconditionError& e) {
    throw ConfigError("potential", e.what());
  }
  throw ConfigError("potential.kind", "unsupported kind");
}

RunConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("<root>", "expected a JSON object");
  static const std::set<std::string> known{"potential", "omega",      "theta",     "z",      "h_grid",
                                           "numerics",  "asymptotics", "quasimode", "tasks", "output"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw ConfigError(it.key(), "unknown field");

  RunConfig c;
  if (const json* p = find(j, "potential")) c.potential = parse_potential(*p);
  const int n = c.potential ? c.potential->dim() : -1;
  auto direction = [&](const char* key) -> std::optional<Eigen::VectorXd> {
    const json* v = find(j, key);
    if (!v) return std::nullopt;
    Eigen::VectorXd d = unit_vec(*v, key);
    if (n > 0 && d.size() != n)
      throw ConfigError(key, "dimension " + std::to_string(d.size()) + " does not match potential.n = " +
                                 std::to_string(n));
    return d;
  };
  c.omega = direction("omega");
  c.theta = direction("theta");
  if (const json* v = find(j, "z")) c.z = number(*v, "z");
  if (const json* v = find(j, "h_grid")) c.h_grid = decreasing_grid(*v, "h_grid");

  if (const json* nu = find(j, "numerics")) {
    if (!nu->is_object()) throw ConfigError("numerics", "expected an object");
    static const std::set<std::string> nk{"abs_tol", "rel_tol",   "max_step",    "series_degree", "t_max",
                                          "launch_radius", "t_trap", "fit_lo",  "fit_hi",        "fit_rates",
                                          "trapped_box",   "regular_box", "energy", "inner_method"};
    for (auto it = nu->begin(); it != nu->end(); ++it)
      if (!nk.count(it.key())) throw ConfigError("numerics." + it.key(), "unknown field");
    auto& so = c.trapped.scatter;
    if (const json* v = find(*nu, "abs_tol")) so.tol.abs = positive(*v, "numerics.abs_tol");
    if (const json* v = find(*nu, "rel_tol")) so.tol.rel = positive(*v, "numerics.rel_tol");
    if (const json* v = find(*nu, "max_step")) so.tol.max_step = positive(*v, "numerics.max_step");
    if (const json* v = find(*nu, "t_max")) so.t_max = positive(*v, "numerics.t_max");
    if (const json* v = find(*nu, "launch_radius")) so.launch_radius = positive(*v, "numerics.launch_radius");
    if (const json* v = find(*nu, "series_degree")) c.series_degree = integer(*v, "numerics.series_degree", 4, 10);
    c.trapped.series_degree = c.series_degree;
    if (const json* v = find(*nu, "t_trap")) c.trapped.t_trap = positive(*v, "numerics.t_trap");
    if (const json* v = find(*nu, "fit_lo")) c.trapped.fit_lo = positive(*v, "numerics.fit_lo");
    if (const json* v = find(*nu, "fit_hi")) c.trapped.fit_hi = positive(*v, "numerics.fit_hi");
    if (!(c.trapped.fit_lo < c.trapped.fit_hi)) throw ConfigError("numerics.fit_lo", "must be below numerics.fit_hi");
    if (const json* v = find(*nu, "fit_rates")) c.trapped.J = integer(*v, "numerics.fit_rates", 1, 40);
    auto box = [&](const char* key, SearchBox& b) {
      const json* v = find(*nu, key);
      if (!v) return;
      const std::string f = std::string("numerics.") + key;
      if (!v->is_object()) throw ConfigError(f, "expected an object");
      if (const json* w = find(*v, "half_width")) b.half_width = positive(*w, f + ".half_width");
      if (const json* w = find(*v, "points")) b.points = integer(*w, f + ".points", 3, 100001);
    };
    box("trapped_box", c.trapped.box);
    box("regular_box", c.regular_box);
    if (const json* v = find(*nu, "energy")) c.classical_energy = positive(*v, "numerics.energy");
    if (const json* v = find(*nu, "inner_method")) {
      const std::string m = v->is_string() ? v->get<std::string>() : "";
      if (m == "auto") c.inner_method = InnerMethod::Auto;
      else if (m == "analytic") c.inner_method = InnerMethod::Analytic;
      else if (m == "numeric") c.inner_method = InnerMethod::Numeric;
      else throw ConfigError("numerics.inner_method", "expected one of auto, analytic, numeric");
    }
  }

  if (const json* a = find(j, "asymptotics")) {
    if (!a->is_object()) throw ConfigError("asymptotics", "expected an object");
    if (const json* v = find(*a, "alpha")) c.asymptotics.alpha = numbers(*v, "asymptotics.alpha");
    if (const json* v = find(*a, "beta")) c.asymptotics.beta = numbers(*v, "asymptotics.beta");
    if (const json* v = find(*a, "lambdas")) c.asymptotics.lambdas = numbers(*v, "asymptotics.lambdas");
    for (double al : c.asymptotics.alpha)
      if (!(al > 0.0)) throw ConfigError("asymptotics.alpha", "values need a positive real part");
    for (double b : c.asymptotics.beta)
      if (b < 0.0) throw ConfigError("asymptotics.beta", "values must be non-negative");
    const auto& L = c.asymptotics.lambdas;
    if (L.empty() || !(L.front() > 0.0) || !std::is_sorted(L.begin(), L.end()) ||
        std::adjacent_find(L.begin(), L.end()) != L.end())
      throw ConfigError("asymptotics.lambdas", "expected a positive strictly increasing grid");
  }
  if (const json* q = find(j, "quasimode")) {
    if (!q->is_object()) throw ConfigError("quasimode", "expected an object");
    if (const json* v = find(*q, "lambdas")) c.quasimode.lambdas = numbers(*v, "quasimode.lambdas");
    if (c.quasimode.lambdas.empty()) throw ConfigError("quasimode.lambdas", "expected at least one rate");
    for (double l : c.quasimode.lambdas)
      if (!(l > 0.0)) throw ConfigError("quasimode.lambdas", "rates must be positive");
    if (const json* v = find(*q, "h_grid")) c.quasimode.h_grid = decreasing_grid(*v, "quasimode.h_grid");
  }

  const json& t = require(j, "tasks", "");
  if (!t.is_array() || t.empty()) throw ConfigError("tasks", "expected a non-empty array");
  for (std::size_t k = 0; k < t.size(); ++k) {
    const std::string f = "tasks[" + std::to_string(k) + "]";
    if (!t[k].is_string()) throw ConfigError(f, "expected a task name");
    const std::string name = t[k].get<std::string>();
    const auto& all = task_names();
    if (std::find(all.begin(), all.end(), name) == all.end()) throw ConfigError(f, "unknown task '" + name + "'");
    if (std::find(c.tasks.begin(), c.tasks.end(), name) != c.tasks.end())
      throw ConfigError(f, "duplicate task '" + name + "'");
    c.tasks.push_back(name);
  }
  if (const json* v = find(j, "output")) {
    if (!v->is_string() || v->get<std::string>().empty()) throw ConfigError("output", "expected a directory path");
    c.output_dir = v->get<std::string>();
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot read " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

}  // namespace barrier::cli
