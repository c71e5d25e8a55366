#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ermakov/analytic.hpp"
#include "ermakov/invariants.hpp"
#include "ermakov/noether.hpp"
#include "ermakov/reduce.hpp"

namespace ermakov::scenario {

using json = nlohmann::json;

struct Tolerances {
  double drift = 1e-7;             // invariant relative drift
  double noether = 1e-8;           // condition-check residual
  double analytic = 1e-6;          // closed-form solution checks
  double fi_drift = 1e-6;          // drift of FIs built from a passing scan entry
  double two_path = 1e-7;          // reduce-then-integrate vs integrate-then-reduce
  double frame_invariance = 1e-9;  // pointwise I0 agreement across frames
};

struct ScenarioConfig {
  SystemSpec spec;
  CartesianState initial;
  double t_end = 0;
  IntegrationControl control;
  std::vector<std::string> invariants;
  std::optional<std::pair<double, double>> gradient_kv;
  struct Reduction {
    double rho0 = 1, rhodot0 = 0;
  };
  std::optional<Reduction> reduction;
  Tolerances tolerances;
};

namespace detail {

inline void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                                const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* key : allowed)
      if (it.key() == key) {
        known = true;
        break;
      }
    if (!known)
      throw ValidationError("config: unknown key '" + it.key() + "' in " + where);
  }
}

inline double require_number(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key))
    throw ValidationError("config: missing key '" + std::string(key) + "' in " + where);
  if (!obj[key].is_number())
    throw ValidationError("config: '" + std::string(key) + "' in " + where +
                          " must be a number");
  return obj[key].get<double>();
}

inline std::string require_string(const json& obj, const char* key,
                                  const std::string& where) {
  if (!obj.contains(key))
    throw ValidationError("config: missing key '" + std::string(key) + "' in " + where);
  if (!obj[key].is_string())
    throw ValidationError("config: '" + std::string(key) + "' in " + where +
                          " must be a string");
  return obj[key].get<std::string>();
}

inline std::string format17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

inline ScenarioConfig parse_config(const json& root) {
  if (!root.is_object()) throw ValidationError("config: top level must be a JSON object");
  detail::reject_unknown_keys(root,
                              {"system", "omega", "initial", "t_end", "method", "tolerance",
                               "step", "sample_interval", "invariants", "gradient_kv",
                               "reduction", "tolerances"},
                              "the top-level object");

  if (!root.contains("system") || !root["system"].is_object())
    throw ValidationError("config: missing 'system' object");
  const json& sys = root["system"];
  const std::string form = detail::require_string(sys, "form", "'system'");

  std::optional<expr::Expression> omega;
  if (root.contains("omega")) {
    if (!root["omega"].is_string())
      throw ValidationError("config: 'omega' must be an expression string");
    omega = expr::parse_expression(root["omega"].get<std::string>(), "t");
  }

  std::optional<SystemSpec> spec;
  if (form == "conservative") {
    detail::reject_unknown_keys(sys, {"form", "N"}, "'system'");
    spec = SystemSpec::conservative(
        expr::parse_expression(detail::require_string(sys, "N", "'system'"), "u"), omega);
  } else if (form == "normalized") {
    detail::reject_unknown_keys(sys, {"form", "F", "G"}, "'system'");
    spec = SystemSpec::normalized(
        expr::parse_expression(detail::require_string(sys, "F", "'system'"), "u"),
        expr::parse_expression(detail::require_string(sys, "G", "'system'"), "u"), omega);
  } else if (form == "general") {
    detail::reject_unknown_keys(sys, {"form", "f", "g"}, "'system'");
    spec = SystemSpec::general(
        expr::parse_expression(detail::require_string(sys, "f", "'system'"), "u"),
        expr::parse_expression(detail::require_string(sys, "g", "'system'"), "v"), omega);
  } else {
    throw ValidationError(
        "config: system form must be one of 'general', 'normalized', 'conservative'");
  }

  if (!root.contains("initial") || !root["initial"].is_object())
    throw ValidationError("config: missing 'initial' object");
  const json& init = root["initial"];
  detail::reject_unknown_keys(init, {"t0", "x", "y", "vx", "vy"}, "'initial'");
  CartesianState s0;
  s0.time = detail::require_number(init, "t0", "'initial'");
  s0.x = detail::require_number(init, "x", "'initial'");
  s0.y = detail::require_number(init, "y", "'initial'");
  s0.vx = detail::require_number(init, "vx", "'initial'");
  s0.vy = detail::require_number(init, "vy", "'initial'");

  const double t_end = detail::require_number(root, "t_end", "the top-level object");
  if (!(t_end > s0.time)) throw ValidationError("config: t_end must exceed initial.t0");

  IntegrationControl control;
  if (root.contains("method")) {
    const std::string m = detail::require_string(root, "method", "the top-level object");
    if (m == "rk4")
      control.method = Method::rk4;
    else if (m == "dp54")
      control.method = Method::dp54;
    else
      throw ValidationError("config: method must be 'rk4' or 'dp54'");
  }
  if (root.contains("tolerance"))
    control.tolerance = detail::require_number(root, "tolerance", "the top-level object");
  if (root.contains("step"))
    control.step = detail::require_number(root, "step", "the top-level object");
  if (control.method == Method::rk4 && !(control.step > 0))
    throw ValidationError("config: rk4 needs a positive 'step'");
  if (control.method == Method::dp54 && !(control.tolerance > 0))
    throw ValidationError("config: dp54 needs a positive 'tolerance'");
  control.sample_interval =
      detail::require_number(root, "sample_interval", "the top-level object");
  if (!(control.sample_interval > 0))
    throw ValidationError("config: sample_interval must be positive");

  ScenarioConfig cfg{std::move(*spec), s0, t_end, std::move(control), {}, {}, {}, {}};

  if (root.contains("invariants")) {
    if (!root["invariants"].is_array())
      throw ValidationError("config: 'invariants' must be an array of names");
    for (const auto& v : root["invariants"]) {
      if (!v.is_string()) throw ValidationError("config: invariant names must be strings");
      cfg.invariants.push_back(v.get<std::string>());
    }
  }
  if (root.contains("gradient_kv")) {
    const json& g = root["gradient_kv"];
    detail::reject_unknown_keys(g, {"b1", "b2"}, "'gradient_kv'");
    cfg.gradient_kv = {detail::require_number(g, "b1", "'gradient_kv'"),
                       detail::require_number(g, "b2", "'gradient_kv'")};
  }
  if (root.contains("reduction")) {
    const json& r = root["reduction"];
    detail::reject_unknown_keys(r, {"rho0", "rhodot0"}, "'reduction'");
    ScenarioConfig::Reduction red;
    red.rho0 = detail::require_number(r, "rho0", "'reduction'");
    red.rhodot0 = detail::require_number(r, "rhodot0", "'reduction'");
    if (red.rho0 == 0.0) throw ValidationError("config: reduction.rho0 must be nonzero");
    cfg.reduction = red;
  }
  if (root.contains("tolerances")) {
    const json& t = root["tolerances"];
    detail::reject_unknown_keys(
        t, {"drift", "noether", "analytic", "fi_drift", "two_path", "frame_invariance"},
        "'tolerances'");
    auto pick = [&](const char* key, double& slot) {
      if (t.contains(key)) {
        slot = detail::require_number(t, key, "'tolerances'");
        if (!(slot > 0)) throw ValidationError("config: tolerances must be positive");
      }
    };
    pick("drift", cfg.tolerances.drift);
    pick("noether", cfg.tolerances.noether);
    pick("analytic", cfg.tolerances.analytic);
    pick("fi_drift", cfg.tolerances.fi_drift);
    pick("two_path", cfg.tolerances.two_path);
    pick("frame_invariance", cfg.tolerances.frame_invariance);
  }
  return cfg;
}

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  json root;
  try {
    in >> root;
  } catch (const json::exception& e) {
    throw ValidationError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(root);
}

/// Trajectory CSV: header `time,x,y,vx,vy` plus one column per requested
/// invariant; floats carry 17 significant digits. Identical inputs produce
/// byte-identical output.
inline void write_trajectory_csv(
    std::ostream& os, const Trajectory& traj,
    std::span<const std::string> invariant_names = {},
    std::optional<std::pair<double, double>> gradient_kv_params = {}) {
  os << "time,x,y,vx,vy";
  std::vector<std::function<double(const CartesianState&)>> fns;
  for (const auto& name : invariant_names) {
    os << ',' << name;
    fns.push_back(make_invariant_fn(traj.spec, name, gradient_kv_params));
  }
  os << '\n';
  for (const auto& s : traj.samples) {
    os << detail::format17(s.time) << ',' << detail::format17(s.x) << ','
       << detail::format17(s.y) << ',' << detail::format17(s.vx) << ','
       << detail::format17(s.vy);
    for (const auto& fn : fns) os << ',' << detail::format17(fn(s));
    os << '\n';
  }
}

/// Read a trajectory CSV produced by write_trajectory_csv; extra invariant
/// columns are ignored.
inline Trajectory read_trajectory_csv(std::istream& is, const SystemSpec& spec) {
  std::string line;
  if (!std::getline(is, line)) throw ValidationError("trajectory CSV: empty file");
  if (line.rfind("time,x,y,vx,vy", 0) != 0)
    throw ValidationError("trajectory CSV: header must start with 'time,x,y,vx,vy'");
  Trajectory traj(spec);
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    std::array<double, 5> vals{};
    for (int i = 0; i < 5; ++i) {
      if (!std::getline(row, field, ','))
        throw ValidationError("trajectory CSV: short row at line " + std::to_string(line_no));
      try {
        vals[i] = std::stod(field);
      } catch (const std::exception&) {
        throw ValidationError("trajectory CSV: bad number '" + field + "' at line " +
                              std::to_string(line_no));
      }
    }
    if (!traj.samples.empty() && vals[0] <= traj.samples.back().time)
      throw ValidationError("trajectory CSV: sample times must be strictly increasing");
    traj.samples.push_back(CartesianState{vals[0], vals[1], vals[2], vals[3], vals[4]});
  }
  if (traj.samples.empty()) throw ValidationError("trajectory CSV: no samples");
  return traj;
}

namespace detail {

inline int guard(const std::function<int()>& body) {
  try {
    return body();
  } catch (const ParseError& e) {
    std::cerr << "ermakov: " << e.what() << '\n';
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "ermakov: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "ermakov: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "ermakov: " << e.what() << '\n';
    return 3;
  }
}

inline void write_report(const std::string& path, const json& report) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open report file '" + path + "'");
  out << report.dump(2) << '\n';
}

inline json check_entry(const std::string& name, double value, double tol, bool pass) {
  return json{{"name", name}, {"value", value}, {"tolerance", tol}, {"pass", pass}};
}

}  // namespace detail

/// simulate: integrate the scenario and write the trajectory CSV.
inline int run_simulate(const std::string& config_path, const std::string& out_path) {
  return detail::guard([&]() {
    const ScenarioConfig cfg = load_config(config_path);
    const Trajectory traj = integrate(cfg.spec, cfg.initial, cfg.t_end, cfg.control);
    std::ofstream out(out_path);
    if (!out) throw Error("cannot open output file '" + out_path + "'");
    write_trajectory_csv(out, traj, cfg.invariants, cfg.gradient_kv);
    return 0;
  });
}

/// invariants: evaluate the requested first integrals along the trajectory
/// (integrated here, or loaded from traj_path) and report their drift.
inline int run_invariants(const std::string& config_path,
                          const std::optional<std::string>& traj_path,
                          const std::string& report_path,
                          std::optional<double> tol_override = {}) {
  return detail::guard([&]() {
    const ScenarioConfig cfg = load_config(config_path);
    if (cfg.invariants.empty())
      throw ValidationError("config: 'invariants' must name at least one invariant");
    const double tol = tol_override.value_or(cfg.tolerances.drift);
    Trajectory traj = [&]() {
      if (traj_path) {
        std::ifstream in(*traj_path);
        if (!in) throw ValidationError("cannot open trajectory file '" + *traj_path + "'");
        return read_trajectory_csv(in, cfg.spec);
      }
      return integrate(cfg.spec, cfg.initial, cfg.t_end, cfg.control);
    }();
    const InvariantReport report = drift_report(traj, cfg.invariants, tol, cfg.gradient_kv);
    json checks = json::array();
    for (const auto& s : report.series) {
      json c = detail::check_entry(s.name + "_relative_drift", s.max_rel_drift, tol, s.pass);
      c["reference"] = s.reference;
      c["max_abs_drift"] = s.max_abs_drift;
      checks.push_back(std::move(c));
    }
    detail::write_report(report_path, json{{"command", "invariants"},
                                           {"samples", traj.samples.size()},
                                           {"checks", checks},
                                           {"pass", report.pass}});
    std::cout << "invariants: " << (report.pass ? "PASS" : "FAIL") << " (report in "
              << report_path << ")\n";
    return report.pass ? 0 : 1;
  });
}

/// reduce: integrate the time-dependent scenario, solve the auxiliary
/// oscillator, map the trajectory to the autonomous frame, and check both the
/// pointwise frame invariance of I0 and the two-path state agreement. The CSV
/// holds both frames side by side.
inline int run_reduce(const std::string& config_path, const std::string& out_path) {
  return detail::guard([&]() {
    const ScenarioConfig cfg = load_config(config_path);
    if (!cfg.reduction)
      throw ValidationError("config: 'reduction' (rho0, rhodot0) is required for reduce");
    const Trajectory traj = integrate(cfg.spec, cfg.initial, cfg.t_end, cfg.control);
    std::vector<double> times;
    times.reserve(traj.samples.size());
    for (const auto& s : traj.samples) times.push_back(s.time);
    const RhoSolution rho =
        solve_rho(cfg.spec.omega(), cfg.reduction->rho0, cfg.reduction->rhodot0,
                  cfg.initial.time, cfg.t_end, std::min(cfg.control.tolerance, 1e-12),
                  times);
    const Trajectory reduced = reduce_trajectory(traj, rho);

    // frame invariance: the same anchored I0 expression in both frames
    double i0_resid = 0;
    std::vector<double> i0_in, i0_out;
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
      i0_in.push_back(ermakov_I0(traj.spec, traj.samples[i]));
      i0_out.push_back(ermakov_I0(reduced.spec, reduced.samples[i]));
      i0_resid = std::max(i0_resid, std::abs(i0_in.back() - i0_out.back()));
    }

    // two-path agreement: integrate the autonomous system from the mapped
    // initial state and compare at the mapped sample times
    IntegrationControl control_b = cfg.control;
    control_b.sample_interval = 0;
    control_b.sample_times.clear();
    for (std::size_t i = 1; i < reduced.samples.size(); ++i)
      control_b.sample_times.push_back(reduced.samples[i].time);
    const Trajectory direct = integrate(reduced.spec, reduced.samples.front(),
                                        reduced.samples.back().time, control_b);
    double two_path = 0;
    const std::size_t n = std::min(direct.samples.size(), reduced.samples.size());
    for (std::size_t i = 0; i < n; ++i) {
      const auto& a = reduced.samples[i];
      const auto& b = direct.samples[i];
      two_path = std::max({two_path, std::abs(a.x - b.x), std::abs(a.y - b.y),
                           std::abs(a.vx - b.vx), std::abs(a.vy - b.vy)});
    }

    std::ofstream out(out_path);
    if (!out) throw Error("cannot open output file '" + out_path + "'");
    out << "t,x,y,vx,vy,T,X,Y,XP,YP,rho,rhodot,I0_t,I0_T\n";
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
      const auto& s = traj.samples[i];
      const auto& m = reduced.samples[i];
      const auto rv = rho.at(s.time);
      const char* sep = ",";
      out << detail::format17(s.time) << sep << detail::format17(s.x) << sep
          << detail::format17(s.y) << sep << detail::format17(s.vx) << sep
          << detail::format17(s.vy) << sep << detail::format17(m.time) << sep
          << detail::format17(m.x) << sep << detail::format17(m.y) << sep
          << detail::format17(m.vx) << sep << detail::format17(m.vy) << sep
          << detail::format17(rv.rho) << sep << detail::format17(rv.rhodot) << sep
          << detail::format17(i0_in[i]) << sep << detail::format17(i0_out[i]) << '\n';
    }

    const bool frame_pass = i0_resid <= cfg.tolerances.frame_invariance;
    const bool two_path_pass = two_path <= cfg.tolerances.two_path;
    json summary{{"command", "reduce"},
                 {"checks",
                  json::array({detail::check_entry("I0_frame_invariance", i0_resid,
                                                   cfg.tolerances.frame_invariance,
                                                   frame_pass),
                               detail::check_entry("two_path_state_agreement", two_path,
                                                   cfg.tolerances.two_path,
                                                   two_path_pass)})},
                 {"T_end", rho.T.back()},
                 {"pass", frame_pass && two_path_pass}};
    std::cout << summary.dump(2) << '\n';
    return (frame_pass && two_path_pass) ? 0 : 1;
  });
}

/// analytic-compare: verify the closed-form polar solution along the scenario
/// trajectory.
inline int run_analytic_compare(const std::string& config_path,
                                const std::string& report_path,
                                std::optional<double> tol_override = {}) {
  return detail::guard([&]() {
    const ScenarioConfig cfg = load_config(config_path);
    const double tol = tol_override.value_or(cfg.tolerances.analytic);
    const Trajectory traj = integrate(cfg.spec, cfg.initial, cfg.t_end, cfg.control);
    const SolutionReport rep = verify_solution(traj, tol);
    json report{{"command", "analytic-compare"},
                {"constants",
                 json{{"H", rep.constants.H}, {"I0", rep.constants.I0},
                      {"I2", rep.constants.I2}}},
                {"checks",
                 json::array({detail::check_entry("radial_solution_max_error",
                                                  rep.radial_max_error, tol, rep.radial_pass),
                              detail::check_entry("theta_identity_max_residual",
                                                  rep.theta_max_residual, tol,
                                                  rep.theta_pass)})},
                {"theta_sign", rep.theta_sign},
                {"span_begin_time", rep.span_begin_time},
                {"span_end_time", rep.span_end_time},
                {"turning_restricted", rep.turning_restricted},
                {"pass", rep.pass}};
    if (rep.turning_restricted) report["turning_time"] = rep.turning_time;
    detail::write_report(report_path, report);
    std::cout << "analytic-compare: " << (rep.pass ? "PASS" : "FAIL") << " (report in "
              << report_path << ")\n";
    return rep.pass ? 0 : 1;
  });
}

/// noether-scan: check Cases 2 and 3 for the four algebra vectors (plus an
/// optional gradient-KV combination), then validate every passing case's
/// first integral along the scenario trajectory.
inline int run_noether_scan(const std::string& config_path, const std::string& report_path,
                            std::optional<double> tol_override = {}) {
  return detail::guard([&]() {
    const ScenarioConfig cfg = load_config(config_path);
    const double tol = tol_override.value_or(cfg.tolerances.noether);
    const auto grid = default_condition_grid();
    const ScanResult scan = noether_scan(cfg.spec, grid, tol, cfg.gradient_kv);
    const Trajectory traj = integrate(cfg.spec, cfg.initial, cfg.t_end, cfg.control);

    auto algebra = homothetic_algebra();
    std::vector<SymmetryVector> vectors(algebra.begin(), algebra.end());
    if (cfg.gradient_kv)
      vectors.push_back(gradient_kv(cfg.gradient_kv->first, cfg.gradient_kv->second));

    bool all_fi_pass = true;
    json entries = json::array();
    for (const auto& e : scan.entries) {
      json row{{"vector", e.vector_name},
               {"case", e.noether_case},
               {"applicable", e.applicable}};
      if (e.applicable) {
        row["pass"] = e.result.passes;
        row["max_residual"] = e.result.max_residual;
        if (e.noether_case == 2)
          row["c1"] = e.result.c1;
        else {
          row["c2"] = e.result.c2;
          row["c3"] = e.result.c3;
        }
        if (e.result.passes) {
          const auto vec_it =
              std::find_if(vectors.begin(), vectors.end(),
                           [&](const SymmetryVector& v) { return v.name == e.vector_name; });
          const FiEvaluator fi =
              e.noether_case == 2
                  ? build_case2_fi(*vec_it, e.result.c1)
                  : build_case3_fi(*vec_it, e.result.c2, e.result.c3,
                                   Case3Branch::primary);
          double ref = fi(cfg.spec, traj.samples.front());
          double drift = 0;
          for (const auto& s : traj.samples)
            drift = std::max(drift, std::abs(fi(cfg.spec, s) - ref));
          const double rel = drift / std::max(std::abs(ref), 1.0);
          const bool fi_pass = rel <= cfg.tolerances.fi_drift;
          row["fi_relative_drift"] = rel;
          row["fi_drift_pass"] = fi_pass;
          all_fi_pass = all_fi_pass && fi_pass;
        }
      }
      entries.push_back(std::move(row));
    }
    detail::write_report(report_path, json{{"command", "noether-scan"},
                                           {"condition_tolerance", tol},
                                           {"fi_drift_tolerance", cfg.tolerances.fi_drift},
                                           {"matrix", entries},
                                           {"pass", all_fi_pass}});
    std::cout << "noether-scan: " << (all_fi_pass ? "PASS" : "FAIL") << " (report in "
              << report_path << ")\n";
    return all_fi_pass ? 0 : 1;
  });
}

}  // namespace ermakov::scenario
