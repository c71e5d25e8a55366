#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ermakov/conditions.hpp"
#include "ermakov/integrate.hpp"

namespace ermakov {

inline double angular_momentum(const CartesianState& s) {
  return s.x * s.vy - s.y * s.vx;
}

/// The Ermakov first integral, valid in both frames and for any omega.
/// Conservative form: (1/2)(x vy - y vx)^2 + (1 + u^2) N(u), the anchoring
/// that makes 4 H I3 - I2^2 = 2 I0 exact. Non-conservative forms integrate
/// the defining quadrature from u_ref (and v_ref = 1/u_ref for the general
/// form's second integral).
inline double ermakov_I0(const SystemSpec& spec, const CartesianState& s,
                         double quad_tol = 1e-12, double u_ref = 1.0) {
  const double half_p2 = 0.5 * angular_momentum(s) * angular_momentum(s);
  switch (spec.form()) {
    case SystemForm::conservative: {
      if (s.x == 0.0) throw SingularStateError("ermakov_I0: x = 0");
      return half_p2 + spec.F1().evaluate(s.y / s.x);
    }
    case SystemForm::normalized: {
      if (s.x == 0.0 || s.y == 0.0)
        throw SingularStateError("ermakov_I0: x = 0 or y = 0");
      return half_p2 + expr::quad_integral(spec.i0_integrand(), u_ref, s.y / s.x, quad_tol);
    }
    case SystemForm::general: {
      if (s.x == 0.0 || s.y == 0.0)
        throw SingularStateError("ermakov_I0: x = 0 or y = 0");
      return half_p2 + expr::quad_integral(spec.f(), u_ref, s.y / s.x, quad_tol) +
             expr::quad_integral(spec.g(), 1.0 / u_ref, s.x / s.y, quad_tol);
    }
  }
  throw Error("corrupt SystemSpec");
}

/// (1/2)(x vy - y vx)^2 + (1/2)(x/y)^2. Exceeds the anchored I0 of
/// N = u^-2/2 by the constant -1/2 (anchored I0 = lewis + 1/2).
inline double lewis_invariant(const CartesianState& s) {
  if (s.y == 0.0) throw SingularStateError("lewis_invariant: y = 0");
  const double p = angular_momentum(s);
  const double q = s.x / s.y;
  return 0.5 * p * p + 0.5 * q * q;
}

inline double hamiltonian(const SystemSpec& spec, const CartesianState& s) {
  if (spec.form() != SystemForm::conservative || !spec.autonomous())
    throw NotConservativeError(
        "hamiltonian: defined only for conservative autonomous specs");
  if (s.x == 0.0) throw SingularStateError("hamiltonian: x = 0");
  return 0.5 * (s.vx * s.vx + s.vy * s.vy) + potential_value(spec.N(), s.x, s.y);
}

/// I2 = 2 T H - (x vx + y vy).
inline double fi_I2(const SystemSpec& spec, const CartesianState& s) {
  const double H = hamiltonian(spec, s);
  return 2.0 * s.time * H - (s.x * s.vx + s.y * s.vy);
}

/// I3 = T^2 H - T (x vx + y vy) + (x^2 + y^2)/2.
inline double fi_I3(const SystemSpec& spec, const CartesianState& s) {
  const double H = hamiltonian(spec, s);
  return s.time * s.time * H - s.time * (s.x * s.vx + s.y * s.vy) +
         0.5 * (s.x * s.x + s.y * s.y);
}

/// Residual |I3 - (I2^2 + 2 I0) / (4 H)| of the anchoring identity; exact for
/// the anchored conservative I0.
inline double check_I3_relation(double H, double I0, double I2, double I3) {
  if (H == 0.0)
    throw ValidationError("check_I3_relation: relation undefined for H = 0");
  return std::abs(I3 - (I2 * I2 + 2.0 * I0) / (4.0 * H));
}

/// First integrals of the constant gradient KV b1 d_X + b2 d_Y:
/// I21 = b1 vx + b2 vy and I31 = b1 (-T vx + x) + b2 (-T vy + y).
/// Requires the Case-2 condition to hold for this vector on the spec's
/// potential (true exactly for the V = k/(b1 y - b2 x)^2 subfamily).
inline std::pair<double, double> fi_gradientKV(double b1, double b2, const SystemSpec& spec,
                                               const CartesianState& s) {
  const PotentialFn V = potential_from_spec(spec);
  const auto grid = default_condition_grid();
  const ConditionResult cond = check_case2(V, gradient_kv(b1, b2), grid);
  if (!cond.passes)
    throw ConditionError("fi_gradientKV: Case-2 condition B.grad(V) = const fails for B = (" +
                         std::to_string(b1) + ", " + std::to_string(b2) +
                         "); max residual " + std::to_string(cond.max_residual));
  const double T = s.time;
  const double i21 = b1 * s.vx + b2 * s.vy;
  const double i31 = b1 * (-T * s.vx + s.x) + b2 * (-T * s.vy + s.y);
  return {i21, i31};
}

struct InvariantSeries {
  std::string name;
  std::vector<double> values;  // aligned with the trajectory samples
  double reference = 0;        // value at the first sample
  double max_abs_drift = 0;
  double max_rel_drift = 0;    // abs drift / max(|reference|, 1)
  bool pass = false;
};

struct InvariantReport {
  std::vector<InvariantSeries> series;
  double tolerance = 0;
  bool pass = false;  // all series pass
};

/// Resolve an invariant name to an evaluator, or throw ValidationError when it
/// is undefined for the spec. Names: H, I0, I2, I3, lewis, angmom, I21, I31.
inline std::function<double(const CartesianState&)> make_invariant_fn(
    const SystemSpec& spec, const std::string& name,
    std::optional<std::pair<double, double>> gradient_kv_params = {}) {
  const bool conservative_autonomous =
      spec.form() == SystemForm::conservative && spec.autonomous();
  if (name == "H" || name == "I2" || name == "I3") {
    if (!conservative_autonomous)
      throw ValidationError("invariant '" + name +
                            "' requires a conservative autonomous spec (not conservative)");
    if (name == "H") return [spec](const CartesianState& s) { return hamiltonian(spec, s); };
    if (name == "I2") return [spec](const CartesianState& s) { return fi_I2(spec, s); };
    return [spec](const CartesianState& s) { return fi_I3(spec, s); };
  }
  if (name == "I0")
    return [spec](const CartesianState& s) { return ermakov_I0(spec, s); };
  if (name == "lewis")
    return [](const CartesianState& s) { return lewis_invariant(s); };
  if (name == "angmom")
    return [](const CartesianState& s) { return angular_momentum(s); };
  if (name == "I21" || name == "I31") {
    if (!gradient_kv_params)
      throw ValidationError("invariant '" + name + "' needs gradient_kv parameters (b1, b2)");
    const auto [b1, b2] = *gradient_kv_params;
    // run the Case-2 precondition once, not per sample
    const PotentialFn V = potential_from_spec(spec);
    const auto grid = default_condition_grid();
    const ConditionResult cond = check_case2(V, gradient_kv(b1, b2), grid);
    if (!cond.passes)
      throw ConditionError("invariant '" + name + "': Case-2 condition fails for B = (" +
                           std::to_string(b1) + ", " + std::to_string(b2) + ")");
    if (name == "I21")
      return [b1, b2](const CartesianState& s) { return b1 * s.vx + b2 * s.vy; };
    return [b1, b2](const CartesianState& s) {
      return b1 * (-s.time * s.vx + s.x) + b2 * (-s.time * s.vy + s.y);
    };
  }
  throw ValidationError("unknown invariant '" + name + "'");
}

/// Evaluate the named invariants at every trajectory sample and report drift
/// against the first sample. pass iff max relative drift <= tol for each.
inline InvariantReport drift_report(const Trajectory& traj,
                                    std::span<const std::string> names, double tol,
                                    std::optional<std::pair<double, double>> gradient_kv_params = {}) {
  if (names.empty()) throw ValidationError("drift_report: no invariants requested");
  if (traj.samples.empty()) throw ValidationError("drift_report: empty trajectory");
  if (!(tol > 0)) throw ValidationError("drift_report: tolerance must be positive");
  InvariantReport report;
  report.tolerance = tol;
  report.pass = true;
  for (const auto& name : names) {
    auto fn = make_invariant_fn(traj.spec, name, gradient_kv_params);
    InvariantSeries series;
    series.name = name;
    series.values.reserve(traj.samples.size());
    for (const auto& s : traj.samples) series.values.push_back(fn(s));
    series.reference = series.values.front();
    for (double v : series.values)
      series.max_abs_drift = std::max(series.max_abs_drift, std::abs(v - series.reference));
    series.max_rel_drift =
        series.max_abs_drift / std::max(std::abs(series.reference), 1.0);
    series.pass = series.max_rel_drift <= tol;
    report.pass = report.pass && series.pass;
    report.series.push_back(std::move(series));
  }
  return report;
}

namespace detail {

// Eigenvalues of a symmetric 3x3 matrix by cyclic Jacobi rotations.
inline std::array<double, 3> sym3_eigenvalues(std::array<std::array<double, 3>, 3> a) {
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = std::abs(a[0][1]) + std::abs(a[0][2]) + std::abs(a[1][2]);
    if (off < 1e-15 * (std::abs(a[0][0]) + std::abs(a[1][1]) + std::abs(a[2][2]) + 1e-300))
      break;
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        std::array<std::array<double, 3>, 3> r = a;
        for (int k = 0; k < 3; ++k) {
          r[p][k] = c * a[p][k] - s * a[q][k];
          r[q][k] = s * a[p][k] + c * a[q][k];
        }
        a = r;
        for (int k = 0; k < 3; ++k) {
          r[k][p] = c * a[k][p] - s * a[k][q];
          r[k][q] = s * a[k][p] + c * a[k][q];
        }
        a = r;
      }
    }
  }
  return {a[0][0], a[1][1], a[2][2]};
}

inline double fd_state_derivative(const std::function<double(const CartesianState&)>& f,
                                  CartesianState s, double CartesianState::*member) {
  const double x0 = s.*member;
  const double h = 1e-4 * (1.0 + std::abs(x0));
  return fd::derivative(
      [&](double v) {
        CartesianState probe = s;
        probe.*member = v;
        return f(probe);
      },
      x0, h);
}

}  // namespace detail

/// sigma_min / sigma_max of the 3x4 matrix of finite-difference phase-space
/// gradients of (H, I0, I2) at the given state. A ratio above the rank
/// threshold certifies three functionally independent first integrals.
inline double superintegrability_ratio(const SystemSpec& spec, const CartesianState& s) {
  const std::array<std::function<double(const CartesianState&)>, 3> fns = {
      [&spec](const CartesianState& q) { return hamiltonian(spec, q); },
      [&spec](const CartesianState& q) { return ermakov_I0(spec, q); },
      [&spec](const CartesianState& q) { return fi_I2(spec, q); }};
  constexpr std::array<double CartesianState::*, 4> members = {
      &CartesianState::x, &CartesianState::y, &CartesianState::vx, &CartesianState::vy};
  std::array<std::array<double, 4>, 3> m{};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      m[i][j] = detail::fd_state_derivative(fns[i], s, members[j]);
  std::array<std::array<double, 3>, 3> gram{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double acc = 0;
      for (int k = 0; k < 4; ++k) acc += m[i][k] * m[j][k];
      gram[i][j] = acc;
    }
  auto ev = detail::sym3_eigenvalues(gram);
  double lo = ev[0], hi = ev[0];
  for (double v : ev) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!(hi > 0)) return 0.0;
  return std::sqrt(std::max(lo, 0.0) / hi);
}

}  // namespace ermakov
