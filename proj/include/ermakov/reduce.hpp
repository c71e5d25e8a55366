#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ermakov/integrate.hpp"

namespace ermakov {

/// Numerical solution of rho'' + omega^2(t) rho = 0 together with the new time
/// T(t) = int rho^-2 dt (anchored at the start of the grid).
struct RhoSolution {
  std::vector<double> t;
  std::vector<double> rho;
  std::vector<double> rhodot;
  std::vector<double> rhoddot;  // -omega^2 rho, kept for interpolation
  std::vector<double> T;

  struct Values {
    double rho = 0, rhodot = 0, T = 0;
  };

  /// Values at an arbitrary time inside the grid: exact at nodes, cubic
  /// Hermite in between (derivative data comes from the ODE itself).
  Values at(double time) const {
    if (t.empty()) throw ValidationError("RhoSolution: empty grid");
    const double scale = 1.0 + std::abs(time);
    auto near = [&](double a, double b) { return std::abs(a - b) <= 1e-11 * scale; };
    if (near(time, t.front())) return {rho.front(), rhodot.front(), T.front()};
    if (near(time, t.back())) return {rho.back(), rhodot.back(), T.back()};
    if (time < t.front() || time > t.back())
      throw ValidationError("RhoSolution: time " + std::to_string(time) +
                            " is outside the rho grid; grids are not alignable");
    auto it = std::lower_bound(t.begin(), t.end(), time);
    std::size_t hi = static_cast<std::size_t>(it - t.begin());
    if (near(time, t[hi])) return {rho[hi], rhodot[hi], T[hi]};
    const std::size_t lo = hi - 1;
    if (near(time, t[lo])) return {rho[lo], rhodot[lo], T[lo]};
    const double h = t[hi] - t[lo];
    const double s = (time - t[lo]) / h;
    auto hermite = [&](double f0, double d0, double f1, double d1) {
      const double s2 = s * s, s3 = s2 * s;
      return (2 * s3 - 3 * s2 + 1) * f0 + (s3 - 2 * s2 + s) * h * d0 +
             (-2 * s3 + 3 * s2) * f1 + (s3 - s2) * h * d1;
    };
    Values v;
    v.rho = hermite(rho[lo], rhodot[lo], rho[hi], rhodot[hi]);
    v.rhodot = hermite(rhodot[lo], rhoddot[lo], rhodot[hi], rhoddot[hi]);
    v.T = hermite(T[lo], 1.0 / (rho[lo] * rho[lo]), T[hi], 1.0 / (rho[hi] * rho[hi]));
    return v;
  }
};

/// Integrate the auxiliary oscillator rho'' = -omega^2(t) rho from
/// (rho0, rhodot0) over [t0, t_end]; T is accumulated adaptively as the extra
/// component T' = rho^-2. A sign change of rho aborts with the crossing
/// bracket: the T map is singular there.
inline RhoSolution solve_rho(const std::optional<expr::Expression>& omega, double rho0,
                             double rhodot0, double t0, double t_end, double tol = 1e-12,
                             std::span<const double> sample_times = {}) {
  if (rho0 == 0.0) throw ValidationError("solve_rho: rho(t0) must be nonzero");
  if (!(t_end > t0)) throw ValidationError("solve_rho: t_end must exceed t0");
  if (!(tol > 0)) throw ValidationError("solve_rho: tolerance must be positive");

  auto omega2 = [&omega](double t) {
    if (!omega) return 0.0;
    const double w = omega->evaluate(t);
    return w * w;
  };
  auto rhs = [&omega2](double t, const detail::StateN<3>& y, detail::StateN<3>& dy) {
    if (y[0] == 0.0) throw SingularStateError("solve_rho: rho = 0");
    dy = {y[1], -omega2(t) * y[0], 1.0 / (y[0] * y[0])};
  };

  RhoSolution sol;
  auto record = [&sol, &omega2](double t, const detail::StateN<3>& y) {
    sol.t.push_back(t);
    sol.rho.push_back(y[0]);
    sol.rhodot.push_back(y[1]);
    sol.rhoddot.push_back(-omega2(t) * y[0]);
    sol.T.push_back(y[2]);
  };
  record(t0, {rho0, rhodot0, 0.0});

  std::vector<double> stops(sample_times.begin(), sample_times.end());
  if (!stops.empty() && stops.front() == t0) stops.erase(stops.begin());
  if (!stops.empty() && stops.back() < t_end) stops.push_back(t_end);

  std::function<void(double, const detail::StateN<3>&)> on_sample;
  std::function<void(double, const detail::StateN<3>&, double, const detail::StateN<3>&)>
      on_accept;
  if (stops.empty())
    on_accept = [&](double, const detail::StateN<3>& y_prev, double t,
                    const detail::StateN<3>& y) {
      if (y_prev[0] * y[0] < 0.0)
        throw ZeroCrossingError("solve_rho: rho changes sign near t = " + std::to_string(t),
                                sol.t.back(), t);
      record(t, y);
    };
  else {
    on_accept = [&](double t_prev, const detail::StateN<3>& y_prev, double t,
                    const detail::StateN<3>& y) {
      if (y_prev[0] * y[0] < 0.0)
        throw ZeroCrossingError("solve_rho: rho changes sign near t = " + std::to_string(t),
                                t_prev, t);
    };
    on_sample = record;
  }

  detail::AdaptiveSettings st;
  st.atol = st.rtol = tol;
  try {
    detail::dp54_drive<3>(rhs, t0, {rho0, rhodot0, 0.0}, t_end, stops, st, on_sample,
                          on_accept);
  } catch (const IntegrationError& e) {
    if (!e.last_state().empty() &&
        std::abs(e.last_state()[0]) < 1e-6 * std::max(std::abs(rho0), 1.0))
      throw ZeroCrossingError(
          "solve_rho: rho approaches zero near t = " + std::to_string(e.last_time()),
          e.last_time(), t_end);
    throw;
  }
  return sol;
}

/// Map a state of the time-dependent frame to the autonomous frame:
/// (X, Y) = (x, y)/rho, (X', Y') = rho (vx, vy) - rhodot (x, y), time = T.
/// The velocity map follows from the position map by the chain rule.
inline CartesianState reduce_state(const CartesianState& s, double rho, double rhodot,
                                   double T) {
  if (rho == 0.0) throw ValidationError("reduce_state: rho = 0");
  return CartesianState{T, s.x / rho, s.y / rho, rho * s.vx - rhodot * s.x,
                        rho * s.vy - rhodot * s.y};
}

/// Exact inverse of reduce_state.
inline CartesianState inverse_reduce(const CartesianState& s, double rho, double rhodot,
                                     double t) {
  if (rho == 0.0) throw ValidationError("inverse_reduce: rho = 0");
  return CartesianState{t, rho * s.x, rho * s.y, s.vx / rho + rhodot * s.x,
                        s.vy / rho + rhodot * s.y};
}

/// Map a whole trajectory of the time-dependent system to the autonomous
/// frame; the returned trajectory carries the spec without omega.
inline Trajectory reduce_trajectory(const Trajectory& traj, const RhoSolution& rho) {
  Trajectory out(traj.spec.without_omega());
  out.method = traj.method;
  out.tolerance = traj.tolerance;
  out.step = traj.step;
  out.stats = traj.stats;
  out.samples.reserve(traj.samples.size());
  for (const auto& s : traj.samples) {
    const auto v = rho.at(s.time);
    out.samples.push_back(reduce_state(s, v.rho, v.rhodot, v.T));
  }
  return out;
}

}  // namespace ermakov
