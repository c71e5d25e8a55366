#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ermakov/dynamics.hpp"

namespace ermakov {

enum class Method { rk4, dp54 };

struct IntegrationControl {
  Method method = Method::dp54;
  double tolerance = 1e-10;        // dp54: absolute and relative tolerance
  double step = 1e-3;              // rk4 step size
  double sample_interval = 0;      // > 0: emit samples at t0 + k*interval and t_end
  std::vector<double> sample_times;  // explicit sample times; overrides sample_interval
  std::size_t max_steps = 2'000'000;
  double initial_step = 0;         // dp54; 0 picks a heuristic start
};

struct IntegrationStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

struct Trajectory {
  explicit Trajectory(SystemSpec s) : spec(std::move(s)) {}

  SystemSpec spec;
  std::vector<CartesianState> samples;
  Method method = Method::dp54;
  double tolerance = 0;  // dp54
  double step = 0;       // rk4
  IntegrationStats stats;
};

namespace detail {

template <std::size_t N>
using StateN = std::array<double, N>;

template <std::size_t N, class Rhs>
StateN<N> rk4_step(Rhs&& rhs, double t, const StateN<N>& y, double h) {
  StateN<N> k1, k2, k3, k4, tmp, out;
  rhs(t, y, k1);
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
  rhs(t + 0.5 * h, tmp, k2);
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
  rhs(t + 0.5 * h, tmp, k3);
  for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h * k3[i];
  rhs(t + h, tmp, k4);
  for (std::size_t i = 0; i < N; ++i)
    out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

// Dormand-Prince 5(4) tableau.
struct Dp54 {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  // b(5th) - b(4th): error estimator coefficients
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
};

struct AdaptiveSettings {
  double atol = 1e-10;
  double rtol = 1e-10;
  double initial_step = 0;
  std::size_t max_steps = 2'000'000;
};

template <std::size_t N>
std::vector<double> to_vector(const StateN<N>& y) {
  return std::vector<double>(y.begin(), y.end());
}

// Adaptive Dormand-Prince 5(4) driver with a PI step controller (safety 0.9,
// growth factor clamped to [0.2, 5]) and step clamping onto `stops`.
// Every stop in (t0, t_end] is hit exactly and reported through on_sample;
// on_accept fires after every accepted step. A right-hand side that throws
// DomainError or SingularStateError rejects the step; if the step size
// underflows the driver gives up with the last good state.
template <std::size_t N, class Rhs>
IntegrationStats dp54_drive(Rhs&& rhs, double t0, StateN<N> y, double t_end,
                            std::span<const double> stops, const AdaptiveSettings& st,
                            const std::function<void(double, const StateN<N>&)>& on_sample,
                            const std::function<void(double, const StateN<N>&, double,
                                                     const StateN<N>&)>& on_accept = {}) {
  using D = Dp54;
  IntegrationStats stats;
  const double span = t_end - t0;
  double t = t0;
  StateN<N> k1, k2, k3, k4, k5, k6, k7, tmp, y5;

  rhs(t, y, k1);  // startup failure propagates

  auto scaled_rms = [&](const StateN<N>& a) {
    double acc = 0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sc = st.atol + st.rtol * std::abs(y[i]);
      const double q = a[i] / sc;
      acc += q * q;
    }
    return std::sqrt(acc / N);
  };

  double h = st.initial_step;
  if (!(h > 0)) {
    const double d0 = scaled_rms(y);
    const double d1 = scaled_rms(k1);
    h = (d0 < 1e-10 || d1 < 1e-10) ? 1e-6 * span : 0.01 * d0 / d1;
    h = std::min(h, span / 10.0);
  }

  const double eps = std::numeric_limits<double>::epsilon();
  auto h_floor = [&](double at) { return 16.0 * eps * std::max(std::abs(at), span); };

  std::size_t stop_idx = 0;
  double err_prev = 1.0;
  std::size_t attempts = 0;

  while (t_end - t > 0.5 * h_floor(t)) {
    if (++attempts > st.max_steps)
      throw IntegrationError("maximum number of steps exceeded at t = " + std::to_string(t),
                             t, to_vector(y));

    while (stop_idx < stops.size() && stops[stop_idx] <= t + h_floor(t)) ++stop_idx;
    const double target = (stop_idx < stops.size() && stops[stop_idx] < t_end)
                              ? stops[stop_idx]
                              : t_end;
    bool clamped = false;
    double h_use = h;
    if (h_use >= target - t) {
      h_use = target - t;
      clamped = true;
    }

    bool stage_failed = false;
    double err = 0;
    StateN<N> diff;
    try {
      for (std::size_t i = 0; i < N; ++i) tmp[i] = y[i] + h_use * D::a21 * k1[i];
      rhs(t + D::c2 * h_use, tmp, k2);
      for (std::size_t i = 0; i < N; ++i)
        tmp[i] = y[i] + h_use * (D::a31 * k1[i] + D::a32 * k2[i]);
      rhs(t + D::c3 * h_use, tmp, k3);
      for (std::size_t i = 0; i < N; ++i)
        tmp[i] = y[i] + h_use * (D::a41 * k1[i] + D::a42 * k2[i] + D::a43 * k3[i]);
      rhs(t + D::c4 * h_use, tmp, k4);
      for (std::size_t i = 0; i < N; ++i)
        tmp[i] = y[i] + h_use * (D::a51 * k1[i] + D::a52 * k2[i] + D::a53 * k3[i] +
                                 D::a54 * k4[i]);
      rhs(t + D::c5 * h_use, tmp, k5);
      for (std::size_t i = 0; i < N; ++i)
        tmp[i] = y[i] + h_use * (D::a61 * k1[i] + D::a62 * k2[i] + D::a63 * k3[i] +
                                 D::a64 * k4[i] + D::a65 * k5[i]);
      rhs(t + h_use, tmp, k6);
      for (std::size_t i = 0; i < N; ++i)
        y5[i] = y[i] + h_use * (D::b1 * k1[i] + D::b3 * k3[i] + D::b4 * k4[i] +
                                D::b5 * k5[i] + D::b6 * k6[i]);
      rhs(t + h_use, y5, k7);  // FSAL stage
      for (std::size_t i = 0; i < N; ++i)
        diff[i] = h_use * (D::e1 * k1[i] + D::e3 * k3[i] + D::e4 * k4[i] + D::e5 * k5[i] +
                           D::e6 * k6[i] + D::e7 * k7[i]);
      double acc = 0;
      for (std::size_t i = 0; i < N; ++i) {
        const double sc = st.atol + st.rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
        const double q = diff[i] / sc;
        acc += q * q;
      }
      err = std::sqrt(acc / N);
      if (!std::isfinite(err)) stage_failed = true;
      for (std::size_t i = 0; i < N && !stage_failed; ++i)
        if (!std::isfinite(y5[i])) stage_failed = true;
    } catch (const DomainError&) {
      stage_failed = true;
    } catch (const SingularStateError&) {
      stage_failed = true;
    }

    if (stage_failed) {
      ++stats.rejected;
      h = 0.25 * h_use;
      if (h < h_floor(t))
        throw IntegrationError(
            "step size underflow near a singular state; last good t = " + std::to_string(t),
            t, to_vector(y));
      continue;
    }

    if (err > 1.0) {
      ++stats.rejected;
      const double fac = std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.7);
      h = h_use * fac;
      if (h < h_floor(t))
        throw IntegrationError(
            "step size underflow (error control) near t = " + std::to_string(t), t,
            to_vector(y));
      continue;
    }

    // accept
    ++stats.accepted;
    const double t_new = clamped ? target : t + h_use;
    if (on_accept) on_accept(t, y, t_new, y5);
    y = y5;
    k1 = k7;
    t = t_new;
    if (clamped && stop_idx < stops.size() && target == stops[stop_idx]) {
      if (on_sample) on_sample(t, y);
      ++stop_idx;
    }
    if (!clamped) {
      double fac;
      if (err < 1e-10) {
        fac = 5.0;
      } else {
        fac = 0.9 * std::pow(err, -0.7 / 5.0) * std::pow(err_prev, 0.4 / 5.0);
        fac = std::clamp(fac, 0.2, 5.0);
      }
      err_prev = std::max(err, 1e-10);
      h = h_use * fac;
    }
  }
  return stats;
}

// Fixed-step RK4 driver; steps are clamped onto stops the same way.
template <std::size_t N, class Rhs>
IntegrationStats rk4_drive(Rhs&& rhs, double t0, StateN<N> y, double t_end, double h,
                           std::span<const double> stops,
                           const std::function<void(double, const StateN<N>&)>& on_sample,
                           const std::function<void(double, const StateN<N>&, double,
                                                    const StateN<N>&)>& on_accept = {},
                           std::size_t max_steps = 50'000'000) {
  IntegrationStats stats;
  const double span = t_end - t0;
  const double eps = std::numeric_limits<double>::epsilon();
  const double tiny = 16.0 * eps * std::max(std::abs(t_end), span);
  double t = t0;
  std::size_t stop_idx = 0;
  std::size_t k = 0;  // whole steps taken since the last clamp
  double t_base = t0;

  while (t_end - t > tiny) {
    if (stats.accepted >= max_steps)
      throw IntegrationError("maximum number of steps exceeded at t = " + std::to_string(t),
                             t, to_vector(y));
    while (stop_idx < stops.size() && stops[stop_idx] <= t + tiny) ++stop_idx;
    const double target =
        (stop_idx < stops.size() && stops[stop_idx] < t_end) ? stops[stop_idx] : t_end;
    bool clamped = false;
    double h_use = h;
    if (h_use >= target - t - tiny) {
      h_use = target - t;
      clamped = true;
    }
    const StateN<N> y_new = rk4_step(rhs, t, y, h_use);
    double t_new;
    if (clamped) {
      t_new = target;
      t_base = target;
      k = 0;
    } else {
      t_new = t_base + static_cast<double>(++k) * h;
    }
    ++stats.accepted;
    if (on_accept) on_accept(t, y, t_new, y_new);
    y = y_new;
    t = t_new;
    if (clamped && stop_idx < stops.size() && target == stops[stop_idx]) {
      if (on_sample) on_sample(t, y);
      ++stop_idx;
    }
  }
  return stats;
}

inline void validate_state_for_form(const SystemSpec& spec, const CartesianState& s) {
  switch (spec.form()) {
    case SystemForm::general:
    case SystemForm::normalized:
      if (s.x == 0.0 || s.y == 0.0)
        throw SingularStateError("initial state has x = 0 or y = 0");
      break;
    case SystemForm::conservative:
      if (s.x == 0.0) throw SingularStateError("initial state has x = 0");
      break;
  }
}

}  // namespace detail

/// One classical 4th-order Runge-Kutta step of size h (h != 0, either sign).
inline CartesianState step_rk4(const SystemSpec& spec, const CartesianState& s, double h) {
  if (h == 0.0) throw ValidationError("step_rk4: h must be nonzero");
  auto rhs = [&spec](double t, const detail::StateN<4>& y, detail::StateN<4>& dy) {
    const CartesianState st{t, y[0], y[1], y[2], y[3]};
    const Acceleration a = acceleration(spec, st);
    dy = {y[2], y[3], a.ax, a.ay};
  };
  const detail::StateN<4> y0 = {s.x, s.y, s.vx, s.vy};
  const detail::StateN<4> y1 = detail::rk4_step(rhs, s.time, y0, h);
  return CartesianState{s.time + h, y1[0], y1[1], y1[2], y1[3]};
}

/// Integrate the first-order system (x, y, vx, vy) from s0 to t_end.
/// With sample_times or sample_interval set, steps are clamped so samples land
/// exactly on the requested times; otherwise every accepted step is recorded.
inline Trajectory integrate(const SystemSpec& spec, const CartesianState& s0, double t_end,
                            const IntegrationControl& control = {}) {
  if (!(t_end > s0.time))
    throw ValidationError("integrate: t_end must exceed the initial time");
  detail::validate_state_for_form(spec, s0);

  std::vector<double> stops;
  if (!control.sample_times.empty()) {
    stops = control.sample_times;
    double prev = s0.time;
    for (double ts : stops) {
      if (ts <= prev && ts != s0.time)
        throw ValidationError("integrate: sample times must be strictly increasing");
      if (ts > t_end) throw ValidationError("integrate: sample time beyond t_end");
      prev = ts;
    }
    if (!stops.empty() && stops.front() == s0.time) stops.erase(stops.begin());
  } else if (control.sample_interval > 0) {
    const double dt = control.sample_interval;
    for (std::size_t k = 1;; ++k) {
      const double ts = s0.time + static_cast<double>(k) * dt;
      if (ts >= t_end - 1e-9 * dt) break;
      stops.push_back(ts);
    }
    stops.push_back(t_end);
  }

  Trajectory traj(spec);
  traj.method = control.method;
  traj.tolerance = control.tolerance;
  traj.step = control.step;
  traj.samples.push_back(s0);

  auto rhs = [&spec](double t, const detail::StateN<4>& y, detail::StateN<4>& dy) {
    const CartesianState st{t, y[0], y[1], y[2], y[3]};
    const Acceleration a = acceleration(spec, st);
    dy = {y[2], y[3], a.ax, a.ay};
  };
  auto record = [&traj](double t, const detail::StateN<4>& y) {
    traj.samples.push_back(CartesianState{t, y[0], y[1], y[2], y[3]});
  };
  const bool record_steps = stops.empty();
  std::function<void(double, const detail::StateN<4>&)> on_sample;
  std::function<void(double, const detail::StateN<4>&, double, const detail::StateN<4>&)>
      on_accept;
  if (record_steps)
    on_accept = [&record](double, const detail::StateN<4>&, double t,
                          const detail::StateN<4>& y) { record(t, y); };
  else
    on_sample = record;

  const detail::StateN<4> y0 = {s0.x, s0.y, s0.vx, s0.vy};
  if (control.method == Method::rk4) {
    if (!(control.step > 0)) throw ValidationError("integrate: rk4 needs a positive step");
    traj.stats = detail::rk4_drive<4>(rhs, s0.time, y0, t_end, control.step, stops,
                                      on_sample, on_accept, control.max_steps);
  } else {
    if (!(control.tolerance > 0))
      throw ValidationError("integrate: dp54 needs a positive tolerance");
    detail::AdaptiveSettings st;
    st.atol = st.rtol = control.tolerance;
    st.initial_step = control.initial_step;
    st.max_steps = control.max_steps;
    traj.stats = detail::dp54_drive<4>(rhs, s0.time, y0, t_end, stops, st, on_sample,
                                       on_accept);
  }
  return traj;
}

}  // namespace ermakov
