#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ermakov/invariants.hpp"
#include "ermakov/quadrature.hpp"

namespace ermakov {

/// Constants of motion entering the closed-form polar solution.
struct SolutionConstants {
  double H = 0;
  double I0 = 0;
  double I2 = 0;
};

/// Fbar(theta) = (tan^2 theta + 1) N(tan theta). Angles within one part in
/// 1e15 of an odd multiple of pi/2 count as the tan pole.
inline double fbar(const expr::Expression& N, double theta) {
  const double c = std::cos(theta);
  if (std::abs(c) < 1e-15) throw DomainError("fbar: theta is an odd multiple of pi/2");
  const double u = std::tan(theta);
  const double value = (u * u + 1.0) * N.evaluate(u);
  if (!std::isfinite(value)) throw DomainError("fbar: value is not finite");
  return value;
}

/// r^2(T) = (2 H T - I2)^2 / (2 H) + I0 / H.
inline double radial_solution(const SolutionConstants& k, double T) {
  if (!(k.H > 0)) throw ValidationError("radial_solution: requires H > 0");
  const double w = 2.0 * k.H * T - k.I2;
  return w * w / (2.0 * k.H) + k.I0 / k.H;
}

/// The time side of the angular quadrature identity:
/// sign * (1/sqrt(I0)) * arctan((2 H T - I2) / sqrt(2 I0)).
inline double theta_time_rhs(const SolutionConstants& k, double T, int sign = 1) {
  if (!(k.H > 0)) throw ValidationError("theta_time_rhs: requires H > 0");
  if (!(k.I0 > 0)) throw ValidationError("theta_time_rhs: requires I0 > 0");
  return sign / std::sqrt(k.I0) *
         std::atan((2.0 * k.H * T - k.I2) / std::sqrt(2.0 * k.I0));
}

/// Oriented adaptive quadrature of d(theta) / sqrt(I0 - Fbar(theta)).
/// The integrand must be positive on the open interval; an interior zero of
/// I0 - Fbar is a turning point and is reported with a bracket. Endpoints may
/// be turning points (integrable 1/sqrt singularities): both halves are
/// integrated under the substitution theta = end -+ s^2, which removes them.
inline double theta_quadrature(const expr::Expression& N, double theta0, double theta1,
                               double I0, double tol) {
  if (!(tol > 0)) throw ValidationError("theta_quadrature: tolerance must be positive");
  if (theta0 == theta1) return 0.0;
  if (theta0 > theta1) return -theta_quadrature(N, theta1, theta0, I0, tol);

  auto g = [&](double th) { return I0 - fbar(N, th); };
  const double span = theta1 - theta0;
  const double scale = std::max(std::abs(I0), 1.0);

  // interior scan for turning points (the endpoints may touch zero)
  constexpr int kScan = 512;
  double prev = theta0;
  for (int j = 1; j < kScan; ++j) {
    const double th = theta0 + span * static_cast<double>(j) / kScan;
    if (g(th) <= 0.0)
      throw TurningPointError("theta_quadrature: I0 - Fbar vanishes inside the interval",
                              prev, std::min(theta1, theta0 + span * (j + 1.0) / kScan));
    prev = th;
  }
  if (g(theta0) < -1e-9 * scale || g(theta1) < -1e-9 * scale)
    throw TurningPointError("theta_quadrature: Fbar exceeds I0 at an endpoint", theta0,
                            theta1);

  quad::Options opt;
  opt.abs_tol = 0.5 * tol;
  const double mid = 0.5 * (theta0 + theta1);
  const double left = quad::gauss_kronrod(
      [&](double s) {
        const double gg = g(theta0 + s * s);
        if (gg <= 0.0) return std::numeric_limits<double>::quiet_NaN();
        return 2.0 * s / std::sqrt(gg);
      },
      0.0, std::sqrt(mid - theta0), opt);
  const double right = quad::gauss_kronrod(
      [&](double s) {
        const double gg = g(theta1 - s * s);
        if (gg <= 0.0) return std::numeric_limits<double>::quiet_NaN();
        return 2.0 * s / std::sqrt(gg);
      },
      0.0, std::sqrt(theta1 - mid), opt);
  return left + right;
}

/// Outcome of checking a numerical trajectory against the closed-form polar
/// solution. The theta identity is verified as a difference identity on the
/// first monotone-theta stretch, anchored at the trajectory start.
struct SolutionReport {
  SolutionConstants constants;
  double tolerance = 0;
  bool radial_pass = false;
  double radial_max_error = 0;
  bool theta_pass = false;
  double theta_max_residual = 0;
  int theta_sign = 1;
  double span_begin_time = 0;
  double span_end_time = 0;
  bool turning_restricted = false;  // theta check stopped at a turning point
  double turning_time = 0;
  bool pass = false;
};

inline SolutionReport verify_solution(const Trajectory& traj, double tol) {
  if (traj.spec.form() != SystemForm::conservative || !traj.spec.autonomous())
    throw NotConservativeError("verify_solution: needs a conservative autonomous spec");
  if (traj.samples.size() < 3)
    throw ValidationError("verify_solution: trajectory too short");
  if (!(tol > 0)) throw ValidationError("verify_solution: tolerance must be positive");

  const auto& samples = traj.samples;
  const CartesianState& s0 = samples.front();
  SolutionReport report;
  report.tolerance = tol;
  report.constants = SolutionConstants{hamiltonian(traj.spec, s0),
                                       ermakov_I0(traj.spec, s0), fi_I2(traj.spec, s0)};
  if (!(report.constants.H > 0))
    throw ValidationError("verify_solution: H <= 0 is outside the solution's range");
  if (!(report.constants.I0 > 0))
    throw ValidationError("verify_solution: I0 <= 0 is outside the solution's range");

  for (const auto& s : samples) {
    const double r2 = s.x * s.x + s.y * s.y;
    report.radial_max_error = std::max(
        report.radial_max_error, std::abs(r2 - radial_solution(report.constants, s.time)));
  }
  report.radial_pass = report.radial_max_error <= tol;

  // unwrapped polar angle along the samples
  constexpr double kTwoPi = 6.283185307179586476925287;
  std::vector<double> theta(samples.size());
  theta[0] = std::atan2(samples[0].y, samples[0].x);
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const double raw = std::atan2(samples[i].y, samples[i].x);
    theta[i] = theta[i - 1] + std::remainder(raw - theta[i - 1], kTwoPi);
  }

  // direction from the first moving sample; span ends at the first reversal
  int sign = 0;
  for (std::size_t i = 1; i < samples.size() && sign == 0; ++i)
    if (theta[i] != theta[i - 1]) sign = theta[i] > theta[i - 1] ? 1 : -1;
  std::size_t span_end = samples.size() - 1;
  if (sign != 0) {
    for (std::size_t i = 1; i < samples.size(); ++i) {
      const double d = theta[i] - theta[i - 1];
      if (d * sign < 0.0) {
        span_end = i - 1;
        report.turning_restricted = true;
        report.turning_time = samples[i - 1].time;
        break;
      }
    }
  }
  if (report.turning_restricted) {
    // the integrand is 1/sqrt(I0 - Fbar); trailing samples too close to the
    // turning make the identity ill-conditioned, so the checked sub-span
    // stops where I0 - Fbar is still bounded away from zero
    const double g_cut = 1e-5 * std::max(report.constants.I0, 1.0);
    while (span_end > 0 &&
           report.constants.I0 - fbar(traj.spec.N(), theta[span_end]) < g_cut)
      --span_end;
  }
  report.theta_sign = sign == 0 ? 1 : sign;
  report.span_begin_time = samples.front().time;
  report.span_end_time = samples[span_end].time;

  if (sign == 0) {
    report.theta_pass = true;  // no angular motion; nothing to check
  } else {
    const double quad_tol = std::max(1e-13, 0.25 * tol / static_cast<double>(span_end + 1));
    const double rhs0 = theta_time_rhs(report.constants, samples.front().time);
    double accumulated = 0;
    double max_resid = 0;
    for (std::size_t i = 1; i <= span_end; ++i) {
      accumulated +=
          theta_quadrature(traj.spec.N(), theta[i - 1], theta[i], report.constants.I0,
                           quad_tol);
      const double rhs = theta_time_rhs(report.constants, samples[i].time) - rhs0;
      max_resid = std::max(max_resid, std::abs(accumulated - sign * rhs));
    }
    report.theta_max_residual = max_resid;
    report.theta_pass = max_resid <= tol;
  }

  report.pass = report.radial_pass && report.theta_pass;
  return report;
}

}  // namespace ermakov
