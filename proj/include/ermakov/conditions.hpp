#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ermakov/dynamics.hpp"
#include "ermakov/finite_diff.hpp"

namespace ermakov {

/// c0 + cx*X + cy*Y; covers every component appearing in the homothetic algebra.
struct LinearXY {
  double c0 = 0, cx = 0, cy = 0;
  double operator()(double X, double Y) const { return c0 + cx * X + cy * Y; }
};

/// Phi = quad*(X^2 + Y^2)/2 + ax*X + ay*Y.
struct PhiForm {
  double quad = 0, ax = 0, ay = 0;
  double operator()(double X, double Y) const {
    return 0.5 * quad * (X * X + Y * Y) + ax * X + ay * Y;
  }
  std::array<double, 2> gradient(double X, double Y) const {
    return {quad * X + ax, quad * Y + ay};
  }
};

/// Element of the homothetic algebra of the flat 2d metric.
/// psi = 0 for a Killing vector, 1 for the homothetic vector; gradient vectors
/// carry the potential function Phi with (B_x, B_y) = grad Phi.
struct SymmetryVector {
  std::string name;
  LinearXY bx, by;
  double psi = 0;
  bool gradient = false;
  std::optional<PhiForm> phi;
};

/// The homothetic algebra of diag(1,1): two gradient KVs, the rotation KV,
/// and the gradient HV.
inline std::array<SymmetryVector, 4> homothetic_algebra() {
  return {
      SymmetryVector{"d_X", {1, 0, 0}, {0, 0, 0}, 0, true, PhiForm{0, 1, 0}},
      SymmetryVector{"d_Y", {0, 0, 0}, {1, 0, 0}, 0, true, PhiForm{0, 0, 1}},
      SymmetryVector{"rotation", {0, 0, 1}, {0, -1, 0}, 0, false, std::nullopt},
      SymmetryVector{"homothety", {0, 1, 0}, {0, 0, 1}, 1, true, PhiForm{1, 0, 0}},
  };
}

/// The constant gradient KV b1 d_X + b2 d_Y with Phi = b1 X + b2 Y.
inline SymmetryVector gradient_kv(double b1, double b2) {
  return SymmetryVector{"kv(" + std::to_string(b1) + "," + std::to_string(b2) + ")",
                        {b1, 0, 0},
                        {b2, 0, 0},
                        0,
                        true,
                        PhiForm{0, b1, b2}};
}

using PotentialFn = std::function<double(double, double)>;

/// Potential evaluator V(X, Y) = N(Y/X)/X^2 of a conservative spec.
inline PotentialFn potential_from_spec(const SystemSpec& spec) {
  if (spec.form() != SystemForm::conservative)
    throw NotConservativeError("potential_from_spec: spec is not conservative");
  const expr::Expression N = spec.N();
  return [N](double X, double Y) { return potential_value(N, X, Y); };
}

struct GridPoint {
  double x = 0, y = 0;
};

/// 25 sample points with X in [0.5, 2] and Y in [-2, 2]; Y values are chosen
/// off the lines Y = 0 and 2Y = X where common corpus potentials have poles.
inline std::vector<GridPoint> default_condition_grid() {
  constexpr std::array<double, 5> xs = {0.5, 0.875, 1.25, 1.625, 2.0};
  constexpr std::array<double, 5> ys = {-2.0, -1.25, -0.6, 1.25, 2.0};
  std::vector<GridPoint> grid;
  grid.reserve(xs.size() * ys.size());
  for (double x : xs)
    for (double y : ys) grid.push_back(GridPoint{x, y});
  return grid;
}

/// Outcome of a numeric Theorem-condition check. Case 2 fills c1; Case 3
/// fills c2, c3. passes iff max_residual <= the check's tolerance.
struct ConditionResult {
  bool passes = false;
  double c1 = 0, c2 = 0, c3 = 0;
  double max_residual = 0;
};

namespace detail {

inline std::array<double, 2> potential_gradient(const PotentialFn& V, const GridPoint& p) {
  try {
    const auto g = fd::gradient_xy(V, p.x, p.y);
    if (!std::isfinite(g[0]) || !std::isfinite(g[1]))
      throw DomainError("gradient is not finite");
    return g;
  } catch (const Error& e) {
    throw ConditionError("gradient evaluation failed at (" + std::to_string(p.x) + ", " +
                         std::to_string(p.y) + "): " + e.what());
  }
}

}  // namespace detail

/// Case 2 of the point-symmetry classification: B.grad(V) + 2 psi_B V must be
/// a constant -c1 across the grid. grad(V) uses Richardson-extrapolated
/// central differences.
inline ConditionResult check_case2(const PotentialFn& V, const SymmetryVector& B,
                                   std::span<const GridPoint> grid, double tol = 1e-8) {
  if (grid.size() < 8)
    throw ValidationError("check_case2: grid needs at least 8 points");
  std::vector<double> E;
  E.reserve(grid.size());
  for (const auto& p : grid) {
    const auto g = detail::potential_gradient(V, p);
    const double value =
        B.bx(p.x, p.y) * g[0] + B.by(p.x, p.y) * g[1] + 2.0 * B.psi * V(p.x, p.y);
    if (!std::isfinite(value))
      throw ConditionError("condition value is not finite at (" + std::to_string(p.x) +
                           ", " + std::to_string(p.y) + ")");
    E.push_back(value);
  }
  double mean = 0;
  for (double v : E) mean += v;
  mean /= static_cast<double>(E.size());
  double resid = 0;
  for (double v : E) resid = std::max(resid, std::abs(v - mean));
  ConditionResult r;
  r.max_residual = resid;
  r.passes = resid <= tol;
  r.c1 = -mean;
  return r;
}

/// Case 3: for a gradient vector with function Phi, fit
/// grad(Phi).grad(V) + 2 psi V = c2 Phi + c3 by least squares; passes iff the
/// worst pointwise residual is within tol.
inline ConditionResult check_case3(const PotentialFn& V, const SymmetryVector& S,
                                   std::span<const GridPoint> grid, double tol = 1e-8) {
  if (!S.gradient || !S.phi)
    throw ValidationError("check_case3: '" + S.name + "' is not a gradient vector");
  if (grid.size() < 8)
    throw ValidationError("check_case3: grid needs at least 8 points");
  std::vector<double> W, P;
  W.reserve(grid.size());
  P.reserve(grid.size());
  for (const auto& p : grid) {
    const auto g = detail::potential_gradient(V, p);
    const auto dphi = S.phi->gradient(p.x, p.y);
    const double w = dphi[0] * g[0] + dphi[1] * g[1] + 2.0 * S.psi * V(p.x, p.y);
    if (!std::isfinite(w))
      throw ConditionError("condition value is not finite at (" + std::to_string(p.x) +
                           ", " + std::to_string(p.y) + ")");
    W.push_back(w);
    P.push_back((*S.phi)(p.x, p.y));
  }
  const double n = static_cast<double>(grid.size());
  double sp = 0, spp = 0, sw = 0, spw = 0;
  for (std::size_t i = 0; i < W.size(); ++i) {
    sp += P[i];
    spp += P[i] * P[i];
    sw += W[i];
    spw += P[i] * W[i];
  }
  const double det = n * spp - sp * sp;
  double pmin = P.front(), pmax = P.front();
  for (double v : P) {
    pmin = std::min(pmin, v);
    pmax = std::max(pmax, v);
  }
  if (pmax - pmin < 1e-12 * (1.0 + std::abs(pmax)) || det == 0.0)
    throw ConditionError("check_case3: degenerate fit, Phi is constant on the grid");
  ConditionResult r;
  r.c2 = (n * spw - sp * sw) / det;
  r.c3 = (spp * sw - sp * spw) / det;
  double resid = 0;
  for (std::size_t i = 0; i < W.size(); ++i)
    resid = std::max(resid, std::abs(W[i] - r.c2 * P[i] - r.c3));
  r.max_residual = resid;
  r.passes = resid <= tol;
  return r;
}

}  // namespace ermakov
