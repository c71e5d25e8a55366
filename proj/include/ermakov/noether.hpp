#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ermakov/conditions.hpp"
#include "ermakov/invariants.hpp"

namespace ermakov {

using FiEvaluator = std::function<double(const SystemSpec&, const CartesianState&)>;

/// First integral of a passing Case-2 condition:
/// I = 2 psi_B t H - B_a qdot^a + c1 t.
inline FiEvaluator build_case2_fi(const SymmetryVector& B, double c1) {
  return [B, c1](const SystemSpec& spec, const CartesianState& s) {
    double value = -(B.bx(s.x, s.y) * s.vx + B.by(s.x, s.y) * s.vy) + c1 * s.time;
    if (B.psi != 0.0) value += 2.0 * B.psi * s.time * hamiltonian(spec, s);
    return value;
  };
}

enum class Case3Branch { primary, secondary };

/// First integral of a passing Case-3 condition:
/// I = 2 psi H int C - C Phi_a qdot^a + C_t Phi - c3 int C, where C solves
/// C_tt = -c2 C. branch picks one of the two independent solutions;
/// antiderivatives are anchored at t = 0.
///   c2 = 0:      C = t            (the constant solution has C_t = 0 and is rejected)
///   c2 = k^2:    C = cos kt | sin kt
///   c2 = -k^2:   C = e^{kt} | e^{-kt}
inline FiEvaluator build_case3_fi(const SymmetryVector& S, double c2, double c3,
                                  Case3Branch branch) {
  if (!S.gradient || !S.phi)
    throw ValidationError("build_case3_fi: '" + S.name + "' is not a gradient vector");

  std::function<double(double)> C, Ct, IC;
  if (c2 == 0.0) {
    if (branch == Case3Branch::secondary)
      throw ValidationError("build_case3_fi: the constant branch has C_t = 0");
    C = [](double t) { return t; };
    Ct = [](double) { return 1.0; };
    IC = [](double t) { return 0.5 * t * t; };
  } else if (c2 > 0.0) {
    const double k = std::sqrt(c2);
    if (branch == Case3Branch::primary) {
      C = [k](double t) { return std::cos(k * t); };
      Ct = [k](double t) { return -k * std::sin(k * t); };
      IC = [k](double t) { return std::sin(k * t) / k; };
    } else {
      C = [k](double t) { return std::sin(k * t); };
      Ct = [k](double t) { return k * std::cos(k * t); };
      IC = [k](double t) { return (1.0 - std::cos(k * t)) / k; };
    }
  } else {
    const double k = std::sqrt(-c2);
    if (branch == Case3Branch::primary) {
      C = [k](double t) { return std::exp(k * t); };
      Ct = [k](double t) { return k * std::exp(k * t); };
      IC = [k](double t) { return (std::exp(k * t) - 1.0) / k; };
    } else {
      C = [k](double t) { return std::exp(-k * t); };
      Ct = [k](double t) { return -k * std::exp(-k * t); };
      IC = [k](double t) { return (1.0 - std::exp(-k * t)) / k; };
    }
  }

  const PhiForm phi = *S.phi;
  const double psi = S.psi;
  return [C, Ct, IC, phi, psi, c3](const SystemSpec& spec, const CartesianState& s) {
    const auto dphi = phi.gradient(s.x, s.y);
    const double ic = IC(s.time);
    double value = -C(s.time) * (dphi[0] * s.vx + dphi[1] * s.vy) +
                   Ct(s.time) * phi(s.x, s.y) - c3 * ic;
    if (psi != 0.0) value += 2.0 * psi * ic * hamiltonian(spec, s);
    return value;
  };
}

struct ScanEntry {
  std::string vector_name;
  int noether_case = 2;    // 2 or 3
  bool applicable = true;  // Case 3 needs a gradient vector
  ConditionResult result;
};

struct ScanResult {
  std::vector<ScanEntry> entries;
};

/// Check Cases 2 and 3 for all four algebra vectors (and an optional constant
/// gradient KV combination) against the spec's potential.
inline ScanResult noether_scan(const SystemSpec& spec, std::span<const GridPoint> grid,
                               double tol = 1e-8,
                               std::optional<std::pair<double, double>> gkv = {}) {
  const PotentialFn V = potential_from_spec(spec);
  std::vector<SymmetryVector> vectors;
  for (auto& v : homothetic_algebra()) vectors.push_back(v);
  if (gkv) vectors.push_back(gradient_kv(gkv->first, gkv->second));

  ScanResult scan;
  for (const auto& vec : vectors) {
    ScanEntry e2{vec.name, 2, true, check_case2(V, vec, grid, tol)};
    scan.entries.push_back(std::move(e2));
    ScanEntry e3{vec.name, 3, vec.gradient, {}};
    if (vec.gradient) e3.result = check_case3(V, vec, grid, tol);
    scan.entries.push_back(std::move(e3));
  }
  return scan;
}

}  // namespace ermakov
