#pragma once

#include <cmath>

#include "ermakov/model.hpp"

namespace ermakov {

struct Acceleration {
  double ax = 0, ay = 0;
};

/// Right-hand side (accelerations) of the spec's form at the given state.
/// Autonomous specs have no -omega^2 q term.
inline Acceleration acceleration(const SystemSpec& spec, const CartesianState& s) {
  double bx = 0, by = 0;
  if (spec.omega()) {
    const double w = spec.omega()->evaluate(s.time);
    bx = -w * w * s.x;
    by = -w * w * s.y;
  }
  switch (spec.form()) {
    case SystemForm::general: {
      if (s.x == 0.0 || s.y == 0.0)
        throw SingularStateError("acceleration: general form requires x != 0 and y != 0");
      const double fu = spec.f().evaluate(s.y / s.x);
      const double gv = spec.g().evaluate(s.x / s.y);
      return {bx + fu / (s.x * s.x * s.y), by + gv / (s.x * s.y * s.y)};
    }
    case SystemForm::normalized: {
      if (s.x == 0.0 || s.y == 0.0)
        throw SingularStateError("acceleration: normalized form requires x != 0 and y != 0");
      const double u = s.y / s.x;
      return {bx + spec.F().evaluate(u) / (s.x * s.x * s.x),
              by + spec.G().evaluate(u) / (s.y * s.y * s.y)};
    }
    case SystemForm::conservative: {
      if (s.x == 0.0)
        throw SingularStateError("acceleration: conservative form requires x != 0");
      const double u = s.y / s.x;
      const double x3 = s.x * s.x * s.x;
      return {bx + spec.F().evaluate(u) / x3, by - spec.dN().evaluate(u) / x3};
    }
  }
  throw Error("corrupt SystemSpec");
}

/// V(x, y) = N(y/x) / x^2.
inline double potential_value(const expr::Expression& N, double x, double y) {
  if (x == 0.0) throw SingularStateError("potential_value: x = 0");
  return N.evaluate(y / x) / (x * x);
}

}  // namespace ermakov
