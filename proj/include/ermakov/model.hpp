#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include "ermakov/errors.hpp"
#include "ermakov/expr.hpp"

namespace ermakov {

/// Phase-space point with its time coordinate (t in the time-dependent frame,
/// T in the autonomous frame).
struct CartesianState {
  double time = 0;
  double x = 0, y = 0;
  double vx = 0, vy = 0;
};

/// Polar phase-space point; p_r = r', p_theta = r^2 theta'.
struct PolarState {
  double time = 0;
  double r = 0;
  double theta = 0;
  double p_r = 0;
  double p_theta = 0;
};

inline PolarState cart_to_polar(const CartesianState& s) {
  if (s.x == 0.0 && s.y == 0.0)
    throw ValidationError("cart_to_polar: the origin has no polar representation");
  PolarState p;
  p.time = s.time;
  p.r = std::hypot(s.x, s.y);
  p.theta = std::atan2(s.y, s.x);
  p.p_r = (s.x * s.vx + s.y * s.vy) / p.r;
  p.p_theta = s.x * s.vy - s.y * s.vx;
  return p;
}

inline CartesianState polar_to_cart(const PolarState& p) {
  if (!(p.r > 0)) throw ValidationError("polar_to_cart: r must be positive");
  const double c = std::cos(p.theta);
  const double s = std::sin(p.theta);
  const double vt = p.p_theta / p.r;
  CartesianState out;
  out.time = p.time;
  out.x = p.r * c;
  out.y = p.r * s;
  out.vx = p.p_r * c - vt * s;
  out.vy = p.p_r * s + vt * c;
  return out;
}

/// From f(u), g(v) of the general system build F(u) = f(u)/u and
/// G(u) = u*g(1/u), both expressions in the variable of f.
inline std::pair<expr::Expression, expr::Expression> normalize_fg(const expr::Expression& f,
                                                                  const expr::Expression& g) {
  const auto u = expr::Expression::symbol(f.variable_name());
  const auto F = f / u;
  const auto G = u * expr::substitute(g, expr::Expression::number(1.0) / u);
  return {F, G};
}

/// For the conservative family with potential N(u)/x^2 build
/// F = 2N + u dN/du and G = -u^3 dN/du.
inline std::pair<expr::Expression, expr::Expression> conservative_to_FG(
    const expr::Expression& N) {
  const auto u = expr::Expression::symbol(N.variable_name());
  const auto dN = N.derivative();
  const auto F = expr::Expression::number(2.0) * N + u * dN;
  const auto G = -(pow(u, expr::Expression::number(3.0)) * dN);
  return {F, G};
}

enum class SystemForm { general, normalized, conservative };

/// Which form of the Ermakov system is being run, plus an optional frequency
/// profile omega(t). Instances are immutable and cheap to copy.
class SystemSpec {
 public:
  /// f is an expression in u = y/x, g an expression in v = x/y.
  static SystemSpec general(expr::Expression f, expr::Expression g,
                            std::optional<expr::Expression> omega = {}) {
    SystemSpec s(SystemForm::general, std::move(omega));
    s.f_ = std::move(f);
    s.g_ = std::move(g);
    return s;
  }

  /// F and G are expressions in u = y/x.
  static SystemSpec normalized(expr::Expression F, expr::Expression G,
                               std::optional<expr::Expression> omega = {}) {
    SystemSpec s(SystemForm::normalized, std::move(omega));
    const auto u = expr::Expression::symbol(F.variable_name());
    s.i0_integrand_ = u * F - pow(u, expr::Expression::number(-3.0)) * G;
    s.F_ = std::move(F);
    s.G_ = std::move(G);
    return s;
  }

  /// N is an expression in u = y/x; the implied potential is N(y/x)/x^2.
  static SystemSpec conservative(expr::Expression N,
                                 std::optional<expr::Expression> omega = {}) {
    SystemSpec s(SystemForm::conservative, std::move(omega));
    const auto u = expr::Expression::symbol(N.variable_name());
    s.dN_ = N.derivative();
    auto [F, G] = conservative_to_FG(N);
    s.F_ = std::move(F);
    s.G_ = std::move(G);
    // antiderivative of u F - u^-3 G, anchored so that I0 obeys 4 H I3 - I2^2 = 2 I0
    s.F1_ = (expr::Expression::number(1.0) + pow(u, expr::Expression::number(2.0))) * N;
    s.N_ = std::move(N);
    return s;
  }

  SystemForm form() const noexcept { return form_; }
  bool autonomous() const noexcept { return !omega_.has_value(); }
  const std::optional<expr::Expression>& omega() const noexcept { return omega_; }

  const expr::Expression& f() const { return require(f_, "f", SystemForm::general); }
  const expr::Expression& g() const { return require(g_, "g", SystemForm::general); }
  const expr::Expression& F() const {
    if (form_ == SystemForm::general) throw ValidationError("SystemSpec: no F in general form");
    return F_;
  }
  const expr::Expression& G() const {
    if (form_ == SystemForm::general) throw ValidationError("SystemSpec: no G in general form");
    return G_;
  }
  const expr::Expression& N() const { return require(N_, "N", SystemForm::conservative); }
  const expr::Expression& dN() const { return require(dN_, "dN", SystemForm::conservative); }
  /// F1(u) = (1 + u^2) N(u), the anchored antiderivative entering I0.
  const expr::Expression& F1() const { return require(F1_, "F1", SystemForm::conservative); }
  /// u F(u) - u^-3 G(u); quadrature integrand of I0 for the normalized form.
  const expr::Expression& i0_integrand() const {
    return require(i0_integrand_, "i0 integrand", SystemForm::normalized);
  }

  SystemSpec without_omega() const {
    SystemSpec s = *this;
    s.omega_.reset();
    return s;
  }

 private:
  SystemSpec(SystemForm form, std::optional<expr::Expression> omega)
      : form_(form), omega_(std::move(omega)) {}

  const expr::Expression& require(const expr::Expression& e, const char* name,
                                  SystemForm needed) const {
    if (form_ != needed || !e.valid())
      throw ValidationError(std::string("SystemSpec: ") + name +
                            " is not defined for this form");
    return e;
  }

  SystemForm form_;
  std::optional<expr::Expression> omega_;
  expr::Expression f_, g_;        // general
  expr::Expression F_, G_;        // normalized; derived for conservative
  expr::Expression N_, dN_, F1_;  // conservative
  expr::Expression i0_integrand_; // normalized
};

}  // namespace ermakov
