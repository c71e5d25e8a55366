#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ermakov/dynamics.hpp"
#include "ermakov/model.hpp"
#include "testutil.hpp"

using namespace ermakov;
using expr::parse_expression;

namespace {

CartesianState random_offaxis_state() {
  CartesianState s;
  s.time = testutil::uniform(0, 2);
  s.x = testutil::uniform(0.5, 2.0) * (testutil::uniform(0, 1) < 0.5 ? -1.0 : 1.0);
  s.y = testutil::uniform(0.5, 2.0) * (testutil::uniform(0, 1) < 0.5 ? -1.0 : 1.0);
  s.vx = testutil::uniform(-1, 1);
  s.vy = testutil::uniform(-1, 1);
  return s;
}

}  // namespace

TEST_CASE("normalize_fg on the defining relations") {
  auto f_lin = parse_expression("u", "u");
  auto g_lin = parse_expression("v", "v");
  auto [F1, G1] = normalize_fg(f_lin, g_lin);
  for (double u : {0.5, 1.0, 2.0, -1.3}) {
    CHECK(F1.evaluate(u) == Catch::Approx(1.0).epsilon(1e-14));
    CHECK(G1.evaluate(u) == Catch::Approx(1.0).epsilon(1e-14));
  }

  auto f_cube = parse_expression("u^3", "u");
  auto [F3, G3] = normalize_fg(f_cube, g_lin);
  for (double u : {0.5, 1.0, 2.0}) CHECK(F3.evaluate(u) == Catch::Approx(u * u).epsilon(1e-14));

  // f(u) = u F(u) and g(v) = v G(1/v) hold for a non-trivial pair
  auto f = parse_expression("sin(u)", "u");
  auto g = parse_expression("exp(v)-1", "v");
  auto [F, G] = normalize_fg(f, g);
  for (int i = 0; i < 50; ++i) {
    const double u = testutil::uniform(0.3, 2.5);
    CHECK(u * F.evaluate(u) == Catch::Approx(f.evaluate(u)).epsilon(1e-13));
    const double v = 1.0 / u;
    CHECK(v * G.evaluate(1.0 / v) == Catch::Approx(g.evaluate(v)).epsilon(1e-12));
  }

  // evaluation at u = 0 is a domain error of the returned expressions
  CHECK_THROWS_AS(F.evaluate(0.0), DomainError);
}

TEST_CASE("conservative_to_FG reproduces the construction") {
  auto [F0, G0] = conservative_to_FG(parse_expression("u^(-2)/2", "u"));
  for (double u : {0.5, 1.0, 2.0}) {
    CHECK(F0.evaluate(u) == Catch::Approx(0.0).margin(1e-15));
    CHECK(G0.evaluate(u) == Catch::Approx(1.0).epsilon(1e-14));
  }

  auto [Fc, Gc] = conservative_to_FG(parse_expression("0.7", "u"));
  for (double u : {0.5, 1.0, 2.0}) {
    CHECK(Fc.evaluate(u) == Catch::Approx(1.4).epsilon(1e-15));
    CHECK(Gc.evaluate(u) == Catch::Approx(0.0).margin(1e-15));
  }

  auto [Fq, Gq] = conservative_to_FG(parse_expression("u^2", "u"));
  for (double u : {0.5, 1.0, 2.0}) {
    CHECK(Fq.evaluate(u) == Catch::Approx(4.0 * u * u).epsilon(1e-14));
    CHECK(Gq.evaluate(u) == Catch::Approx(-2.0 * std::pow(u, 4)).epsilon(1e-14));
  }
}

TEST_CASE("cart_to_polar on axis and diagonal points") {
  const PolarState a = cart_to_polar(CartesianState{0, 1, 0, 0, 0});
  CHECK(a.r == 1.0);
  CHECK(a.theta == 0.0);
  CHECK(a.p_r == 0.0);
  CHECK(a.p_theta == 0.0);

  const PolarState b = cart_to_polar(CartesianState{0, 1, 1, 0, 0});
  CHECK(b.r == Catch::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(b.theta == Catch::Approx(std::atan(1.0)).epsilon(1e-15));
  CHECK(b.p_r == 0.0);
  CHECK(b.p_theta == 0.0);

  const PolarState c = cart_to_polar(CartesianState{0, 1, 0, 0, 1});
  CHECK(c.p_theta == 1.0);

  CHECK_THROWS_AS(cart_to_polar(CartesianState{0, 0, 0, 1, 1}), ValidationError);
}

TEST_CASE("polar_to_cart inverts cart_to_polar") {
  const CartesianState axis = polar_to_cart(PolarState{0, 1, 0, 0, 0});
  CHECK(axis.x == 1.0);
  CHECK(axis.y == 0.0);
  CHECK(axis.vx == 0.0);
  CHECK(axis.vy == 0.0);

  const CartesianState diag = polar_to_cart(PolarState{0, std::sqrt(2.0), std::atan(1.0), 0, 0});
  CHECK(diag.x == Catch::Approx(1.0).epsilon(1e-14));
  CHECK(diag.y == Catch::Approx(1.0).epsilon(1e-14));

  CHECK_THROWS_AS(polar_to_cart(PolarState{0, 0.0, 1.0, 0, 0}), ValidationError);
  CHECK_THROWS_AS(polar_to_cart(PolarState{0, -1.0, 1.0, 0, 0}), ValidationError);

  SECTION("round trips") {
    const CartesianState s{0.3, 1.3, 2.1, -0.4, 0.7};
    const CartesianState back = polar_to_cart(cart_to_polar(s));
    CHECK(back.x == Catch::Approx(s.x).epsilon(1e-12));
    CHECK(back.y == Catch::Approx(s.y).epsilon(1e-12));
    CHECK(back.vx == Catch::Approx(s.vx).margin(1e-12));
    CHECK(back.vy == Catch::Approx(s.vy).margin(1e-12));

    for (int i = 0; i < 100; ++i) {
      const CartesianState q = random_offaxis_state();
      const PolarState p = cart_to_polar(q);
      const CartesianState r = polar_to_cart(p);
      CHECK(r.x == Catch::Approx(q.x).epsilon(1e-12));
      CHECK(r.y == Catch::Approx(q.y).epsilon(1e-12));
      CHECK(r.vx == Catch::Approx(q.vx).margin(1e-12));
      CHECK(r.vy == Catch::Approx(q.vy).margin(1e-12));
      const PolarState p2 = cart_to_polar(r);
      CHECK(p2.r == Catch::Approx(p.r).epsilon(1e-12));
      CHECK(p2.theta == Catch::Approx(p.theta).margin(1e-12));
    }
  }
}

TEST_CASE("p_theta equals x vy - y vx") {
  for (int i = 0; i < 100; ++i) {
    const CartesianState q = random_offaxis_state();
    const PolarState p = cart_to_polar(q);
    CHECK(p.p_theta == Catch::Approx(q.x * q.vy - q.y * q.vx).margin(1e-13));
  }
}

TEST_CASE("conservative and normalized forms produce identical accelerations") {
  for (const char* n_src : {"u^(-2)/2", "u^2", "3/(1+u^2)", "u^(-2)/2 + 1/(1+u^2)"}) {
    const auto N = parse_expression(n_src, "u");
    const auto cons = SystemSpec::conservative(N);
    auto [F, G] = conservative_to_FG(N);
    const auto norm = SystemSpec::normalized(F, G);
    for (int i = 0; i < 100; ++i) {
      const CartesianState s = random_offaxis_state();
      const Acceleration a = acceleration(cons, s);
      const Acceleration b = acceleration(norm, s);
      INFO(n_src << " at (" << s.x << ", " << s.y << ")");
      CHECK(std::abs(a.ax - b.ax) <=
            1e-10 * std::max({std::abs(a.ax), std::abs(b.ax), 1e-30}));
      CHECK(std::abs(a.ay - b.ay) <=
            1e-10 * std::max({std::abs(a.ay), std::abs(b.ay), 1e-30}));
    }
  }
}

TEST_CASE("SystemSpec guards form-specific accessors") {
  const auto spec = SystemSpec::conservative(parse_expression("u^2", "u"));
  CHECK_THROWS_AS(spec.f(), ValidationError);
  CHECK_THROWS_AS(spec.i0_integrand(), ValidationError);
  CHECK(spec.autonomous());
  const auto timed =
      SystemSpec::conservative(parse_expression("u^2", "u"), parse_expression("1", "t"));
  CHECK_FALSE(timed.autonomous());
  CHECK(timed.without_omega().autonomous());
}
