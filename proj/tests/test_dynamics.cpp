#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ermakov/dynamics.hpp"
#include "ermakov/finite_diff.hpp"
#include "testutil.hpp"

using namespace ermakov;
using expr::parse_expression;

TEST_CASE("conservative accelerations at reference points") {
  const auto N = parse_expression("u^(-2)/2", "u");

  SECTION("autonomous") {
    const auto spec = SystemSpec::conservative(N);
    const Acceleration a = acceleration(spec, CartesianState{0, 1, 1, 0.3, -0.2});
    CHECK(a.ax == Catch::Approx(0.0).margin(1e-15));
    CHECK(a.ay == Catch::Approx(1.0).epsilon(1e-14));
  }

  SECTION("omega = 1 gives the 1d oscillator pair") {
    const auto spec = SystemSpec::conservative(N, parse_expression("1", "t"));
    const Acceleration a = acceleration(spec, CartesianState{0.7, 1, 1, 0, 0});
    CHECK(a.ax == Catch::Approx(-1.0).epsilon(1e-14));
    CHECK(a.ay == Catch::Approx(0.0).margin(1e-14));
  }
}

TEST_CASE("free motion has zero acceleration") {
  const auto spec =
      SystemSpec::normalized(parse_expression("0", "u"), parse_expression("0", "u"));
  const Acceleration a = acceleration(spec, CartesianState{0, 0.4, -1.2, 3, -4});
  CHECK(a.ax == 0.0);
  CHECK(a.ay == 0.0);
}

TEST_CASE("singular states are rejected") {
  const auto cons = SystemSpec::conservative(parse_expression("u^2", "u"));
  CHECK_THROWS_AS(acceleration(cons, CartesianState{0, 0, 1, 0, 0}), SingularStateError);
  const auto norm =
      SystemSpec::normalized(parse_expression("u", "u"), parse_expression("u", "u"));
  CHECK_THROWS_AS(acceleration(norm, CartesianState{0, 1, 0, 0, 0}), SingularStateError);
  CHECK_THROWS_AS(potential_value(parse_expression("u^2", "u"), 0.0, 1.0),
                  SingularStateError);
}

TEST_CASE("potential_value implements N(y/x)/x^2") {
  const auto N = parse_expression("u^(-2)/2", "u");
  CHECK(potential_value(N, 1, 1) == Catch::Approx(0.5).epsilon(1e-15));

  // the Lewis potential reduces to 1/(2 y^2) independently of x
  for (int i = 0; i < 50; ++i) {
    const double x = testutil::uniform(0.3, 2.0);
    const double y = testutil::uniform(0.3, 2.0);
    CHECK(potential_value(N, x, y) ==
          Catch::Approx(1.0 / (2.0 * y * y)).epsilon(1e-12));
  }

  // homogeneity of degree -2 under (x, y) -> (lambda x, lambda y)
  const auto M = parse_expression("sin(u)+2", "u");
  for (int i = 0; i < 50; ++i) {
    const double x = testutil::uniform(0.3, 2.0);
    const double y = testutil::uniform(-2.0, 2.0);
    const double lam = testutil::uniform(0.5, 3.0);
    CHECK(potential_value(M, lam * x, lam * y) ==
          Catch::Approx(potential_value(M, x, y) / (lam * lam)).epsilon(1e-12));
  }
}

TEST_CASE("conservative accelerations equal minus the potential gradient") {
  for (const char* n_src : {"u^(-2)/2", "u^2", "3/(1+u^2)", "u^(-2)/2 + 1/(1+u^2)"}) {
    const auto N = parse_expression(n_src, "u");
    const auto spec = SystemSpec::conservative(N);
    auto V = [&](double x, double y) { return potential_value(N, x, y); };
    for (int i = 0; i < 25; ++i) {
      CartesianState s;
      s.x = testutil::uniform(0.5, 2.0);
      s.y = testutil::uniform(0.5, 2.0);
      const Acceleration a = acceleration(spec, s);
      const auto grad = fd::gradient_xy(V, s.x, s.y);
      INFO(n_src << " at (" << s.x << ", " << s.y << ")");
      CHECK(std::abs(a.ax + grad[0]) <= 1e-8 * std::max(std::abs(a.ax), 1.0));
      CHECK(std::abs(a.ay + grad[1]) <= 1e-8 * std::max(std::abs(a.ay), 1.0));
    }
  }
}

TEST_CASE("Euler relation x V_x + y V_y = -2 V") {
  const auto N = parse_expression("u^(-2)/2 + 1/(1+u^2)", "u");
  auto V = [&](double x, double y) { return potential_value(N, x, y); };
  for (int i = 0; i < 25; ++i) {
    const double x = testutil::uniform(0.5, 2.0);
    const double y = testutil::uniform(0.5, 2.0);
    const auto grad = fd::gradient_xy(V, x, y);
    CHECK(x * grad[0] + y * grad[1] ==
          Catch::Approx(-2.0 * V(x, y)).epsilon(1e-8));
  }
}

TEST_CASE("general form matches the normalized form when f = u F, g = v G(1/v)") {
  // F = u, G = u^3  =>  f(u) = u^2, g(v) = v * (1/v)^3 = v^-2
  const auto norm =
      SystemSpec::normalized(parse_expression("u", "u"), parse_expression("u^3", "u"));
  const auto gen =
      SystemSpec::general(parse_expression("u^2", "u"), parse_expression("v^(-2)", "v"));
  for (int i = 0; i < 100; ++i) {
    CartesianState s;
    s.x = testutil::uniform(0.4, 2.0) * (i % 2 == 0 ? 1.0 : -1.0);
    s.y = testutil::uniform(0.4, 2.0) * (i % 3 == 0 ? 1.0 : -1.0);
    const Acceleration a = acceleration(norm, s);
    const Acceleration b = acceleration(gen, s);
    CHECK(a.ax == Catch::Approx(b.ax).epsilon(1e-12));
    CHECK(a.ay == Catch::Approx(b.ay).epsilon(1e-12));
  }
}

TEST_CASE("omega enters squared, so its sign cannot matter") {
  const auto N = parse_expression("u^2", "u");
  const auto plus = SystemSpec::conservative(N, parse_expression("2", "t"));
  const auto minus = SystemSpec::conservative(N, parse_expression("-2", "t"));
  const CartesianState s{0.4, 1.1, -0.7, 0.2, 0.1};
  const Acceleration a = acceleration(plus, s);
  const Acceleration b = acceleration(minus, s);
  CHECK(a.ax == b.ax);
  CHECK(a.ay == b.ay);
}
