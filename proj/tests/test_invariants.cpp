#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "ermakov/invariants.hpp"
#include "testutil.hpp"

using namespace ermakov;
using expr::parse_expression;

namespace {

SystemSpec lewis_spec() {
  return SystemSpec::conservative(parse_expression("u^(-2)/2", "u"));
}

// Closed-form solution X = 1, Y = sqrt(1 + T^2) of the Lewis system.
CartesianState lewis_closed_form(double T) {
  const double Y = std::sqrt(1.0 + T * T);
  return CartesianState{T, 1.0, Y, 0.0, T / Y};
}

CartesianState random_state() {
  return CartesianState{testutil::uniform(0, 3), testutil::uniform(0.4, 2.0),
                        testutil::uniform(0.4, 2.0), testutil::uniform(-1, 1),
                        testutil::uniform(-1, 1)};
}

Trajectory integrate_conservative(const char* n_src, const CartesianState& s0, double t_end,
                                  double tol = 1e-10, double interval = 0.01) {
  IntegrationControl control;
  control.tolerance = tol;
  control.sample_interval = interval;
  return integrate(SystemSpec::conservative(parse_expression(n_src, "u")), s0, t_end,
                   control);
}

}  // namespace

TEST_CASE("anchored I0 for the conservative form") {
  const auto spec = lewis_spec();
  CHECK(ermakov_I0(spec, CartesianState{0, 1, 1, 0, 0}) ==
        Catch::Approx(1.0).epsilon(1e-14));

  // vanishing velocities on the diagonal give I0 = 2 N(1)
  for (const char* n_src : {"u^(-2)/2", "u^2", "3/(1+u^2)"}) {
    const auto s = SystemSpec::conservative(parse_expression(n_src, "u"));
    const double n1 = s.N().evaluate(1.0);
    for (double x : {0.5, 1.0, 1.7})
      CHECK(ermakov_I0(s, CartesianState{0, x, x, 0, 0}) ==
            Catch::Approx(2.0 * n1).epsilon(1e-13));
  }
  CHECK_THROWS_AS(ermakov_I0(spec, CartesianState{0, 0, 1, 0, 0}), SingularStateError);
}

TEST_CASE("quadrature-based I0 for the normalized form") {
  const auto spec =
      SystemSpec::normalized(parse_expression("u", "u"), parse_expression("u^3", "u"));
  // integrand u F - u^-3 G = u^2 - 1; reference point u_ref = 1
  CHECK(ermakov_I0(spec, CartesianState{0, 1, 1, 0, 0}) == Catch::Approx(0.0).margin(1e-12));
  // at u = 2 with zero velocities only the quadrature remains: int_1^2 (u^2 - 1) du = 4/3
  CHECK(ermakov_I0(spec, CartesianState{0, 1, 2, 0, 0}) ==
        Catch::Approx(4.0 / 3.0).epsilon(1e-10));
}

TEST_CASE("general-form I0 agrees with the normalized-form I0") {
  // F = u, G = u^3  =>  f = u^2, g = v^-2; shared anchoring at u = v = 1
  const auto norm =
      SystemSpec::normalized(parse_expression("u", "u"), parse_expression("u^3", "u"));
  const auto gen =
      SystemSpec::general(parse_expression("u^2", "u"), parse_expression("v^(-2)", "v"));
  for (int i = 0; i < 30; ++i) {
    const CartesianState s = random_state();
    CHECK(ermakov_I0(gen, s) == Catch::Approx(ermakov_I0(norm, s)).margin(1e-10));
  }
}

TEST_CASE("lewis invariant") {
  CHECK(lewis_invariant(CartesianState{0, 1, 1, 0, 0}) == 0.5);
  CHECK_THROWS_AS(lewis_invariant(CartesianState{0, 1, 0, 0, 0}), SingularStateError);

  SECTION("constant along the oscillator pair's closed form x = cos t, y = 1") {
    for (double t : {0.0, 0.3, 1.0, 2.5}) {
      const CartesianState s{t, std::cos(t), 1.0, -std::sin(t), 0.0};
      CHECK(lewis_invariant(s) == Catch::Approx(0.5).epsilon(1e-14));
    }
  }

  SECTION("anchored I0 exceeds the Lewis invariant by exactly 1/2") {
    const auto spec = lewis_spec();
    for (int i = 0; i < 50; ++i) {
      const CartesianState s = random_state();
      CHECK(ermakov_I0(spec, s) - lewis_invariant(s) ==
            Catch::Approx(0.5).epsilon(1e-11));
    }
  }
}

TEST_CASE("hamiltonian") {
  CHECK(hamiltonian(lewis_spec(), CartesianState{0, 1, 1, 0, 0}) ==
        Catch::Approx(0.5).epsilon(1e-15));

  const auto free_spec = SystemSpec::conservative(parse_expression("0", "u"));
  const CartesianState s{0, 1.3, -0.4, 0.6, -0.2};
  CHECK(hamiltonian(free_spec, s) ==
        Catch::Approx(0.5 * (s.vx * s.vx + s.vy * s.vy)).epsilon(1e-15));

  const auto gen =
      SystemSpec::general(parse_expression("u", "u"), parse_expression("v", "v"));
  CHECK_THROWS_AS(hamiltonian(gen, s), NotConservativeError);
  const auto timed = SystemSpec::conservative(parse_expression("u^2", "u"),
                                              parse_expression("1", "t"));
  CHECK_THROWS_AS(hamiltonian(timed, s), NotConservativeError);
}

TEST_CASE("I2 and I3 at reference points and along the closed form") {
  const auto spec = lewis_spec();
  CHECK(fi_I2(spec, CartesianState{0, 1, 1, 0, 0}) == 0.0);
  CHECK(fi_I3(spec, CartesianState{0, 1, 1, 0, 0}) == Catch::Approx(1.0).epsilon(1e-15));

  // zero velocities at T = 0 always give I2 = 0, I3 = r^2/2
  for (int i = 0; i < 20; ++i) {
    const double x = testutil::uniform(0.4, 2.0), y = testutil::uniform(0.4, 2.0);
    CHECK(fi_I2(spec, CartesianState{0, x, y, 0, 0}) == 0.0);
    CHECK(fi_I3(spec, CartesianState{0, x, y, 0, 0}) ==
          Catch::Approx(0.5 * (x * x + y * y)).epsilon(1e-14));
  }

  // conserved values along the Lewis closed form
  for (double T : {0.0, 0.5, 1.0, 3.0}) {
    const CartesianState s = lewis_closed_form(T);
    CHECK(hamiltonian(spec, s) == Catch::Approx(0.5).epsilon(1e-13));
    CHECK(fi_I2(spec, s) == Catch::Approx(0.0).margin(1e-13));
    CHECK(fi_I3(spec, s) == Catch::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("anchoring identity 4 H I3 - I2^2 = 2 I0") {
  CHECK(check_I3_relation(0.5, 1.0, 0.0, 1.0) == 0.0);
  CHECK_THROWS_AS(check_I3_relation(0.0, 1.0, 0.0, 1.0), ValidationError);

  SECTION("pointwise along a generic conservative trajectory") {
    const Trajectory traj = integrate_conservative("u^(-2)/2 + 1/(1+u^2)",
                                                   CartesianState{0, 1, 2, 0.3, -0.1}, 10.0);
    for (const auto& s : traj.samples) {
      const double H = hamiltonian(traj.spec, s);
      const double I0 = ermakov_I0(traj.spec, s);
      const double I2 = fi_I2(traj.spec, s);
      const double I3 = fi_I3(traj.spec, s);
      CHECK(check_I3_relation(H, I0, I2, I3) < 1e-9);
    }
  }
}

TEST_CASE("gradient-KV first integrals on the Lewis potential") {
  const auto spec = lewis_spec();  // V = 1/(2 y^2): b1 = 1, b2 = 0
  for (double T : {0.0, 0.7, 1.0, 2.0}) {
    const CartesianState s = lewis_closed_form(T);
    const auto [i21, i31] = fi_gradientKV(1.0, 0.0, spec, s);
    CHECK(i21 == 0.0);                                // X' = 0
    CHECK(i31 == Catch::Approx(1.0).epsilon(1e-14));  // -T X' + X = 1
  }
  CHECK_THROWS_AS(fi_gradientKV(0.0, 1.0, spec, lewis_closed_form(0.0)), ConditionError);
}

TEST_CASE("angular momentum") {
  CHECK(angular_momentum(CartesianState{0, 1, 0, 0, 1}) == 1.0);

  SECTION("conserved for the rotationally invariant potential c/(1+u^2)") {
    const Trajectory traj = integrate_conservative("3/(1+u^2)",
                                                   CartesianState{0, 1, 0.5, -0.2, 0.4}, 5.0);
    const double ref = angular_momentum(traj.samples.front());
    double drift = 0;
    for (const auto& s : traj.samples)
      drift = std::max(drift, std::abs(angular_momentum(s) - ref));
    CHECK(drift < 1e-8);
  }

  SECTION("not conserved for the Lewis potential") {
    const Trajectory traj = integrate_conservative("u^(-2)/2",
                                                   CartesianState{0, 1, 2, 0.3, -0.1}, 5.0);
    const double ref = angular_momentum(traj.samples.front());
    double drift = 0;
    for (const auto& s : traj.samples)
      drift = std::max(drift, std::abs(angular_momentum(s) - ref));
    CHECK(drift > 0.01);
  }
}

TEST_CASE("drift_report") {
  SECTION("Lewis autonomous trajectory passes H, I0, I2, I3 at 1e-7") {
    const Trajectory traj =
        integrate_conservative("u^(-2)/2", CartesianState{0, 1, 1, 0, 0}, 10.0);
    const std::vector<std::string> names = {"H", "I0", "I2", "I3"};
    const InvariantReport rep = drift_report(traj, names, 1e-7);
    CHECK(rep.pass);
    for (const auto& s : rep.series) {
      CHECK(s.pass);
      CHECK(s.max_rel_drift >= 0.0);
      CHECK(s.values.size() == traj.samples.size());
    }
  }

  SECTION("free motion conserves H to round-off") {
    const Trajectory traj =
        integrate_conservative("0", CartesianState{0, 1, 0.5, 0.3, 0.2}, 5.0);
    const std::vector<std::string> names = {"H"};
    const InvariantReport rep = drift_report(traj, names, 1e-13);
    CHECK(rep.pass);
  }

  SECTION("H on a general-form spec is an error") {
    const auto gen =
        SystemSpec::general(parse_expression("u", "u"), parse_expression("v", "v"));
    Trajectory traj(gen);
    traj.samples.push_back(CartesianState{0, 1, 1, 0, 0});
    const std::vector<std::string> names = {"H"};
    CHECK_THROWS_AS(drift_report(traj, names, 1e-7), ValidationError);
    const std::vector<std::string> none;
    CHECK_THROWS_AS(drift_report(traj, none, 1e-7), ValidationError);
    const std::vector<std::string> unknown = {"Q"};
    CHECK_THROWS_AS(drift_report(traj, unknown, 1e-7), ValidationError);
  }

  SECTION("I21/I31 need gradient_kv parameters") {
    const Trajectory traj =
        integrate_conservative("u^(-2)/2", CartesianState{0, 1, 2, 0.3, -0.1}, 1.0);
    const std::vector<std::string> names = {"I21", "I31"};
    CHECK_THROWS_AS(drift_report(traj, names, 1e-6), ValidationError);
    const InvariantReport rep = drift_report(traj, names, 1e-6, std::pair{1.0, 0.0});
    CHECK(rep.pass);
  }
}

TEST_CASE("conservative FI drift stays below 1e-7 over a span of 10") {
  for (const char* n_src : {"u^(-2)/2", "u^(-2)/2 + 1/(1+u^2)"}) {
    const Trajectory traj =
        integrate_conservative(n_src, CartesianState{0, 1, 2, 0.3, -0.1}, 10.0);
    const std::vector<std::string> names = {"H", "I0", "I2", "I3"};
    const InvariantReport rep = drift_report(traj, names, 1e-7);
    INFO(n_src);
    CHECK(rep.pass);
  }
}

TEST_CASE("quadrature-based I0 is conserved for non-conservative F, G") {
  IntegrationControl control;
  control.tolerance = 1e-10;
  control.sample_interval = 0.01;
  const auto spec =
      SystemSpec::normalized(parse_expression("u", "u"), parse_expression("u^3", "u"));
  const Trajectory traj =
      integrate(spec, CartesianState{0, 1, 1, 0.2, -0.3}, 5.0, control);
  const std::vector<std::string> names = {"I0"};
  const InvariantReport rep = drift_report(traj, names, 1e-7);
  CHECK(rep.pass);
}

TEST_CASE("the Ermakov FI ignores omega: drift in the time-dependent frame") {
  IntegrationControl control;
  control.tolerance = 1e-10;
  control.sample_interval = 0.01;
  for (const char* w_src : {"1", "2", "1+0.1*cos(t)"}) {
    const auto spec = SystemSpec::conservative(parse_expression("3/(1+u^2)", "u"),
                                               parse_expression(w_src, "t"));
    const Trajectory traj =
        integrate(spec, CartesianState{0, 1, 0.5, -0.2, 0.4}, 3.0, control);
    const std::vector<std::string> names = {"I0"};
    const InvariantReport rep = drift_report(traj, names, 1e-7);
    INFO("omega = " << w_src);
    CHECK(rep.pass);
  }
}

TEST_CASE("superintegrability: gradients of (H, I0, I2) have rank 3") {
  const auto spec =
      SystemSpec::conservative(parse_expression("u^(-2)/2 + 1/(1+u^2)", "u"));
  const double ratio =
      superintegrability_ratio(spec, CartesianState{0, 1, 2, 0.3, -0.1});
  INFO("sigma_min / sigma_max = " << ratio);
  CHECK(ratio > 1e-6);
}
