#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ermakov/integrate.hpp"
#include "testutil.hpp"

using namespace ermakov;
using expr::parse_expression;

namespace {

SystemSpec free_motion() {
  return SystemSpec::normalized(parse_expression("0", "u"), parse_expression("0", "u"));
}

SystemSpec pinney() {
  return SystemSpec::conservative(parse_expression("u^(-2)/2", "u"));
}

double pinney_y(double T) { return std::sqrt(1.0 + T * T); }

}  // namespace

TEST_CASE("one RK4 step of free motion is exact") {
  const SystemSpec spec = free_motion();
  const CartesianState s0{0, 1, 1, 1, 0};
  const CartesianState s1 = step_rk4(spec, s0, 0.1);
  CHECK(s1.time == Catch::Approx(0.1).epsilon(1e-16));
  CHECK(s1.x == 1.1);
  CHECK(s1.y == 1.0);
  CHECK(s1.vx == 1.0);
  CHECK(s1.vy == 0.0);
}

TEST_CASE("rk4 step rejects h = 0") {
  CHECK_THROWS_AS(step_rk4(free_motion(), CartesianState{0, 1, 1, 0, 0}, 0.0),
                  ValidationError);
}

TEST_CASE("rk4 returns the harmonic oscillator to its start after one period") {
  const auto spec = SystemSpec::normalized(parse_expression("0", "u"),
                                           parse_expression("0", "u"),
                                           parse_expression("1", "t"));
  CartesianState s{0, 1, 1, 0, 0};
  const double h = 1e-3;
  const double period = 2.0 * std::acos(-1.0);
  const long n = std::lround(period / h);
  for (long i = 0; i < n; ++i) s = step_rk4(spec, s, period / n);
  CHECK(std::abs(s.x - 1.0) < 1e-10);
  CHECK(std::abs(s.vx) < 1e-10);
}

TEST_CASE("adaptive integration reproduces the Pinney closed form") {
  IntegrationControl control;
  control.method = Method::dp54;
  control.tolerance = 1e-10;
  control.sample_interval = 0.01;
  const Trajectory traj = integrate(pinney(), CartesianState{0, 1, 1, 0, 0}, 5.0, control);

  REQUIRE(traj.samples.size() > 400);
  CHECK(traj.samples.front().time == 0.0);
  CHECK(traj.samples.back().time == 5.0);
  double max_y = 0, max_x = 0;
  double prev_t = -1;
  for (const auto& s : traj.samples) {
    CHECK(s.time > prev_t);  // strictly increasing samples
    prev_t = s.time;
    max_y = std::max(max_y, std::abs(s.y - pinney_y(s.time)));
    max_x = std::max(max_x, std::abs(s.x - 1.0));
  }
  CHECK(max_y < 1e-8);
  CHECK(max_x < 1e-12);
}

TEST_CASE("explicit sample times are hit exactly") {
  IntegrationControl control;
  control.tolerance = 1e-10;
  control.sample_times = {0.3, 1.0, 1.7, 2.0};
  const Trajectory traj = integrate(pinney(), CartesianState{0, 1, 1, 0, 0}, 2.0, control);
  REQUIRE(traj.samples.size() == 5);
  CHECK(traj.samples[1].time == 0.3);
  CHECK(traj.samples[2].time == 1.0);
  CHECK(traj.samples[3].time == 1.7);
  CHECK(traj.samples[4].time == 2.0);
  CHECK(traj.samples[2].y == Catch::Approx(pinney_y(1.0)).epsilon(1e-9));
}

TEST_CASE("integration preconditions") {
  CHECK_THROWS_AS(integrate(pinney(), CartesianState{1, 1, 1, 0, 0}, 1.0, {}),
                  ValidationError);  // t_end <= t0
  CHECK_THROWS_AS(integrate(pinney(), CartesianState{0, 0, 1, 0, 0}, 1.0, {}),
                  SingularStateError);
  IntegrationControl bad;
  bad.method = Method::rk4;
  bad.step = 0;
  CHECK_THROWS_AS(integrate(pinney(), CartesianState{0, 1, 1, 0, 0}, 1.0, bad),
                  ValidationError);
}

TEST_CASE("halving the rk4 step improves the Pinney error at 4th order") {
  auto max_error = [&](double h) {
    IntegrationControl control;
    control.method = Method::rk4;
    control.step = h;
    const Trajectory traj =
        integrate(pinney(), CartesianState{0, 1, 1, 0, 0}, 5.0, control);
    double err = 0;
    for (const auto& s : traj.samples) err = std::max(err, std::abs(s.y - pinney_y(s.time)));
    return err;
  };
  const double e1 = max_error(1e-2);
  const double e2 = max_error(5e-3);
  const double e3 = max_error(2.5e-3);
  INFO("errors: " << e1 << " " << e2 << " " << e3);
  CHECK(e1 / e2 >= 12.0);
  CHECK(e2 / e3 >= 12.0);
}

TEST_CASE("adaptive runs at 1e-8 and 1e-12 agree within 10x the looser tolerance") {
  auto run = [&](double tol) {
    IntegrationControl control;
    control.tolerance = tol;
    control.sample_interval = 0.05;
    return integrate(SystemSpec::conservative(
                         parse_expression("u^(-2)/2 + 1/(1+u^2)", "u")),
                     CartesianState{0, 1, 2, 0.3, -0.1}, 5.0, control);
  };
  const Trajectory loose = run(1e-8);
  const Trajectory tight = run(1e-12);
  REQUIRE(loose.samples.size() == tight.samples.size());
  double diff = 0;
  for (std::size_t i = 0; i < loose.samples.size(); ++i) {
    const auto& a = loose.samples[i];
    const auto& b = tight.samples[i];
    REQUIRE(a.time == b.time);
    diff = std::max({diff, std::abs(a.x - b.x), std::abs(a.y - b.y), std::abs(a.vx - b.vx),
                     std::abs(a.vy - b.vy)});
  }
  CHECK(diff < 1e-7);
}

TEST_CASE("collapse onto the x = 0 singularity stops with the last good state") {
  // X'' = -1/X^3 pulls X(0) = 1, X'(0) = 0 into the axis in finite time
  const auto spec =
      SystemSpec::normalized(parse_expression("-1", "u"), parse_expression("0", "u"));
  IntegrationControl control;
  control.tolerance = 1e-10;
  try {
    integrate(spec, CartesianState{0, 1, 1, 0, 0}, 3.0, control);
    FAIL("expected IntegrationError");
  } catch (const IntegrationError& e) {
    CHECK(e.last_time() > 0.9);   // collapse happens at t = 1
    CHECK(e.last_time() < 1.01);
    REQUIRE(e.last_state().size() == 4);
    CHECK(std::abs(e.last_state()[0]) < 0.05);  // x is nearly 0
  }
}

TEST_CASE("step budget is enforced") {
  IntegrationControl control;
  control.tolerance = 1e-12;
  control.max_steps = 10;
  CHECK_THROWS_AS(integrate(pinney(), CartesianState{0, 1, 1, 0, 0}, 5.0, control),
                  IntegrationError);
}

TEST_CASE("accepted steps are recorded when no sampling is requested") {
  IntegrationControl control;
  control.tolerance = 1e-8;
  const Trajectory traj = integrate(free_motion(), CartesianState{0, 1, 1, 0.1, 0.1}, 1.0,
                                    control);
  CHECK(traj.samples.size() >= 2);
  CHECK(traj.samples.back().time == 1.0);
  CHECK(traj.stats.accepted >= traj.samples.size() - 1);
}
