#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "scenegen/rng.hpp"
#include "scenegen/stability.hpp"

using namespace scenegen;

namespace {

Trajectory from_twists(const std::vector<Twist>& twists, double dt = 1.0 / 240.0) {
  Trajectory traj;
  traj.dt = dt;
  for (const Twist& t : twists) {
    TrajectorySample s;
    s.position = Vec3::Zero();
    s.orientation = Quat::Identity();
    s.linear_velocity = t.head<3>();
    s.angular_velocity = t.tail<3>();
    traj.samples.push_back(s);
  }
  return traj;
}

// Brute-force re-scan, recomputing the acceleration inside every window.
struct OracleVerdict {
  bool stable = false;
  int stable_step = 0;
};

OracleVerdict oracle_check(const Trajectory& traj, const StabilityThresholds& thr) {
  const int n = static_cast<int>(traj.size());
  const double inv_dt = 1.0 / traj.dt;
  auto twist = [&](int i) {
    Twist t;
    t << traj.samples[i].linear_velocity, traj.samples[i].angular_velocity;
    return t;
  };
  auto quiet = [&](int i) {
    const Twist v = twist(i);
    const Twist a = i == 0 ? Twist(twist(0) * inv_dt)
                           : Twist((twist(i) - twist(i - 1)) * inv_dt);
    return v.head<3>().norm() < thr.lin_vel_max &&
           a.head<3>().norm() < thr.lin_acc_max &&
           v.tail<3>().norm() < thr.ang_vel_max &&
           a.tail<3>().norm() < thr.ang_acc_max;
  };
  OracleVerdict verdict;
  verdict.stable_step = n;
  for (int start = 0; start <= thr.reach_window; ++start) {
    if (start + thr.hold_window > n) break;
    bool ok = true;
    for (int i = start; i < start + thr.hold_window && ok; ++i) ok = quiet(i);
    if (ok) {
      verdict.stable = true;
      verdict.stable_step = start + thr.hold_window;
      break;
    }
  }
  return verdict;
}

}  // namespace

TEST_CASE("accelerations: constant twist and the release-from-rest boundary") {
  Twist t;
  t << 0, 0, -0.04, 0, 0, 0;
  const Trajectory traj = from_twists({t, t, t, t});
  const auto acc = accelerations(traj);
  CHECK(acc[0][2] == doctest::Approx(-9.6).epsilon(1e-12));
  for (std::size_t i = 1; i < acc.size(); ++i) {
    CHECK(acc[i].norm() == 0.0);
  }
}

TEST_CASE("accelerations match a brute-force finite-difference oracle exactly") {
  Rng rng(5);
  std::vector<Twist> twists;
  for (int i = 0; i < 10; ++i) {
    Twist t;
    for (int k = 0; k < 6; ++k) t[k] = rng.uniform(-2.0, 2.0);
    twists.push_back(t);
  }
  const Trajectory traj = from_twists(twists);
  const auto acc = accelerations(traj);
  const double inv_dt = 1.0 / traj.dt;
  for (std::size_t i = 0; i < twists.size(); ++i) {
    const Twist expected =
        i == 0 ? Twist(twists[0] * inv_dt)
               : Twist((twists[i] - twists[i - 1]) * inv_dt);
    for (int k = 0; k < 6; ++k) CHECK(acc[i][k] == expected[k]);
  }
}

TEST_CASE("all-zero trajectory is stable at the earliest hold window") {
  const Trajectory traj = from_twists(std::vector<Twist>(60, Twist::Zero()));
  const StabilityReport rep = check_stability(traj, StabilityThresholds{});
  CHECK(rep.stable);
  CHECK(rep.stable_step == 20);
  CHECK(rep.velocity_sum == 0.0);
  CHECK(rep.acceleration_sum == 0.0);
}

TEST_CASE("linear speed pinned at 0.01 m/s never stabilizes") {
  Twist t = Twist::Zero();
  t[0] = 0.01;
  const Trajectory traj = from_twists(std::vector<Twist>(80, t));
  const StabilityReport rep = check_stability(traj, StabilityThresholds{});
  CHECK_FALSE(rep.stable);
  CHECK(rep.stable_step == 80);
}

TEST_CASE("1000 random synthetic trajectories agree with the oracle") {
  Rng rng(77);
  StabilityThresholds thr;
  int stable_count = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int len = rng.uniform_int(1, 120);
    std::vector<Twist> twists;
    twists.reserve(len);
    // Piecewise quiet/loud segments so both verdicts occur.
    Twist current = Twist::Zero();
    for (int i = 0; i < len; ++i) {
      if (rng.uniform() < 0.15) {
        const bool quiet = rng.uniform() < 0.6;
        for (int k = 0; k < 3; ++k) {
          current[k] = quiet ? rng.uniform(-0.5e-3, 0.5e-3)
                             : rng.uniform(-0.5, 0.5);
          current[3 + k] = quiet ? rng.uniform(-1e-3, 1e-3)
                                 : rng.uniform(-2.0, 2.0);
        }
      }
      twists.push_back(current);
    }
    const Trajectory traj = from_twists(twists);
    const StabilityReport rep = check_stability(traj, thr);
    const OracleVerdict oracle = oracle_check(traj, thr);
    CHECK(rep.stable == oracle.stable);
    CHECK(rep.stable_step == oracle.stable_step);
    stable_count += rep.stable ? 1 : 0;
  }
  CHECK(stable_count > 50);
  CHECK(stable_count < 950);
}

TEST_CASE("velocity and acceleration sums cover the full recorded trajectory") {
  Rng rng(31);
  std::vector<Twist> twists;
  for (int i = 0; i < 25; ++i) {
    Twist t;
    for (int k = 0; k < 6; ++k) t[k] = rng.uniform(-1.0, 1.0);
    twists.push_back(t);
  }
  const Trajectory traj = from_twists(twists);
  const StabilityReport rep = check_stability(traj, StabilityThresholds{});
  double vsum = 0.0, asum = 0.0;
  const auto acc = accelerations(traj);
  for (std::size_t i = 0; i < twists.size(); ++i) {
    vsum += twists[i].norm();
    asum += acc[i].norm();
  }
  CHECK(rep.velocity_sum == doctest::Approx(vsum).epsilon(1e-15));
  CHECK(rep.acceleration_sum == doctest::Approx(asum).epsilon(1e-15));
}

TEST_CASE("empty trajectories are rejected") {
  Trajectory traj;
  CHECK_THROWS(accelerations(traj));
  CHECK_THROWS(check_stability(traj, StabilityThresholds{}));
}
