#include "scenegen/stability.hpp"

#include <stdexcept>

namespace scenegen {

namespace {

Twist twist_of(const TrajectorySample& s) {
  Twist t;
  t << s.linear_velocity, s.angular_velocity;
  return t;
}

}  // namespace

std::vector<Twist> accelerations(const Trajectory& traj) {
  if (traj.empty()) throw std::invalid_argument("accelerations: empty trajectory");
  std::vector<Twist> acc(traj.size());
  const double inv_dt = 1.0 / traj.dt;
  acc[0] = twist_of(traj.samples[0]) * inv_dt;
  for (std::size_t i = 1; i < traj.size(); ++i) {
    acc[i] = (twist_of(traj.samples[i]) - twist_of(traj.samples[i - 1])) * inv_dt;
  }
  return acc;
}

StabilityReport check_stability(const Trajectory& traj,
                                const StabilityThresholds& thr) {
  if (traj.empty()) throw std::invalid_argument("check_stability: empty trajectory");
  const int n = static_cast<int>(traj.size());
  const auto acc = accelerations(traj);

  std::vector<char> quiet(n);
  for (int i = 0; i < n; ++i) {
    const auto& s = traj.samples[i];
    quiet[i] = s.linear_velocity.norm() < thr.lin_vel_max &&
               acc[i].head<3>().norm() < thr.lin_acc_max &&
               s.angular_velocity.norm() < thr.ang_vel_max &&
               acc[i].tail<3>().norm() < thr.ang_acc_max;
  }

  StabilityReport report;
  report.stable_step = n;
  for (int start = 0; start <= thr.reach_window; ++start) {
    if (start + thr.hold_window > n) break;
    bool held = true;
    for (int i = start; i < start + thr.hold_window; ++i) {
      if (!quiet[i]) {
        held = false;
        break;
      }
    }
    if (held) {
      report.stable = true;
      report.stable_step = start + thr.hold_window;
      break;
    }
  }

  for (int i = 0; i < n; ++i) {
    report.velocity_sum += twist_of(traj.samples[i]).norm();
    report.acceleration_sum += acc[i].norm();
  }
  return report;
}

}  // namespace scenegen
