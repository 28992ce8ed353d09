#pragma once

#include <Eigen/Dense>
#include <vector>

#include "scenegen/body.hpp"

namespace scenegen {

using Twist = Eigen::Matrix<double, 6, 1>;  // linear (3) + angular (3)

// Placement success thresholds. The linear/angular velocity and
// acceleration of the settling object must stay below these bounds for
// hold_window consecutive steps, starting no later than reach_window.
struct StabilityThresholds {
  double lin_vel_max = 0.005;                          // m/s
  double lin_acc_max = 1.0;                            // m/s^2
  double ang_vel_max = 0.5 * 3.14159265358979323846 / 180.0;    // rad/s
  double ang_acc_max = 180.0 * 3.14159265358979323846 / 180.0;  // rad/s^2
  int reach_window = 40;
  int hold_window = 20;
};

struct StabilityReport {
  bool stable = false;
  // Step index at which the hold window completes; trajectory length when
  // the placement never stabilizes.
  int stable_step = 0;
  double velocity_sum = 0.0;      // sum of 6-dim twist norms over the trajectory
  double acceleration_sum = 0.0;  // sum of 6-dim acceleration norms
};

// Finite-difference accelerations; the object is released from rest, so
// a_0 = twist_0 / dt.
std::vector<Twist> accelerations(const Trajectory& traj);

StabilityReport check_stability(const Trajectory& traj,
                                const StabilityThresholds& thresholds);

}  // namespace scenegen
