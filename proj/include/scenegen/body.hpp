#pragma once

#include <array>
#include <vector>

#include "scenegen/shapes.hpp"

namespace scenegen {

struct BodyState {
  Vec3 position = Vec3::Zero();
  Quat orientation = Quat::Identity();
  Vec3 linear_velocity = Vec3::Zero();
  Vec3 angular_velocity = Vec3::Zero();
};

// One pose + twist record of the queried object: 13 numbers per step.
struct TrajectorySample {
  Vec3 position;
  Quat orientation;
  Vec3 linear_velocity;
  Vec3 angular_velocity;

  std::array<double, 13> flat() const {
    return {position.x(),         position.y(),         position.z(),
            orientation.w(),      orientation.x(),      orientation.y(),
            orientation.z(),      linear_velocity.x(),  linear_velocity.y(),
            linear_velocity.z(),  angular_velocity.x(), angular_velocity.y(),
            angular_velocity.z()};
  }

  static TrajectorySample from_state(const BodyState& s) {
    return {s.position, s.orientation, s.linear_velocity, s.angular_velocity};
  }
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  double dt = 1.0 / 240.0;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
};

struct RigidBody {
  Shape shape;
  double mass = 0.0;        // kg; 0 means static
  double friction = 0.5;    // Coulomb coefficient, >= 0
  double restitution = 0.0; // [0, 1)
  Vec3 inertia = Vec3::Zero();  // principal moments, local frame
  BodyState state;

  bool is_static() const { return mass == 0.0; }

  static RigidBody make(const Shape& shape, double mass, double friction = 0.5,
                        double restitution = 0.0) {
    RigidBody b;
    b.shape = shape;
    b.mass = mass;
    b.friction = friction;
    b.restitution = restitution;
    b.inertia = mass > 0.0 ? shape.inertia(mass) : Vec3::Zero();
    return b;
  }
};

// Yaw-only orientation about world z.
inline Quat yaw_quat(double yaw) {
  return Quat(Eigen::AngleAxisd(yaw, Vec3::UnitZ()));
}

// Heading extracted from a general orientation (direction the body-local
// x axis points, projected to the table plane).
inline double yaw_of(const Quat& q) {
  const Vec3 x = q * Vec3::UnitX();
  return std::atan2(x.y(), x.x());
}

}  // namespace scenegen
