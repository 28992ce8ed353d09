#pragma once

#include <stdexcept>
#include <vector>

#include "scenegen/body.hpp"
#include "scenegen/stability.hpp"

namespace scenegen {

struct SimulationDiverged : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ContactPoint {
  Vec3 point = Vec3::Zero();  // world
  double penetration = 0.0;   // >= 0
};

struct ContactManifold {
  int a = -1;
  int b = -1;
  Vec3 normal = Vec3::UnitZ();  // world, points from a toward b
  std::vector<ContactPoint> points;
};

// Deterministic rigid-body settling simulator: semi-implicit Euler with a
// sequential-impulse contact solver (Coulomb friction, Baumgarte
// positional correction). Single-threaded; copy freely, instances never
// share state.
class World {
 public:
  Vec3 gravity = Vec3(0.0, 0.0, -9.81);
  double dt = 1.0 / 240.0;
  int solver_iterations = 10;
  double baumgarte = 0.2;
  double slop = 5e-4;                   // penetration allowed without correction
  double max_bias_velocity = 2.0;       // m/s cap on positional correction
  double restitution_threshold = 1.0;   // m/s; slower impacts do not bounce

  int add_body(const RigidBody& body);

  const RigidBody& body(int id) const { return bodies_.at(id); }
  RigidBody& body(int id) { return bodies_.at(id); }
  int body_count() const { return static_cast<int>(bodies_.size()); }

  // One fixed-dt step. Throws SimulationDiverged on non-finite state.
  void step();

  // Steps up to max_steps, recording the body's pose + twist after each
  // step. With early_stop set, returns as soon as the recorded prefix
  // passes the stability check.
  Trajectory settle(int body_id, int max_steps,
                    const StabilityThresholds* early_stop = nullptr);

  // True iff the candidate penetrates any existing body by more than
  // the contact tolerance.
  bool check_overlap(const RigidBody& candidate, double tolerance = 1e-3) const;

  // Largest penetration depth between the candidate and the world
  // (0 when separated).
  double penetration_depth(const RigidBody& candidate) const;

  long step_count() const { return steps_; }

  // Contact manifolds found during the most recent step (diagnostics).
  const std::vector<ContactManifold>& last_contacts() const { return contacts_; }

 private:
  // Accumulated impulses carried across steps (warm starting); matched by
  // body pair and contact position.
  struct CachedImpulse {
    Vec3 point;
    double normal = 0.0;
    double tangent1 = 0.0;
    double tangent2 = 0.0;
  };
  struct PairCache {
    int a = -1;
    int b = -1;
    std::vector<CachedImpulse> points;
  };

  std::vector<RigidBody> bodies_;
  std::vector<ConvexHull> hulls_;  // empty for spheres
  std::vector<ContactManifold> contacts_;
  std::vector<PairCache> impulse_cache_;
  long steps_ = 0;

  void find_contacts();
  void solve_contacts();
  void integrate_positions();
  void check_finite() const;
};

}  // namespace scenegen
