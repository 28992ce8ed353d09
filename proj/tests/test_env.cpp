#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "scenegen/env.hpp"

using namespace scenegen;

namespace {

// A small scene with hand-picked cubes on the default table.
SceneSpec cube_scene(int n_objects, double half = 0.03) {
  SceneSpec spec;
  spec.table = TableSpec{};
  spec.region.center = Vec3(0, 0, 0.70);
  spec.region.half_extents = Vec3(0.25, 0.30, 0.15);
  spec.region.yaw = 0.0;
  for (int i = 0; i < n_objects; ++i) {
    ObjectSpec obj;
    obj.id = "cube" + std::to_string(i);
    obj.shape = Shape::cuboid(half, half, half);
    obj.mass = 0.3;
    obj.friction = 0.5;
    spec.catalog.push_back(obj);
    spec.query_order.push_back(obj.id);
  }
  return spec;
}

ObservationConfig small_obs() {
  ObservationConfig cfg;
  cfg.grid = 16;
  return cfg;
}

}  // namespace

TEST_CASE("reward arithmetic is exactly Eq-1 shaped") {
  CHECK(placement_reward(0.005, 100.0, 2, true, 0.0, 0.0) == 200.0);
  CHECK(placement_reward(0.005, 100.0, 1, false, 10.0, 30.0) ==
        doctest::Approx(-0.2).epsilon(1e-15));
  CHECK(placement_reward(0.005, 100.0, 3, true, 4.0, 6.0) ==
        doctest::Approx(300.0 - 0.05).epsilon(1e-15));
}

TEST_CASE("reset yields a clean world and a flat heightmap") {
  GeneratorEnv env(cube_scene(2), GeneratorConfig{}, small_obs());
  Rng rng(1);
  const Eigen::VectorXd obs = env.reset(rng);
  for (int i = 0; i < 16 * 16; ++i) CHECK(obs[i] == 0.0);
  CHECK(env.world().body_count() == 1);  // only the table
  CHECK(env.object_index() == 1);
  CHECK(env.attempt_index() == 1);
  CHECK_FALSE(env.episode_done());

  Rng rng2(1);
  GeneratorEnv env2(cube_scene(2), GeneratorConfig{}, small_obs());
  CHECK(env2.reset(rng2) == obs);
}

TEST_CASE("reset with a shrinkage change stays within the documented range") {
  SceneSpec spec = cube_scene(1);
  GeneratorEnv env(spec, GeneratorConfig{}, small_obs());
  RegionChange change;
  change.kind = RegionChange::Kind::Shrinkage;
  Rng rng(2);
  env.reset(rng, &change);
  CHECK(env.region().half_extents.x() < spec.region.half_extents.x());
  CHECK(env.region().half_extents.x() >= spec.region.half_extents.x() - 0.10);
  CHECK(env.region().half_extents.y() < spec.region.half_extents.y());
}

TEST_CASE("a centered resting placement commits and advances") {
  GeneratorEnv env(cube_scene(2), GeneratorConfig{}, small_obs());
  Rng rng(3);
  env.reset(rng);
  const StepResult res = env.step(Eigen::Vector4d(0, 0, -1, 0));
  CHECK(res.stable);
  CHECK_FALSE(res.overlap_rejected);
  CHECK(res.flags.object_done);
  CHECK_FALSE(res.flags.episode_done);
  CHECK(env.object_index() == 2);
  CHECK(env.attempt_index() == 1);
  CHECK(env.world().body_count() == 2);
  // Reward decomposition: R + c (v + a) == n R0 for a stable first object.
  CHECK(res.reward + 0.005 * (res.velocity_sum + res.acceleration_sum) ==
        doctest::Approx(100.0).epsilon(1e-12));

  // Second object on the same spot overlaps; the attempt fails but still
  // produces a trajectory for the history.
  const StepResult res2 = env.step(Eigen::Vector4d(0, 0, -1, 0));
  CHECK(res2.overlap_rejected);
  CHECK_FALSE(res2.stable);
  CHECK(res2.flags.attempt_failed);
  CHECK(res2.trajectory.size() == 240);  // full-budget penalty
  CHECK(env.attempt_index() == 2);
  CHECK(env.world().body_count() == 2);  // candidate removed
  CHECK(res2.reward ==
        doctest::Approx(-0.005 * (res2.velocity_sum + res2.acceleration_sum))
            .epsilon(1e-12));
  // The history block of the observation now carries the failed attempt.
  const int base = 16 * 16 + 8;
  ObservationConfig ocfg = small_obs();
  CHECK(res2.observation.segment(base, ocfg.slot_width()).norm() > 0.0);
}

TEST_CASE("episodes fail after exhausting the attempt budget") {
  GeneratorConfig cfg;
  cfg.max_attempts = 3;
  GeneratorEnv env(cube_scene(2), cfg, small_obs());
  Rng rng(4);
  env.reset(rng);
  CHECK(env.step(Eigen::Vector4d(0, 0, -1, 0)).stable);

  int attempts = 0;
  StepResult last;
  while (!env.episode_done()) {
    last = env.step(Eigen::Vector4d(0, 0, -1, 0));  // always collides
    ++attempts;
    CHECK(attempts <= 3);
  }
  CHECK(attempts == 3);
  CHECK_FALSE(env.episode_success());
  CHECK(last.flags.episode_done);
  CHECK_FALSE(last.flags.episode_success);
  CHECK_THROWS_AS(env.step(Eigen::Vector4d::Zero()), std::logic_error);

  const EpisodeRecord rec = env.record();
  CHECK_FALSE(rec.success);
  CHECK(rec.attempts.size() == 4);
  CHECK(rec.placements.size() == 1);
}

TEST_CASE("an episode placing all objects succeeds with exact bookkeeping") {
  GeneratorEnv env(cube_scene(3), GeneratorConfig{}, small_obs());
  Rng rng(5);
  env.reset(rng);
  const double xs[] = {-0.6, 0.0, 0.6};
  double total = 0.0;
  StepResult res;
  for (int i = 0; i < 3; ++i) {
    res = env.step(Eigen::Vector4d(xs[i], 0, -1, 0));
    CHECK(res.stable);
    total += res.reward;
    // Eq-1 decomposition holds exactly at every step.
    CHECK(res.reward + 0.005 * (res.velocity_sum + res.acceleration_sum) ==
          doctest::Approx((i + 1) * 100.0).epsilon(1e-12));
  }
  CHECK(res.flags.episode_done);
  CHECK(res.flags.episode_success);
  const EpisodeRecord rec = env.record();
  CHECK(rec.success);
  CHECK(rec.placements.size() == 3);
  CHECK(rec.total_reward == doctest::Approx(total).epsilon(1e-12));
  CHECK(rec.max_committed_drift <= 1e-3);
  for (const PlacementRecord& p : rec.placements) {
    CHECK(p.attempts == 1);
    CHECK(p.stable_step <= 60);
  }
}

TEST_CASE("failed attempts restore the world exactly") {
  GeneratorEnv env(cube_scene(2), GeneratorConfig{}, small_obs());
  Rng rng(6);
  env.reset(rng);
  env.step(Eigen::Vector4d(0, 0, -1, 0));
  const Vec3 committed_pos = env.world().body(1).state.position;
  // A drop directly above the committed cube fails (lands on top but is
  // lifted first due to overlap; treated as failure) or perturbs it; either
  // way the committed body must be back at its exact pose afterwards.
  env.step(Eigen::Vector4d(0, 0, -1, 0));
  CHECK(env.world().body(1).state.position == committed_pos);
}

TEST_CASE("seeded episodes replay identically") {
  auto run = [&](std::uint64_t seed) {
    GeneratorEnv env(cube_scene(3), GeneratorConfig{}, small_obs());
    Rng rng(seed);
    env.reset(rng);
    std::vector<double> rewards;
    while (!env.episode_done()) {
      Eigen::Vector4d a;
      for (int k = 0; k < 4; ++k) a[k] = rng.uniform(-1.0, 1.0);
      rewards.push_back(env.step(a).reward);
    }
    return rewards;
  };
  const auto r1 = run(99);
  const auto r2 = run(99);
  REQUIRE(r1.size() == r2.size());
  for (std::size_t i = 0; i < r1.size(); ++i) CHECK(r1[i] == r2[i]);
}

TEST_CASE("rollout_episode drives an untrained policy to completion") {
  SceneSpec spec = cube_scene(2);
  ObservationConfig ocfg = small_obs();
  GeneratorEnv env(spec, GeneratorConfig{}, ocfg);
  Rng policy_rng(7);
  ActorCritic policy(ocfg.observation_dim(), PolicyHead::Beta, policy_rng, 16, 3);
  Rng rng(8);
  const EpisodeRecord rec = rollout_episode(policy, env, rng);
  CHECK(rec.attempts.size() >= 1);
  CHECK(rec.attempts.size() <= 2 * 5);
  // Serialized record replays through the scene document layer.
  const nlohmann::json doc = serialize_scene(rec.spec, rec.placements);
  auto [spec2, placements2] = deserialize_scene(doc);
  CHECK(placements2.size() == rec.placements.size());
}
