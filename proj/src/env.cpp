#include "scenegen/env.hpp"

#include <cmath>

namespace scenegen {

GeneratorEnv::GeneratorEnv(SceneSpec spec, GeneratorConfig cfg,
                           ObservationConfig obs_cfg)
    : spec_(std::move(spec)),
      cfg_(cfg),
      obs_cfg_(obs_cfg),
      region_(spec_.region),
      // A buffer narrower than the attempt budget keeps only the most
      // recent attempts (short-memory ablation).
      history_(obs_cfg.history_slots, obs_cfg.traj_samples,
               obs_cfg.history_slots < cfg.max_attempts) {
  if (spec_.query_order.empty()) {
    throw std::invalid_argument("scene spec has an empty query order");
  }
  if (cfg_.max_attempts < 1) throw std::invalid_argument("max_attempts must be >= 1");
  if (cfg_.settle_steps <
      cfg_.thresholds.reach_window + cfg_.thresholds.hold_window) {
    throw std::invalid_argument("settle budget shorter than stability windows");
  }
}

Eigen::VectorXd GeneratorEnv::reset(Rng& rng, const RegionChange* change) {
  region_ = spec_.region;
  if (change != nullptr) {
    region_ = transform_region(spec_.region, *change, spec_.table, rng);
  } else if (!region_on_surface(region_, spec_.table)) {
    throw std::invalid_argument("queried region escapes the support surface");
  }
  world_ = World();
  world_.add_body(spec_.table.to_body());
  history_.clear();
  committed_.clear();
  placements_.clear();
  attempts_.clear();
  object_index_ = 1;
  attempt_index_ = 1;
  done_ = false;
  success_ = false;
  total_reward_ = 0.0;
  max_drift_ = 0.0;
  return observe();
}

const ObjectSpec& GeneratorEnv::current_object() const {
  const int idx = std::min(object_index_, num_objects()) - 1;
  return spec_.object(spec_.query_order[idx]);
}

Eigen::VectorXd GeneratorEnv::observe() const {
  const double placed_frac =
      static_cast<double>(object_index_ - 1) / num_objects();
  const double attempt_frac =
      static_cast<double>(attempt_index_ - 1) / cfg_.max_attempts;
  return assemble_observation(world_, region_, current_object(), history_,
                              placed_frac, attempt_frac, obs_cfg_);
}

double GeneratorEnv::lift_clear_of_overlap(RigidBody& body) const {
  const double start = body.state.position.z();
  double hi = start;
  for (int i = 0; i < 400; ++i) {
    hi += 0.005;
    body.state.position.z() = hi;
    if (!world_.check_overlap(body, cfg_.overlap_tolerance)) break;
  }
  double lo = start;
  while (hi - lo > 2.5e-4) {
    const double mid = 0.5 * (lo + hi);
    body.state.position.z() = mid;
    if (world_.check_overlap(body, cfg_.overlap_tolerance)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  body.state.position.z() = hi;
  return hi;
}

double GeneratorEnv::committed_drift() const {
  double drift = 0.0;
  for (const auto& [id, commit_pos] : committed_) {
    drift = std::max(drift, (world_.body(id).state.position - commit_pos).norm());
  }
  return drift;
}

StepResult GeneratorEnv::step(const Eigen::Vector4d& action) {
  if (done_) throw std::logic_error("step called on a finished episode");

  const ObjectSpec& obj = current_object();
  Pose pose = action_to_world_pose(region_, action, obj);
  pose.position.z() += cfg_.drop_epsilon;

  RigidBody body = obj.to_body();
  body.state.position = pose.position;
  body.state.orientation = yaw_quat(pose.yaw);

  StepResult result;
  result.overlap_rejected = world_.check_overlap(body, cfg_.overlap_tolerance);
  if (result.overlap_rejected) {
    // Colliding proposals still produce an informative trajectory: settle
    // from the lowest non-penetrating height, but the attempt cannot
    // succeed and pays the full-budget penalty.
    lift_clear_of_overlap(body);
  }

  const World snapshot = world_;
  const int id = world_.add_body(body);
  result.trajectory = world_.settle(
      id, cfg_.settle_steps, result.overlap_rejected ? nullptr : &cfg_.thresholds);
  const StabilityReport rep = check_stability(result.trajectory, cfg_.thresholds);
  const double drift = committed_drift();
  const bool drift_ok =
      !cfg_.enforce_committed_drift || drift <= cfg_.drift_tolerance;
  const bool success = rep.stable && !result.overlap_rejected && drift_ok;

  result.stable = success;
  result.stable_step = rep.stable_step;
  result.velocity_sum = rep.velocity_sum;
  result.acceleration_sum = rep.acceleration_sum;
  result.reward =
      placement_reward(cfg_.penalty_scale, cfg_.base_reward, object_index_,
                       success, rep.velocity_sum, rep.acceleration_sum);
  total_reward_ += result.reward;

  AttemptLog log;
  log.object_index = object_index_;
  log.object_id = obj.id;
  log.action = action;
  log.success = success;
  log.overlap_rejected = result.overlap_rejected;
  log.stable_step = success ? rep.stable_step : cfg_.settle_steps;
  attempts_.push_back(log);

  if (success) {
    const BodyState& settled = world_.body(id).state;
    PlacementRecord rec;
    rec.object_id = obj.id;
    rec.position = settled.position;
    rec.orientation = settled.orientation;
    rec.yaw = yaw_of(settled.orientation);
    rec.action = action;
    rec.attempts = attempt_index_;
    rec.stable_step = rep.stable_step;
    placements_.push_back(rec);
    committed_.emplace_back(id, settled.position);
    max_drift_ = std::max(max_drift_, drift);

    history_.clear();
    object_index_ += 1;
    attempt_index_ = 1;
    result.flags.object_done = true;
    if (object_index_ > num_objects()) {
      done_ = true;
      success_ = true;
    }
  } else {
    world_ = snapshot;  // failed attempts leave no trace in the scene
    history_.push(action, result.trajectory, region_);
    attempt_index_ += 1;
    result.flags.attempt_failed = true;
    if (attempt_index_ > cfg_.max_attempts) {
      done_ = true;
      success_ = false;
    }
  }

  result.flags.episode_done = done_;
  result.flags.episode_success = success_;
  result.observation = observe();
  return result;
}

EpisodeRecord GeneratorEnv::record() const {
  EpisodeRecord rec;
  rec.spec = spec_;
  rec.spec.region = region_;
  rec.placements = placements_;
  rec.attempts = attempts_;
  rec.success = success_;
  rec.total_reward = total_reward_;
  rec.max_committed_drift = max_drift_;
  return rec;
}

EpisodeRecord rollout_episode(const ActorCritic& policy, GeneratorEnv& env,
                              Rng& rng, bool mode_actions,
                              const RegionChange* change) {
  Eigen::VectorXd obs = env.reset(rng, change);
  while (!env.episode_done()) {
    Eigen::Vector4d action;
    if (mode_actions) {
      action = policy.mode_action(obs);
    } else {
      action = policy.sample_action(obs, rng).a;
    }
    obs = env.step(action).observation;
  }
  return env.record();
}

}  // namespace scenegen
