#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "scenegen/env.hpp"
#include "scenegen/policy.hpp"

namespace scenegen {

struct Transition {
  Eigen::VectorXd observation;
  Vec4 action = Vec4::Zero();
  Vec4 u = Vec4::Zero();  // raw (0,1) Beta draws backing the action
  double log_prob = 0.0;
  double reward = 0.0;
  double value = 0.0;
  bool done = false;
  int episode = 0;
  int object_index = 0;
};

struct TrainerConfig {
  double lr = 1e-4;
  int batch = 1000;  // environment decisions per update
  int update_epochs = 5;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_eps = 0.2;
  double vf_coef = 0.5;       // c1
  double entropy_coef = 0.01; // c2
  double grad_clip = 0.5;
  long total_steps = 2500000;
  int minibatches = 4;
  bool normalize_advantages = true;
  int jobs = 1;
};

struct RolloutBuffer {
  std::vector<Transition> transitions;
  std::vector<double> advantages;
  std::vector<double> returns;

  std::size_t size() const { return transitions.size(); }
};

// delta_t = r_t + gamma V_{t+1} (1 - done_t) - V_t
// A_t     = delta_t + gamma lambda (1 - done_t) A_{t+1}
// R_t     = A_t + V_t
std::pair<std::vector<double>, std::vector<double>> compute_gae(
    const std::vector<double>& rewards, const std::vector<double>& values,
    const std::vector<std::uint8_t>& dones, double bootstrap_value,
    double gamma, double lambda);

struct LossReport {
  double policy_loss = 0.0;  // -L_CLIP
  double value_loss = 0.0;   // L_VF
  double entropy = 0.0;      // L_H
  double total_loss = 0.0;   // c1 L_VF - c2 L_H - L_CLIP
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
  double grad_norm = 0.0;
  double first_minibatch_clip_fraction = 0.0;
  double first_minibatch_kl = 0.0;
};

// One PPO update: update_epochs passes of shuffled minibatches over the
// buffer, clipped-surrogate + value + entropy loss, global-norm clipped
// gradients, Adam. Throws on non-finite losses.
LossReport ppo_update(const RolloutBuffer& buffer, ActorCritic& policy,
                      AdamState& actor_adam, AdamState& critic_adam,
                      const TrainerConfig& cfg, Rng& rng);

struct CurveRow {
  long step = 0;
  int update = 0;
  double success_rate = 0.0;  // episodes finished during the collection window
  double mean_reward = 0.0;   // mean per-step reward
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
};

using EnvFactory = std::function<std::unique_ptr<GeneratorEnv>(int worker)>;
using TrainCallback = std::function<void(const CurveRow&, const ActorCritic&,
                                         const AdamState&, const AdamState&)>;

struct TrainResult {
  ActorCritic policy;
  AdamState actor_adam;
  AdamState critic_adam;
  std::vector<CurveRow> curve;
};

// Alternates rollout collection (cfg.jobs parallel envs, deterministically
// interleaved by worker index) and ppo_update until total_steps decisions.
TrainResult train(const EnvFactory& make_env, const TrainerConfig& cfg,
                  PolicyHead head, std::uint64_t seed,
                  const TrainCallback& on_update = {});

}  // namespace scenegen
