#include "scenegen/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace scenegen {

std::pair<std::vector<double>, std::vector<double>> compute_gae(
    const std::vector<double>& rewards, const std::vector<double>& values,
    const std::vector<std::uint8_t>& dones, double bootstrap_value,
    double gamma, double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n) {
    throw std::invalid_argument("compute_gae: array length mismatch");
  }
  std::vector<double> advantages(n), returns(n);
  double carry = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    const double not_done = dones[k] ? 0.0 : 1.0;
    const double next_value = (k + 1 < n) ? values[k + 1] : bootstrap_value;
    const double delta = rewards[k] + gamma * next_value * not_done - values[k];
    carry = delta + gamma * lambda * not_done * carry;
    advantages[k] = carry;
    returns[k] = carry + values[k];
  }
  return {std::move(advantages), std::move(returns)};
}

LossReport ppo_update(const RolloutBuffer& buffer, ActorCritic& policy,
                      AdamState& actor_adam, AdamState& critic_adam,
                      const TrainerConfig& cfg, Rng& rng) {
  const int n = static_cast<int>(buffer.size());
  if (n == 0) throw std::invalid_argument("ppo_update: empty buffer");
  if (buffer.advantages.size() != buffer.size() ||
      buffer.returns.size() != buffer.size()) {
    throw std::invalid_argument("ppo_update: advantages not computed");
  }

  std::vector<double> adv = buffer.advantages;
  if (cfg.normalize_advantages && n > 1) {
    double mean = 0.0;
    for (double a : adv) mean += a;
    mean /= n;
    double var = 0.0;
    for (double a : adv) var += (a - mean) * (a - mean);
    const double stdev = std::sqrt(var / n);
    for (double& a : adv) a = (a - mean) / (stdev + 1e-8);
  }

  const int obs_dim = policy.obs_dim();
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;

  const int mb_count = std::max(1, cfg.minibatches);
  LossReport report;
  double sum_policy = 0.0, sum_value = 0.0, sum_entropy = 0.0;
  double sum_clipfrac = 0.0, sum_kl = 0.0, sum_total = 0.0, sum_gnorm = 0.0;
  int mb_total = 0;
  bool first_minibatch = true;

  const AdamConfig adam_cfg{cfg.lr, 0.9, 0.999, 1e-8};

  for (int epoch = 0; epoch < cfg.update_epochs; ++epoch) {
    // Fisher-Yates with the trainer rng keeps runs reproducible.
    for (int i = n - 1; i > 0; --i) {
      std::swap(order[i], order[rng.uniform_int(0, i)]);
    }
    for (int mb = 0; mb < mb_count; ++mb) {
      const int lo = static_cast<int>(static_cast<long>(mb) * n / mb_count);
      const int hi = static_cast<int>(static_cast<long>(mb + 1) * n / mb_count);
      const int m = hi - lo;
      if (m == 0) continue;

      MatrixXd x(m, obs_dim);
      for (int r = 0; r < m; ++r) {
        x.row(r) = buffer.transitions[order[lo + r]].observation.transpose();
      }

      Mlp::Cache actor_cache, critic_cache;
      const MatrixXd raw = policy.actor().forward(x, actor_cache);
      const MatrixXd value_out = policy.critic().forward(x, critic_cache);

      MatrixXd d_raw = MatrixXd::Zero(m, 8);
      MatrixXd d_value = MatrixXd::Zero(m, 1);
      double mb_policy = 0.0, mb_value = 0.0, mb_entropy = 0.0;
      double mb_clip = 0.0, mb_kl = 0.0;

      for (int r = 0; r < m; ++r) {
        const Transition& tr = buffer.transitions[order[lo + r]];
        const double a_hat = adv[order[lo + r]];
        const PolicyOutput out = policy.head_from_raw(raw.row(r).transpose());
        ActionSample sample;
        sample.u = tr.u;
        sample.a = tr.action;
        const double logp_new = policy.action_log_prob(out, sample);
        const double log_ratio = logp_new - tr.log_prob;
        const double ratio = std::exp(log_ratio);

        const double unclipped = ratio * a_hat;
        const double clipped =
            std::clamp(ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps) * a_hat;
        const double surrogate = std::min(unclipped, clipped);
        mb_policy -= surrogate;
        // Gradient flows only when the unclipped branch is active.
        const bool pass_through = unclipped <= clipped;
        if (pass_through) {
          d_raw.row(r) -=
              (ratio * a_hat / m) *
              policy.log_prob_grad_raw(out, sample).transpose();
        }

        const double ent = policy.entropy(out);
        mb_entropy += ent;
        d_raw.row(r) -=
            (cfg.entropy_coef / m) * policy.entropy_grad_raw(out).transpose();

        const double v = value_out(r, 0);
        const double verr = v - buffer.returns[order[lo + r]];
        mb_value += verr * verr;
        d_value(r, 0) = cfg.vf_coef * 2.0 * verr / m;

        mb_clip += std::abs(ratio - 1.0) > cfg.clip_eps ? 1.0 : 0.0;
        mb_kl += (ratio - 1.0) - log_ratio;
      }
      mb_policy /= m;
      mb_value /= m;
      mb_entropy /= m;
      mb_clip /= m;
      mb_kl /= m;
      const double mb_total_loss =
          mb_policy + cfg.vf_coef * mb_value - cfg.entropy_coef * mb_entropy;
      if (!std::isfinite(mb_total_loss)) {
        throw std::runtime_error(
            "ppo_update: non-finite loss (policy=" + std::to_string(mb_policy) +
            " value=" + std::to_string(mb_value) +
            " entropy=" + std::to_string(mb_entropy) + ")");
      }

      policy.actor().zero_grad();
      policy.critic().zero_grad();
      policy.actor().backward(actor_cache, d_raw);
      policy.critic().backward(critic_cache, d_value);
      const double gnorm =
          clip_global_norm({&policy.actor(), &policy.critic()}, cfg.grad_clip);
      adam_step(policy.actor(), actor_adam, adam_cfg);
      adam_step(policy.critic(), critic_adam, adam_cfg);

      if (first_minibatch) {
        report.first_minibatch_clip_fraction = mb_clip;
        report.first_minibatch_kl = mb_kl;
        first_minibatch = false;
      }
      sum_policy += mb_policy;
      sum_value += mb_value;
      sum_entropy += mb_entropy;
      sum_clipfrac += mb_clip;
      sum_kl += mb_kl;
      sum_total += mb_total_loss;
      sum_gnorm += gnorm;
      ++mb_total;
    }
  }

  report.policy_loss = sum_policy / mb_total;
  report.value_loss = sum_value / mb_total;
  report.entropy = sum_entropy / mb_total;
  report.clip_fraction = sum_clipfrac / mb_total;
  report.approx_kl = sum_kl / mb_total;
  report.total_loss = sum_total / mb_total;
  report.grad_norm = sum_gnorm / mb_total;
  return report;
}

namespace {

struct WorkerState {
  std::unique_ptr<GeneratorEnv> env;
  Rng rng;
  Eigen::VectorXd obs;
  int episode_counter = 0;

  WorkerState(std::unique_ptr<GeneratorEnv> e, Rng r)
      : env(std::move(e)), rng(r) {
    obs = env->reset(rng);
  }
};

struct WorkerSlice {
  std::vector<Transition> transitions;
  double bootstrap_value = 0.0;
  int episodes = 0;
  int successes = 0;
};

void collect_worker(WorkerState& ws, const ActorCritic& policy, int steps,
                    WorkerSlice& out) {
  out.transitions.clear();
  out.transitions.reserve(steps);
  out.episodes = 0;
  out.successes = 0;
  for (int s = 0; s < steps; ++s) {
    Transition tr;
    tr.observation = ws.obs;
    const ActionSample sample = policy.sample_action(ws.obs, ws.rng);
    tr.action = sample.a;
    tr.u = sample.u;
    tr.log_prob = sample.log_prob;
    tr.value = policy.value(ws.obs);
    tr.episode = ws.episode_counter;
    tr.object_index = ws.env->object_index();

    const StepResult step = ws.env->step(sample.a);
    tr.reward = step.reward;
    tr.done = step.flags.episode_done;
    ws.obs = step.observation;
    if (step.flags.episode_done) {
      out.episodes += 1;
      out.successes += step.flags.episode_success ? 1 : 0;
      ws.episode_counter += 1;
      ws.obs = ws.env->reset(ws.rng);
    }
    out.transitions.push_back(std::move(tr));
  }
  out.bootstrap_value = policy.value(ws.obs);
}

}  // namespace

TrainResult train(const EnvFactory& make_env, const TrainerConfig& cfg,
                  PolicyHead head, std::uint64_t seed,
                  const TrainCallback& on_update) {
  Rng master(seed);
  const int jobs = std::max(1, cfg.jobs);

  std::vector<std::unique_ptr<WorkerState>> workers;
  workers.reserve(jobs);
  for (int w = 0; w < jobs; ++w) {
    workers.push_back(
        std::make_unique<WorkerState>(make_env(w), master.fork(1000 + w)));
  }

  const int obs_dim = workers[0]->env->observation_config().observation_dim();
  Rng init_rng = master.fork(1);
  TrainResult result;
  result.policy = ActorCritic(obs_dim, head, init_rng);
  result.actor_adam.init(result.policy.actor().parameter_count());
  result.critic_adam.init(result.policy.critic().parameter_count());
  Rng update_rng = master.fork(2);

  long global_step = 0;
  int update = 0;
  while (global_step < cfg.total_steps) {
    std::vector<WorkerSlice> slices(jobs);
    const int base = cfg.batch / jobs;
    const int extra = cfg.batch % jobs;
    if (jobs == 1) {
      collect_worker(*workers[0], result.policy, cfg.batch, slices[0]);
    } else {
      std::vector<std::thread> threads;
      threads.reserve(jobs);
      for (int w = 0; w < jobs; ++w) {
        const int steps = base + (w < extra ? 1 : 0);
        threads.emplace_back([&, w, steps] {
          collect_worker(*workers[w], result.policy, steps, slices[w]);
        });
      }
      for (auto& t : threads) t.join();
    }

    RolloutBuffer buffer;
    buffer.transitions.reserve(cfg.batch);
    int episodes = 0, successes = 0;
    double reward_sum = 0.0;
    for (int w = 0; w < jobs; ++w) {
      WorkerSlice& slice = slices[w];
      std::vector<double> rewards, values;
      std::vector<std::uint8_t> dones;
      rewards.reserve(slice.transitions.size());
      for (const Transition& tr : slice.transitions) {
        rewards.push_back(tr.reward);
        values.push_back(tr.value);
        dones.push_back(tr.done ? 1 : 0);
        reward_sum += tr.reward;
      }
      auto [adv, ret] = compute_gae(rewards, values, dones,
                                    slice.bootstrap_value, cfg.gamma,
                                    cfg.gae_lambda);
      for (std::size_t i = 0; i < slice.transitions.size(); ++i) {
        buffer.transitions.push_back(std::move(slice.transitions[i]));
        buffer.advantages.push_back(adv[i]);
        buffer.returns.push_back(ret[i]);
      }
      episodes += slice.episodes;
      successes += slice.successes;
    }

    const LossReport losses = ppo_update(buffer, result.policy,
                                         result.actor_adam, result.critic_adam,
                                         cfg, update_rng);
    global_step += static_cast<long>(buffer.size());
    update += 1;

    CurveRow row;
    row.step = global_step;
    row.update = update;
    row.success_rate =
        episodes > 0 ? static_cast<double>(successes) / episodes : -1.0;
    row.mean_reward = reward_sum / static_cast<double>(buffer.size());
    row.policy_loss = losses.policy_loss;
    row.value_loss = losses.value_loss;
    row.entropy = losses.entropy;
    row.clip_fraction = losses.clip_fraction;
    row.approx_kl = losses.approx_kl;
    result.curve.push_back(row);
    if (on_update) {
      on_update(row, result.policy, result.actor_adam, result.critic_adam);
    }
  }
  return result;
}

}  // namespace scenegen
