#pragma once

#include <string>

#include <json.hpp>

#include "scenegen/distributions.hpp"
#include "scenegen/nn.hpp"

namespace scenegen {

enum class PolicyHead { Beta, TruncNormal };

PolicyHead policy_head_from_string(const std::string& name);
const char* to_string(PolicyHead head);

using Vec4 = Eigen::Vector4d;
using Raw8 = Eigen::Matrix<double, 8, 1>;

// Per-dimension action distribution parameters. The Beta head maps raw
// outputs through 1 + softplus so alpha, beta > 1 (unimodal, interior
// mode); the truncated-normal head uses mu = tanh(raw), sigma =
// softplus(raw) + sigma_min.
struct PolicyOutput {
  PolicyHead head = PolicyHead::Beta;
  Vec4 alpha = Vec4::Ones();
  Vec4 beta = Vec4::Ones();
  Vec4 mu = Vec4::Zero();
  Vec4 sigma = Vec4::Ones();
};

struct ActionSample {
  Vec4 u = Vec4::Zero();  // raw Beta draws in (0,1); equals a for the normal head
  Vec4 a = Vec4::Zero();  // action in [-1,1]^4
  double log_prob = 0.0;  // action-space density (Jacobian-corrected)
};

inline constexpr double kTruncNormalSigmaMin = 1e-3;

// Separate actor and critic MLPs (tanh hidden, 5 linear layers of width
// 256 by default). Inference is const and safe to share across rollout
// workers.
class ActorCritic {
 public:
  ActorCritic() = default;
  ActorCritic(int obs_dim, PolicyHead head, Rng& rng, int hidden = 256,
              int n_layers = 5);

  PolicyHead head() const { return head_; }
  int obs_dim() const { return actor_.sizes().front(); }

  PolicyOutput head_from_raw(const Raw8& raw) const;
  PolicyOutput actor_forward(const VectorXd& obs) const;

  ActionSample sample_action(const VectorXd& obs, Rng& rng) const;
  ActionSample sample_from_output(const PolicyOutput& out, Rng& rng) const;
  // Per-dimension distribution mode, mapped to action space.
  Vec4 mode_action(const VectorXd& obs) const;

  double action_log_prob(const PolicyOutput& out, const ActionSample& s) const;
  double entropy(const PolicyOutput& out) const;

  double value(const VectorXd& obs) const;

  // d log_prob / d raw and d entropy / d raw for the training path.
  Raw8 log_prob_grad_raw(const PolicyOutput& out, const ActionSample& s) const;
  Raw8 entropy_grad_raw(const PolicyOutput& out) const;

  Mlp& actor() { return actor_; }
  const Mlp& actor() const { return actor_; }
  Mlp& critic() { return critic_; }
  const Mlp& critic() const { return critic_; }

 private:
  PolicyHead head_ = PolicyHead::Beta;
  Mlp actor_;
  Mlp critic_;
};

// Versioned checkpoint: layer sizes + parameters + Adam state (+ caller
// metadata). JSON doubles round-trip exactly, so save/load/save is
// byte-stable.
struct Checkpoint {
  ActorCritic policy;
  AdamState actor_adam;
  AdamState critic_adam;
  nlohmann::json meta;
};

nlohmann::json checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const nlohmann::json& doc);
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace scenegen
