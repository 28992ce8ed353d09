#include "scenegen/policy.hpp"

#include <cmath>
#include <fstream>

#include "scenegen/special.hpp"

namespace scenegen {

namespace {
constexpr double kLn2 = 0.69314718055994530942;

// alpha = 1 + softplus(raw)  =>  d alpha / d raw = sigmoid(raw) = 1 - exp(1 - alpha)
double dsoftplus_from_value(double softplus_value) {
  return 1.0 - std::exp(-softplus_value);
}
}  // namespace

PolicyHead policy_head_from_string(const std::string& name) {
  if (name == "beta") return PolicyHead::Beta;
  if (name == "normal" || name == "trunc_normal") return PolicyHead::TruncNormal;
  throw std::invalid_argument("unknown policy head: " + name);
}

const char* to_string(PolicyHead head) {
  return head == PolicyHead::Beta ? "beta" : "normal";
}

ActorCritic::ActorCritic(int obs_dim, PolicyHead head, Rng& rng, int hidden,
                         int n_layers) : head_(head) {
  std::vector<int> actor_sizes{obs_dim};
  for (int i = 0; i < n_layers - 1; ++i) actor_sizes.push_back(hidden);
  std::vector<int> critic_sizes = actor_sizes;
  actor_sizes.push_back(8);
  critic_sizes.push_back(1);
  actor_ = Mlp(actor_sizes, rng, 0.01);
  critic_ = Mlp(critic_sizes, rng);
}

PolicyOutput ActorCritic::head_from_raw(const Raw8& raw) const {
  PolicyOutput out;
  out.head = head_;
  if (head_ == PolicyHead::Beta) {
    for (int i = 0; i < 4; ++i) {
      out.alpha[i] = 1.0 + sf::softplus(raw[i]);
      out.beta[i] = 1.0 + sf::softplus(raw[4 + i]);
    }
  } else {
    for (int i = 0; i < 4; ++i) {
      out.mu[i] = std::tanh(raw[i]);
      out.sigma[i] = sf::softplus(raw[4 + i]) + kTruncNormalSigmaMin;
    }
  }
  return out;
}

PolicyOutput ActorCritic::actor_forward(const VectorXd& obs) const {
  return head_from_raw(actor_.forward_one(obs));
}

ActionSample ActorCritic::sample_from_output(const PolicyOutput& out,
                                             Rng& rng) const {
  ActionSample s;
  if (head_ == PolicyHead::Beta) {
    for (int i = 0; i < 4; ++i) {
      s.u[i] = sample_beta(out.alpha[i], out.beta[i], rng);
      s.a[i] = 2.0 * s.u[i] - 1.0;
    }
  } else {
    for (int i = 0; i < 4; ++i) {
      s.a[i] = sample_trunc_normal(out.mu[i], out.sigma[i], rng);
      s.u[i] = s.a[i];
    }
  }
  s.log_prob = action_log_prob(out, s);
  return s;
}

ActionSample ActorCritic::sample_action(const VectorXd& obs, Rng& rng) const {
  return sample_from_output(actor_forward(obs), rng);
}

Vec4 ActorCritic::mode_action(const VectorXd& obs) const {
  const PolicyOutput out = actor_forward(obs);
  Vec4 a;
  if (head_ == PolicyHead::Beta) {
    for (int i = 0; i < 4; ++i) {
      const double mode =
          (out.alpha[i] - 1.0) / (out.alpha[i] + out.beta[i] - 2.0 + 1e-12);
      a[i] = 2.0 * mode - 1.0;
    }
  } else {
    for (int i = 0; i < 4; ++i) a[i] = std::clamp(out.mu[i], -1.0, 1.0);
  }
  return a;
}

double ActorCritic::action_log_prob(const PolicyOutput& out,
                                    const ActionSample& s) const {
  double lp = 0.0;
  if (head_ == PolicyHead::Beta) {
    for (int i = 0; i < 4; ++i) {
      lp += beta_log_prob(out.alpha[i], out.beta[i], s.u[i]);
    }
    lp -= 4.0 * kLn2;  // a = 2u - 1 change of variables
  } else {
    for (int i = 0; i < 4; ++i) {
      lp += trunc_normal_log_prob(out.mu[i], out.sigma[i], s.a[i]);
    }
  }
  return lp;
}

double ActorCritic::entropy(const PolicyOutput& out) const {
  double h = 0.0;
  if (head_ == PolicyHead::Beta) {
    for (int i = 0; i < 4; ++i) h += beta_entropy(out.alpha[i], out.beta[i]);
    h += 4.0 * kLn2;
  } else {
    for (int i = 0; i < 4; ++i) {
      h += trunc_normal_entropy(out.mu[i], out.sigma[i]);
    }
  }
  return h;
}

double ActorCritic::value(const VectorXd& obs) const {
  return critic_.forward_one(obs)[0];
}

Raw8 ActorCritic::log_prob_grad_raw(const PolicyOutput& out,
                                    const ActionSample& s) const {
  Raw8 g = Raw8::Zero();
  if (head_ == PolicyHead::Beta) {
    for (int i = 0; i < 4; ++i) {
      double da, db;
      beta_log_prob_grad(out.alpha[i], out.beta[i], s.u[i], da, db);
      g[i] = da * dsoftplus_from_value(out.alpha[i] - 1.0);
      g[4 + i] = db * dsoftplus_from_value(out.beta[i] - 1.0);
    }
  } else {
    for (int i = 0; i < 4; ++i) {
      double dmu, dsigma;
      trunc_normal_log_prob_grad(out.mu[i], out.sigma[i], s.a[i], -1.0, 1.0,
                                 dmu, dsigma);
      g[i] = dmu * (1.0 - out.mu[i] * out.mu[i]);
      g[4 + i] =
          dsigma * dsoftplus_from_value(out.sigma[i] - kTruncNormalSigmaMin);
    }
  }
  return g;
}

Raw8 ActorCritic::entropy_grad_raw(const PolicyOutput& out) const {
  Raw8 g = Raw8::Zero();
  if (head_ == PolicyHead::Beta) {
    for (int i = 0; i < 4; ++i) {
      double da, db;
      beta_entropy_grad(out.alpha[i], out.beta[i], da, db);
      g[i] = da * dsoftplus_from_value(out.alpha[i] - 1.0);
      g[4 + i] = db * dsoftplus_from_value(out.beta[i] - 1.0);
    }
  } else {
    for (int i = 0; i < 4; ++i) {
      double dmu, dsigma;
      trunc_normal_entropy_grad(out.mu[i], out.sigma[i], -1.0, 1.0, dmu, dsigma);
      g[i] = dmu * (1.0 - out.mu[i] * out.mu[i]);
      g[4 + i] =
          dsigma * dsoftplus_from_value(out.sigma[i] - kTruncNormalSigmaMin);
    }
  }
  return g;
}

namespace {

nlohmann::json mlp_to_json(const Mlp& net) {
  nlohmann::json j;
  j["sizes"] = net.sizes();
  const VectorXd p = net.parameters_flat();
  j["params"] = std::vector<double>(p.data(), p.data() + p.size());
  return j;
}

Mlp mlp_from_json(const nlohmann::json& j) {
  const auto sizes = j.at("sizes").get<std::vector<int>>();
  Rng dummy(0);
  Mlp net(sizes, dummy);
  const auto params = j.at("params").get<std::vector<double>>();
  net.set_parameters_flat(Eigen::Map<const VectorXd>(params.data(), params.size()));
  return net;
}

nlohmann::json adam_to_json(const AdamState& s) {
  nlohmann::json j;
  j["t"] = s.t;
  j["m"] = std::vector<double>(s.m.data(), s.m.data() + s.m.size());
  j["v"] = std::vector<double>(s.v.data(), s.v.data() + s.v.size());
  return j;
}

AdamState adam_from_json(const nlohmann::json& j) {
  AdamState s;
  s.t = j.at("t").get<long>();
  const auto m = j.at("m").get<std::vector<double>>();
  const auto v = j.at("v").get<std::vector<double>>();
  s.m = Eigen::Map<const VectorXd>(m.data(), m.size());
  s.v = Eigen::Map<const VectorXd>(v.data(), v.size());
  return s;
}

}  // namespace

nlohmann::json checkpoint_to_json(const Checkpoint& ckpt) {
  nlohmann::json doc;
  doc["version"] = 1;
  doc["head"] = to_string(ckpt.policy.head());
  doc["actor"] = mlp_to_json(ckpt.policy.actor());
  doc["critic"] = mlp_to_json(ckpt.policy.critic());
  doc["adam"] = {{"actor", adam_to_json(ckpt.actor_adam)},
                 {"critic", adam_to_json(ckpt.critic_adam)}};
  doc["meta"] = ckpt.meta;
  return doc;
}

Checkpoint checkpoint_from_json(const nlohmann::json& doc) {
  if (doc.at("version").get<int>() != 1) {
    throw std::runtime_error("unsupported checkpoint schema version");
  }
  Checkpoint ckpt;
  ActorCritic policy;
  Rng dummy(0);
  const PolicyHead head = policy_head_from_string(doc.at("head").get<std::string>());
  const Mlp actor = mlp_from_json(doc.at("actor"));
  const Mlp critic = mlp_from_json(doc.at("critic"));
  policy = ActorCritic(actor.sizes().front(), head, dummy,
                       actor.sizes().size() > 2 ? actor.sizes()[1] : 8,
                       static_cast<int>(actor.sizes().size()) - 1);
  policy.actor() = actor;
  policy.critic() = critic;
  ckpt.policy = policy;
  ckpt.actor_adam = adam_from_json(doc.at("adam").at("actor"));
  ckpt.critic_adam = adam_from_json(doc.at("adam").at("critic"));
  ckpt.meta = doc.value("meta", nlohmann::json::object());
  return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << checkpoint_to_json(ckpt).dump(2) << "\n";
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
  nlohmann::json doc;
  in >> doc;
  return checkpoint_from_json(doc);
}

}  // namespace scenegen
