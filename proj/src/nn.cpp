#include "scenegen/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace scenegen {

Mlp::Mlp(const std::vector<int>& sizes, Rng& rng, double output_scale)
    : sizes_(sizes) {
  if (sizes.size() < 2) throw std::invalid_argument("Mlp needs >= 2 layer sizes");
  layers_.resize(sizes.size() - 1);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const int in = sizes[i];
    const int out = sizes[i + 1];
    const bool last = i + 1 == layers_.size();
    const double limit =
        std::sqrt(6.0 / (in + out)) * (last ? output_scale : 1.0);
    Layer& l = layers_[i];
    l.w.resize(out, in);
    for (int r = 0; r < out; ++r) {
      for (int c = 0; c < in; ++c) l.w(r, c) = rng.uniform(-limit, limit);
    }
    l.b = VectorXd::Zero(out);
    l.gw = MatrixXd::Zero(out, in);
    l.gb = VectorXd::Zero(out);
  }
}

MatrixXd Mlp::forward(const MatrixXd& x) const {
  Cache cache;
  return forward(x, cache);
}

MatrixXd Mlp::forward(const MatrixXd& x, Cache& cache) const {
  if (x.cols() != sizes_.front()) {
    throw std::invalid_argument("Mlp::forward: input width mismatch");
  }
  cache.acts.clear();
  cache.acts.reserve(layers_.size() + 1);
  cache.acts.push_back(x);
  MatrixXd h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = (h * layers_[i].w.transpose()).rowwise() + layers_[i].b.transpose();
    if (i + 1 < layers_.size()) h = h.array().tanh();
    cache.acts.push_back(h);
  }
  return h;
}

VectorXd Mlp::forward_one(const VectorXd& x) const {
  MatrixXd row = x.transpose();
  return forward(row).row(0).transpose();
}

MatrixXd Mlp::backward(const Cache& cache, const MatrixXd& dy) {
  if (cache.acts.size() != layers_.size() + 1) {
    throw std::logic_error("Mlp::backward called without a matching forward");
  }
  MatrixXd grad = dy;
  for (int i = static_cast<int>(layers_.size()) - 1; i >= 0; --i) {
    Layer& l = layers_[i];
    if (static_cast<std::size_t>(i + 1) < layers_.size()) {
      // Through tanh: cache.acts[i+1] holds the post-activation output.
      grad = grad.array() * (1.0 - cache.acts[i + 1].array().square());
    }
    l.gw.noalias() += grad.transpose() * cache.acts[i];
    l.gb.noalias() += grad.colwise().sum().transpose();
    if (i > 0) grad = grad * l.w;
  }
  return grad * layers_[0].w;
}

void Mlp::zero_grad() {
  for (Layer& l : layers_) {
    l.gw.setZero();
    l.gb.setZero();
  }
}

long Mlp::parameter_count() const {
  long n = 0;
  for (const Layer& l : layers_) n += l.w.size() + l.b.size();
  return n;
}

VectorXd Mlp::parameters_flat() const {
  VectorXd p(parameter_count());
  long at = 0;
  for (const Layer& l : layers_) {
    p.segment(at, l.w.size()) = Eigen::Map<const VectorXd>(l.w.data(), l.w.size());
    at += l.w.size();
    p.segment(at, l.b.size()) = l.b;
    at += l.b.size();
  }
  return p;
}

void Mlp::set_parameters_flat(const VectorXd& p) {
  if (p.size() != parameter_count()) {
    throw std::invalid_argument("set_parameters_flat: size mismatch");
  }
  long at = 0;
  for (Layer& l : layers_) {
    Eigen::Map<VectorXd>(l.w.data(), l.w.size()) = p.segment(at, l.w.size());
    at += l.w.size();
    l.b = p.segment(at, l.b.size());
    at += l.b.size();
  }
}

VectorXd Mlp::gradients_flat() const {
  VectorXd g(parameter_count());
  long at = 0;
  for (const Layer& l : layers_) {
    g.segment(at, l.gw.size()) = Eigen::Map<const VectorXd>(l.gw.data(), l.gw.size());
    at += l.gw.size();
    g.segment(at, l.gb.size()) = l.gb;
    at += l.gb.size();
  }
  return g;
}

void adam_step(VectorXd& params, const VectorXd& grads, AdamState& state,
               const AdamConfig& cfg) {
  if (state.m.size() != params.size()) state.init(params.size());
  ++state.t;
  state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grads;
  state.v = cfg.beta2 * state.v.array().matrix() +
            (1.0 - cfg.beta2) * grads.array().square().matrix();
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  params.array() -= cfg.lr * (state.m.array() / bc1) /
                    ((state.v.array() / bc2).sqrt() + cfg.eps);
}

double clip_global_norm(std::vector<Mlp*> nets, double max_norm) {
  double sq = 0.0;
  for (Mlp* n : nets) sq += n->gradients_flat().squaredNorm();
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double scale = max_norm / norm;
    for (Mlp* n : nets) {
      for (auto& l : n->layers()) {
        l.gw *= scale;
        l.gb *= scale;
      }
    }
  }
  return norm;
}

void adam_step(Mlp& net, AdamState& state, const AdamConfig& cfg) {
  VectorXd params = net.parameters_flat();
  adam_step(params, net.gradients_flat(), state, cfg);
  net.set_parameters_flat(params);
}

}  // namespace scenegen
