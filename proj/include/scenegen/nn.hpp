#pragma once

#include <Eigen/Dense>
#include <vector>

#include "scenegen/rng.hpp"

namespace scenegen {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Fully connected net with tanh hidden activations and a linear output
// layer. Reverse-mode gradients are exact for this fixed graph; rows of
// the input matrix are independent samples.
class Mlp {
 public:
  struct Layer {
    MatrixXd w;   // [out x in]
    VectorXd b;   // [out]
    MatrixXd gw;  // accumulated gradients
    VectorXd gb;
  };

  struct Cache {
    std::vector<MatrixXd> acts;  // acts[0] = input, acts[i] = layer i output
  };

  Mlp() = default;
  // sizes = {input, hidden..., output}. output_scale shrinks the final
  // layer's init (small initial policy logits).
  Mlp(const std::vector<int>& sizes, Rng& rng, double output_scale = 1.0);

  MatrixXd forward(const MatrixXd& x) const;
  MatrixXd forward(const MatrixXd& x, Cache& cache) const;
  VectorXd forward_one(const VectorXd& x) const;

  // Backpropagates dL/dy, accumulating parameter gradients; returns dL/dx.
  MatrixXd backward(const Cache& cache, const MatrixXd& dy);

  void zero_grad();

  const std::vector<int>& sizes() const { return sizes_; }
  std::vector<Layer>& layers() { return layers_; }
  const std::vector<Layer>& layers() const { return layers_; }

  long parameter_count() const;
  VectorXd parameters_flat() const;
  void set_parameters_flat(const VectorXd& p);
  VectorXd gradients_flat() const;

 private:
  std::vector<int> sizes_;
  std::vector<Layer> layers_;
};

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// First/second-moment state over a flat parameter vector.
struct AdamState {
  VectorXd m;
  VectorXd v;
  long t = 0;

  void init(long n) {
    m = VectorXd::Zero(n);
    v = VectorXd::Zero(n);
    t = 0;
  }
};

// One bias-corrected Adam update on params given grads.
void adam_step(VectorXd& params, const VectorXd& grads, AdamState& state,
               const AdamConfig& cfg);

// Scales all nets' gradients so the joint L2 norm is at most max_norm;
// returns the pre-clip norm.
double clip_global_norm(std::vector<Mlp*> nets, double max_norm);

// Applies one Adam step to the net's own parameters from its accumulated
// gradients.
void adam_step(Mlp& net, AdamState& state, const AdamConfig& cfg);

}  // namespace scenegen
