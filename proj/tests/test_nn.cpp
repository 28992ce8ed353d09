#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "scenegen/nn.hpp"

using namespace scenegen;

namespace {

// Scalar loss L = sum_ij c_ij y_ij over the batch output.
double weighted_output(const Mlp& net, const MatrixXd& x, const MatrixXd& c) {
  return (net.forward(x).array() * c.array()).sum();
}

}  // namespace

TEST_CASE("zero weights pass biases through") {
  Rng rng(1);
  Mlp net({4, 3}, rng);
  VectorXd p = VectorXd::Zero(net.parameter_count());
  p.tail(3) = Eigen::Vector3d(0.5, -1.0, 2.0);
  net.set_parameters_flat(p);
  const VectorXd y = net.forward_one(VectorXd::Random(4));
  CHECK(y[0] == 0.5);
  CHECK(y[1] == -1.0);
  CHECK(y[2] == 2.0);
}

TEST_CASE("a single linear layer computes Wx + b") {
  Rng rng(2);
  Mlp net({3, 2}, rng);
  const VectorXd x = VectorXd::Random(3);
  const auto& layer = net.layers()[0];
  const VectorXd expected = layer.w * x + layer.b;
  const VectorXd y = net.forward_one(x);
  CHECK((y - expected).norm() < 1e-15);
}

TEST_CASE("shape mismatches are rejected") {
  Rng rng(3);
  Mlp net({3, 2}, rng);
  CHECK_THROWS(net.forward(MatrixXd::Zero(1, 4)));
  CHECK_THROWS(Mlp({5}, rng));
}

TEST_CASE("backward matches central finite differences") {
  Rng rng(4);
  for (int trial = 0; trial < 8; ++trial) {
    const int in = rng.uniform_int(2, 6);
    const int h1 = rng.uniform_int(3, 8);
    const int h2 = rng.uniform_int(3, 8);
    const int out = rng.uniform_int(1, 4);
    Mlp net({in, h1, h2, out}, rng);

    const int batch = rng.uniform_int(1, 5);
    MatrixXd x(batch, in), c(batch, out);
    for (int i = 0; i < batch; ++i) {
      for (int j = 0; j < in; ++j) x(i, j) = rng.uniform(-1.5, 1.5);
      for (int j = 0; j < out; ++j) c(i, j) = rng.uniform(-1.0, 1.0);
    }

    net.zero_grad();
    Mlp::Cache cache;
    net.forward(x, cache);
    const MatrixXd dx = net.backward(cache, c);
    const VectorXd analytic = net.gradients_flat();

    const double h = 1e-5;
    VectorXd params = net.parameters_flat();
    for (int k = 0; k < params.size(); k += std::max<long>(1, params.size() / 60)) {
      VectorXd pp = params, pm = params;
      pp[k] += h;
      pm[k] -= h;
      net.set_parameters_flat(pp);
      const double fp = weighted_output(net, x, c);
      net.set_parameters_flat(pm);
      const double fm = weighted_output(net, x, c);
      net.set_parameters_flat(params);
      const double fd = (fp - fm) / (2.0 * h);
      const double denom = std::max({std::abs(fd), std::abs(analytic[k]), 1e-8});
      CHECK(std::abs(analytic[k] - fd) / denom < 1e-4);
    }

    // Input gradient against finite differences too.
    for (int i = 0; i < batch; ++i) {
      for (int j = 0; j < in; ++j) {
        MatrixXd xp = x, xm = x;
        xp(i, j) += h;
        xm(i, j) -= h;
        const double fd =
            (weighted_output(net, xp, c) - weighted_output(net, xm, c)) /
            (2.0 * h);
        const double denom = std::max({std::abs(fd), std::abs(dx(i, j)), 1e-8});
        CHECK(std::abs(dx(i, j) - fd) / denom < 1e-4);
      }
    }
  }
}

TEST_CASE("gradients accumulate across backward calls") {
  Rng rng(5);
  Mlp net({3, 4, 2}, rng);
  const MatrixXd x = MatrixXd::Random(2, 3);
  const MatrixXd dy = MatrixXd::Ones(2, 2);
  net.zero_grad();
  Mlp::Cache cache;
  net.forward(x, cache);
  net.backward(cache, dy);
  const VectorXd once = net.gradients_flat();
  net.forward(x, cache);
  net.backward(cache, dy);
  CHECK((net.gradients_flat() - 2.0 * once).norm() < 1e-12);
}

TEST_CASE("adam drives a quadratic to its minimum") {
  VectorXd x(1);
  x[0] = 4.0;
  AdamState state;
  state.init(1);
  const AdamConfig cfg{1e-2, 0.9, 0.999, 1e-8};
  for (int i = 0; i < 1000; ++i) {
    VectorXd g(1);
    g[0] = 2.0 * (x[0] - 3.0);
    adam_step(x, g, state, cfg);
  }
  CHECK(std::abs(x[0] - 3.0) < 1e-3);
}

TEST_CASE("global norm clipping scales exactly at the threshold") {
  Rng rng(6);
  Mlp net({2, 2}, rng);
  // ||g|| = 1: put 1.0 in a single gradient slot.
  net.zero_grad();
  net.layers()[0].gw(0, 0) = 1.0;
  const double norm = clip_global_norm({&net}, 0.5);
  CHECK(norm == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(net.layers()[0].gw(0, 0) == doctest::Approx(0.5).epsilon(1e-15));

  // ||g|| = 0.3: untouched, bit for bit.
  net.zero_grad();
  net.layers()[0].gw(0, 0) = 0.3;
  clip_global_norm({&net}, 0.5);
  CHECK(net.layers()[0].gw(0, 0) == 0.3);
}

TEST_CASE("parameter flatten round trip") {
  Rng rng(7);
  Mlp net({3, 5, 2}, rng);
  const VectorXd p = net.parameters_flat();
  Mlp net2({3, 5, 2}, rng);
  net2.set_parameters_flat(p);
  CHECK(net2.parameters_flat() == p);
  CHECK(net.parameter_count() == 3 * 5 + 5 + 5 * 2 + 2);
}
