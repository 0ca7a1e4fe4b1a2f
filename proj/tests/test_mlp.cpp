#include <cmath>

#include <gtest/gtest.h>

#include "gradcheck.hpp"
#include "starris/errors.hpp"
#include "starris/mlp.hpp"

using namespace starris;

TEST(Mlp, ZeroWeightsGiveZero) {
  const Mlp net({2, 5, 5, 1});
  EXPECT_EQ(net.forward(Eigen::Vector2d(0.3, 0.9))(0, 0), 0.0);
}

TEST(Mlp, MatchesHandMultiplication) {
  Mlp net({2, 2, 1});
  net.weights[0] << 0.5, -1.0, 0.25, 2.0;
  net.biases[0] << 0.1, -0.2;
  net.weights[1] << 1.5, -0.75;
  net.biases[1] << 0.05;
  const double x0 = 0.4, x1 = 0.7;
  const double h0 = std::tanh(0.5 * x0 - 1.0 * x1 + 0.1);
  const double h1 = std::tanh(0.25 * x0 + 2.0 * x1 - 0.2);
  const double expect = 1.5 * h0 - 0.75 * h1 + 0.05;
  EXPECT_NEAR(net.forward(Eigen::Vector2d(x0, x1))(0, 0), expect, 1e-15);
}

TEST(Mlp, FlattenAssignRoundTrip) {
  Mlp net({2, 4, 3, 2});
  Rng rng(1);
  net.init(rng);
  Mlp other({2, 4, 3, 2});
  other.assign(net.flatten());
  EXPECT_TRUE(other == net);
  EXPECT_THROW(other.assign(Eigen::VectorXd::Zero(3)), ShapeError);
  EXPECT_EQ(net.num_params(), 2u * 4 + 4 + 4 * 3 + 3 + 3 * 2 + 2);
}

TEST(Mlp, InitIsSeeded) {
  Mlp a({2, 8, 8, 3}), b({2, 8, 8, 3});
  Rng r1(5), r2(5);
  a.init(r1, 0.01);
  b.init(r2, 0.01);
  EXPECT_TRUE(a == b);
  EXPECT_LE(a.weights.back().cwiseAbs().maxCoeff(), 0.01);
}

TEST(Mlp, BackwardMatchesFiniteDifferences) {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const int h1 = 2 + trial % 5, h2 = 3 + trial % 4, out = 1 + trial % 3;
    Mlp net({2, h1, h2, out});
    net.init(rng);
    for (auto& b : net.biases)
      for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = uniform(rng, -0.5, 0.5);
    Eigen::MatrixXd x(2, 4);
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = uniform(rng, 0, 1);
    Eigen::MatrixXd w(out, 4);
    for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = uniform(rng, -1, 1);
    Mlp::Tape tape;
    net.forward(x, tape);
    const Eigen::VectorXd g = net.backward(tape, w);
    Mlp probe = net;
    const auto f = [&](const Eigen::VectorXd& p) {
      probe.assign(p);
      return (probe.forward(x).array() * w.array()).sum();
    };
    EXPECT_LT(starris::testing::max_relative_error(g, f, net.flatten()), 1e-4);
  }
}

TEST(AdaptiveStep, PlainStep) {
  AdaptiveStep s(2, StepRule::kPlain);
  Eigen::VectorXd p(2), g(2);
  p << 1.0, 2.0;
  g << 0.5, -1.0;
  s.apply(p, g, 0.1, -1.0);
  EXPECT_DOUBLE_EQ(p[0], 0.95);
  EXPECT_DOUBLE_EQ(p[1], 2.1);
}

TEST(AdaptiveStep, RmsPropFirstStepIsSignTimesRate) {
  AdaptiveStep s(3, StepRule::kRmsProp);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(3), g(3);
  g << 4.0, -0.001, 0.0;
  s.apply(p, g, 0.01, +1.0);
  EXPECT_NEAR(p[0], 0.01, 1e-9);
  EXPECT_NEAR(p[1], -0.01, 1e-6);
  EXPECT_EQ(p[2], 0.0);
  EXPECT_EQ(s.steps(), 1);
}

TEST(AdaptiveStep, ZeroGradientLeavesParameters) {
  AdaptiveStep s(4, StepRule::kRmsProp);
  Eigen::VectorXd p = Eigen::VectorXd::LinSpaced(4, -1, 1);
  const Eigen::VectorXd before = p;
  s.apply(p, Eigen::VectorXd::Zero(4), 0.1, -1.0);
  EXPECT_EQ(p, before);
}
