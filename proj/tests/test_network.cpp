// Copyright 2026 The mcl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "mcl.hpp"
#include "test_util.hpp"

namespace mcl {
namespace {

TEST(InitNetwork, ShapesFollowSpecs) {
  Network net = init_network({LayerSpec::dense(4, 3), LayerSpec::dense(3, 2)}, 7);
  ASSERT_EQ(net.params.size(), 2u);
  EXPECT_EQ(net.params[0].weight.shape(), (Shape{3, 4}));
  EXPECT_EQ(net.params[1].weight.shape(), (Shape{2, 3}));
  EXPECT_EQ(net.params[0].bias.shape(), (Shape{3}));
  EXPECT_EQ(net.params[1].bias.shape(), (Shape{2}));
  EXPECT_EQ(net.num_outputs, 2u);
  EXPECT_FALSE(net.masks.has_value());
}

TEST(InitNetwork, MismatchNamesLayerPair) {
  try {
    init_network({LayerSpec::dense(4, 3), LayerSpec::dense(5, 2)}, 7);
    FAIL() << "expected a shape error";
  } catch (const ShapeError& e) {
    EXPECT_STREQ(e.what(), "layer 1 output 3 != layer 2 input 5");
  }
}

TEST(InitNetwork, DeterministicPerSeed) {
  const std::vector<LayerSpec> specs{LayerSpec::dense(4, 3), LayerSpec::relu(),
                                     LayerSpec::dense(3, 2)};
  Network a = init_network(specs, 7);
  Network b = init_network(specs, 7);
  Network c = init_network(specs, 8);
  for (std::size_t l = 0; l < a.size(); ++l) {
    EXPECT_TRUE(bitwise_equal(a.params[l].weight, b.params[l].weight));
  }
  EXPECT_FALSE(a.params[0].weight == c.params[0].weight);
}

TEST(InitNetwork, WeightsWithinFanBound) {
  Network net = init_network({LayerSpec::dense(30, 20), LayerSpec::dense(20, 5)}, 1);
  const double b0 = std::sqrt(6.0 / 50.0), b1 = std::sqrt(6.0 / 25.0);
  for (double w : net.params[0].weight.values()) EXPECT_LE(std::abs(w), b0);
  for (double w : net.params[1].weight.values()) EXPECT_LE(std::abs(w), b1);
  for (double b : net.params[0].bias.values()) EXPECT_EQ(b, 0.0);
}

TEST(InitNetwork, ConvNeedsInputShape) {
  EXPECT_THROW(init_network({LayerSpec::conv2d(1, 2, 3, 3), LayerSpec::flatten()}, 1),
               ShapeError);
  Network net = init_network(
      {LayerSpec::conv2d(1, 2, 3, 3, 1, 1), LayerSpec::relu(), LayerSpec::maxpool2d(2, 2),
       LayerSpec::flatten(), LayerSpec::dense(32, 3)},
      1, {1, 8, 8});
  EXPECT_EQ(net.output_shapes[0], (Shape{2, 8, 8}));
  EXPECT_EQ(net.output_shapes[2], (Shape{2, 4, 4}));
  EXPECT_EQ(net.num_outputs, 3u);
}

Network identity_net() {
  Network net = init_network({LayerSpec::dense(2, 2)}, 0);
  net.params[0].weight = Tensor({2, 2}, {1, 0, 0, 1});
  return net;
}

TEST(Forward, IdentityWeights) {
  Network net = identity_net();
  Tensor y = forward(net, Tensor({1, 2}, {3, 4}));
  EXPECT_EQ(y, Tensor({1, 2}, {3, 4}));
}

TEST(Forward, FullyMaskedGivesZero) {
  Network net = apply_mask(identity_net(), uniform_masks(identity_net(), 0.0));
  Tensor y = forward(net, Tensor({1, 2}, {3, 4}));
  EXPECT_EQ(y, Tensor({1, 2}, {0, 0}));
}

TEST(Forward, TwoLayerHandComputed) {
  Network net = init_network({LayerSpec::dense(2, 3), LayerSpec::relu(), LayerSpec::dense(3, 2)}, 0);
  net.params[0].weight = Tensor({3, 2}, {1, 2, -3, 1, 0.5, -0.5});
  net.params[0].bias = Tensor({3}, {0.1, 0.2, -0.3});
  net.params[2].weight = Tensor({2, 3}, {1, -1, 2, 0.5, 0.25, -1});
  net.params[2].bias = Tensor({2}, {0.0, 1.0});
  // Hidden pre-activations on [1,1]: [3.1, -1.8, -0.3] -> ReLU [3.1, 0, 0].
  // Outputs: [3.1, 0.5 * 3.1 + 1] = [3.1, 2.55].
  Tensor y = forward(net, Tensor({1, 2}, {1, 1}));
  EXPECT_NEAR(y[0], 3.1, 1e-12);
  EXPECT_NEAR(y[1], 2.55, 1e-12);
}

TEST(Forward, MatchesNaiveOracleOnRandomDenseNets) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    Network net = testing::random_dense_net(rng);
    Tensor batch = testing::random_batch(rng, net, 4);
    Tensor y = forward(net, batch);
    for (std::size_t r = 0; r < 4; ++r) {
      auto row = batch.row(r);
      auto expected = testing::naive_dense_forward(net, {row.begin(), row.end()});
      for (std::size_t j = 0; j < expected.size(); ++j) {
        EXPECT_NEAR(y.at(r, j), expected[j], 1e-12);
      }
    }
  }
}

TEST(Forward, DeterministicAndShapeConsistent) {
  Rng rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    Network net = trial % 2 ? testing::random_conv_net(rng) : testing::random_dense_net(rng);
    Tensor batch = testing::random_batch(rng, net, 3);
    ForwardTrace t = forward_trace(net, batch);
    for (std::size_t l = 0; l < net.size(); ++l) {
      Shape expected{3};
      expected.insert(expected.end(), net.output_shapes[l].begin(), net.output_shapes[l].end());
      EXPECT_EQ(t.activations[l + 1].shape(), expected);
    }
    EXPECT_TRUE(bitwise_equal(forward(net, batch), forward(net, batch)));
  }
}

TEST(Forward, RejectsWrongBatchShape) {
  Network net = identity_net();
  EXPECT_THROW(forward(net, Tensor({1, 3})), ShapeError);
  EXPECT_THROW(forward(net, Tensor({2})), ShapeError);
}

TEST(Forward, ConvMatchesHandComputation) {
  // 1x3x3 input, one 2x2 kernel, stride 1, no padding -> 1x2x2.
  Network net = init_network({LayerSpec::conv2d(1, 1, 2, 2), LayerSpec::flatten()}, 0, {1, 3, 3});
  net.params[0].weight = Tensor({1, 1, 2, 2}, {1, 2, 3, 4});
  net.params[0].bias = Tensor({1}, {0.5});
  Tensor x({1, 1, 3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9});
  Tensor y = forward(net, x);
  // [1*1+2*2+3*4+4*5, ...] + 0.5
  EXPECT_EQ(y, Tensor({1, 4}, {37.5, 47.5, 67.5, 77.5}));
}

TEST(Forward, PaddedStridedConvAndPool) {
  Network net = init_network({LayerSpec::conv2d(1, 1, 3, 3, 2, 1), LayerSpec::maxpool2d(2, 1),
                              LayerSpec::flatten()},
                             0, {1, 4, 4});
  net.params[0].weight = Tensor({1, 1, 3, 3}, 1.0);
  net.params[0].bias = Tensor({1}, 0.0);
  Tensor x({1, 1, 4, 4}, 1.0);
  // Padded 3x3 box sums at (0,0),(0,2),(2,0),(2,2): 4, 6, 6, 9; pool -> 9.
  Tensor conv = forward_trace(net, x).activations[1];
  EXPECT_EQ(conv, Tensor({1, 1, 2, 2}, {4, 6, 6, 9}));
  EXPECT_EQ(forward(net, x), Tensor({1, 1}, {9}));
}

TEST(Softmax, RowsSumToOneAndShiftInvariant) {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    Tensor logits({3, 5});
    for (double& v : logits.values()) v = rng.uniform(-30, 30);
    Tensor p = softmax(logits);
    Tensor shifted = logits;
    const double c = rng.uniform(-100, 100);
    for (double& v : shifted.values()) v += c;
    Tensor q = softmax(shifted);
    for (std::size_t r = 0; r < 3; ++r) {
      double s = 0.0;
      for (double v : p.row(r)) s += v;
      EXPECT_NEAR(s, 1.0, 1e-12);
    }
    for (std::size_t i = 0; i < p.size(); ++i) EXPECT_NEAR(p[i], q[i], 1e-9);
  }
}

TEST(Loss, UniformTargetsOnZeroLogitsIsLn2) {
  Network net = init_network({LayerSpec::dense(1, 2)}, 0);
  net.params[0].weight.fill(0.0);
  Tensor soft({1, 2}, {0.5, 0.5});
  auto lg = loss_and_gradients(net, Tensor({1, 1}, {1.0}), soft);
  EXPECT_NEAR(lg.loss, std::numbers::ln2, 1e-15);
}

TEST(Loss, PerfectSoftMatchIsStationary) {
  Rng rng(4);
  Network net = testing::random_dense_net(rng);
  Tensor batch = testing::random_batch(rng, net, 3);
  Tensor targets = softmax(forward(net, batch));
  auto lg = loss_and_gradients(net, batch, targets);
  double entropy = 0.0;
  for (double p : targets.values()) entropy -= p * std::log(p);
  EXPECT_NEAR(lg.loss, entropy / 3.0, 1e-12);
  const std::size_t last = net.size() - 1;
  for (double g : lg.grads[last].bias.values()) EXPECT_NEAR(g, 0.0, 1e-15);
}

TEST(Loss, HardLabelsMatchOneHotSoftTargets) {
  Rng rng(6);
  Network net = testing::random_dense_net(rng);
  Tensor batch = testing::random_batch(rng, net, 4);
  auto labels = testing::random_labels(rng, 4, net.num_outputs);
  Tensor onehot({4, net.num_outputs}, 0.0);
  for (std::size_t r = 0; r < 4; ++r) onehot.at(r, labels[r]) = 1.0;
  auto a = loss_and_gradients(net, batch, labels);
  auto b = loss_and_gradients(net, batch, onehot);
  EXPECT_EQ(a.loss, b.loss);
  EXPECT_EQ(a.grads, b.grads);
}

TEST(Loss, RejectsBadTargets) {
  Network net = identity_net();
  Tensor x({1, 2}, {1, 2});
  EXPECT_THROW(loss_and_gradients(net, x, std::vector<std::size_t>{2}), ConfigError);
  EXPECT_THROW(loss_and_gradients(net, x, Tensor({1, 2}, {0.7, 0.7})), ConfigError);
  EXPECT_THROW(loss_and_gradients(net, x, Tensor({1, 3}, {0.5, 0.25, 0.25})), ShapeError);
}

TEST(Loss, NonFiniteLossIsDivergence) {
  Network net = identity_net();
  net.params[0].weight[0] = std::numeric_limits<double>::infinity();
  try {
    loss_and_gradients(net, Tensor({1, 2}, {1, 1}), std::vector<std::size_t>{1}, 7);
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_EQ(e.batch(), 7u);
  }
}

TEST(Gradients, DenseMatchFiniteDifferences) {
  Rng rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    Network net = testing::random_dense_net(rng);
    Tensor batch = testing::random_batch(rng, net, 3);
    Targets targets = testing::random_labels(rng, 3, net.num_outputs);
    auto lg = loss_and_gradients(net, batch, targets);
    EXPECT_LT(testing::max_relative_error(lg.grads, testing::numerical_gradients(net, batch, targets)),
              1e-4);
  }
}

TEST(Gradients, ConvMatchFiniteDifferencesWithSoftTargets) {
  Rng rng(22);
  for (int trial = 0; trial < 6; ++trial) {
    Network net = testing::random_conv_net(rng);
    Tensor batch = testing::random_batch(rng, net, 2);
    Tensor logits({2, net.num_outputs});
    for (double& v : logits.values()) v = rng.uniform(-2, 2);
    Targets targets = softmax(logits);
    auto lg = loss_and_gradients(net, batch, targets);
    EXPECT_LT(testing::max_relative_error(lg.grads, testing::numerical_gradients(net, batch, targets)),
              1e-4);
  }
}

}  // namespace
}  // namespace mcl
