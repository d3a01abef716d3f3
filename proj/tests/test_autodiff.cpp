#include <gtest/gtest.h>

#include <array>
#include <memory>

#include "meshff/checkpoint.hpp"
#include "meshff/generators.hpp"
#include "meshff/model.hpp"
#include "meshff/optimizer.hpp"
#include "test_support.hpp"

namespace meshff::nn {
namespace {

using testing::gradient_errors;
using testing::random_matrix;

constexpr double kTol = 1e-6;

// Keeps ReLU inputs away from the kink so central differences stay exact.
Matrix away_from_zero(Matrix m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    if (std::abs(m.data()[i]) < 1e-2) m.data()[i] = 0.05;
  }
  return m;
}

void expect_small(const std::vector<double>& errors) {
  for (std::size_t k = 0; k < errors.size(); ++k) EXPECT_LT(errors[k], kTol) << "input block " << k;
}

struct Fixture {
  Mesh mesh = gen::icosphere(1);
  EdgeTopology topology = build_edge_topology(mesh);
  std::mt19937_64 rng{42};
  Eigen::Index edges() const { return static_cast<Eigen::Index>(topology.edge_count()); }
};

TEST(GradientCheck, MatmulAndAddRow) {
  Fixture fx;
  const Matrix target = random_matrix(7, 3, fx.rng);
  expect_small(gradient_errors({random_matrix(7, 4, fx.rng), random_matrix(4, 3, fx.rng), random_matrix(1, 3, fx.rng)},
                               [&](Tape& t, const std::vector<Var>& v) {
                                 return mse(t, add_row(t, matmul(t, v[0], v[1]), v[2]), target);
                               }));
}

TEST(GradientCheck, MeshConv) {
  Fixture fx;
  const Matrix target = random_matrix(fx.edges(), 4, fx.rng);
  std::vector<Matrix> inputs{random_matrix(fx.edges(), 3, fx.rng)};
  for (int k = 0; k < 5; ++k) inputs.push_back(random_matrix(3, 4, fx.rng));
  inputs.push_back(random_matrix(1, 4, fx.rng));
  expect_small(gradient_errors(inputs, [&](Tape& t, const std::vector<Var>& v) {
    const std::array<Var, 5> w{v[1], v[2], v[3], v[4], v[5]};
    return mse(t, mesh_conv(t, v[0], fx.topology, w, v[6]), target);
  }));
}

TEST(GradientCheck, InstanceNorm) {
  Fixture fx;
  const Matrix target = random_matrix(fx.edges(), 3, fx.rng);
  expect_small(gradient_errors(
      {random_matrix(fx.edges(), 3, fx.rng), random_matrix(1, 3, fx.rng), random_matrix(1, 3, fx.rng)},
      [&](Tape& t, const std::vector<Var>& v) {
        return mse(t, instance_norm(t, v[0], v[1], v[2], kInstanceNormEps), target);
      }));
}

TEST(GradientCheck, Relu) {
  Fixture fx;
  const Matrix target = random_matrix(20, 3, fx.rng);
  expect_small(gradient_errors({away_from_zero(random_matrix(20, 3, fx.rng))},
                               [&](Tape& t, const std::vector<Var>& v) { return mse(t, relu(t, v[0]), target); }));
}

TEST(GradientCheck, PoolAveragingPath) {
  for (PoolPolicy policy : {PoolPolicy::kEnhanced, PoolPolicy::kBatchLegacy}) {
    Fixture fx;
    const std::size_t target_edges = 84;
    const Matrix target = random_matrix(static_cast<Eigen::Index>(target_edges), 3, fx.rng);
    const Matrix x = random_matrix(fx.edges(), 3, fx.rng);
    expect_small(gradient_errors({x}, [&](Tape& t, const std::vector<Var>& v) {
      std::shared_ptr<const PoolHistory> history;
      EdgeTopology pooled;
      return mse(t, mesh_pool(t, v[0], fx.topology, target_edges, policy, &history, &pooled), target);
    }));
  }
}

TEST(GradientCheck, Unpool) {
  Fixture fx;
  const Matrix x = random_matrix(fx.edges(), 2, fx.rng);
  auto history = std::make_shared<const PoolHistory>(pool(x, fx.topology, 90).history);
  const Matrix target = random_matrix(fx.edges(), 2, fx.rng);
  expect_small(gradient_errors({random_matrix(90, 2, fx.rng)}, [&](Tape& t, const std::vector<Var>& v) {
    return mse(t, mesh_unpool(t, v[0], history), target);
  }));
}

TEST(GradientCheck, GlobalAveragePoolAndDense) {
  Fixture fx;
  const Matrix target = random_matrix(1, 3, fx.rng);
  expect_small(gradient_errors(
      {random_matrix(fx.edges(), 4, fx.rng), random_matrix(4, 3, fx.rng), random_matrix(1, 3, fx.rng)},
      [&](Tape& t, const std::vector<Var>& v) {
        return mse(t, add_row(t, matmul(t, global_average_pool(t, v[0]), v[1]), v[2]), target);
      }));
}

TEST(GradientCheck, CrossEntropyLosses) {
  Fixture fx;
  expect_small(gradient_errors({random_matrix(1, 5, fx.rng, 3.0)},
                               [&](Tape& t, const std::vector<Var>& v) { return cross_entropy(t, v[0], 2); }));
  const std::vector<int> labels{0, 2, 1, 1, 0, 2};
  expect_small(gradient_errors({random_matrix(6, 3, fx.rng, 3.0)}, [&](Tape& t, const std::vector<Var>& v) {
    return cross_entropy_rows(t, v[0], labels);
  }));
}

TEST(GradientCheck, MseAndScale) {
  Fixture fx;
  const Matrix target = random_matrix(5, 2, fx.rng);
  expect_small(gradient_errors({random_matrix(5, 2, fx.rng)}, [&](Tape& t, const std::vector<Var>& v) {
    return scale(t, mse(t, v[0], target), 0.3);
  }));
}

TEST(Losses, ClosedFormValues) {
  Tape t;
  const Var logits = t.constant((Matrix(1, 3) << 0.0, 0.0, 0.0).finished());
  EXPECT_NEAR(t.value(cross_entropy(t, logits, 1))(0, 0), std::log(3.0), 1e-15);
  const Var p = t.constant((Matrix(1, 2) << 1.0, 3.0).finished());
  EXPECT_NEAR(t.value(mse(t, p, (Matrix(1, 2) << 0.0, 0.0).finished()))(0, 0), 5.0, 1e-15);
  // Large logits must not overflow.
  const Var big = t.constant((Matrix(1, 2) << 1000.0, 0.0).finished());
  EXPECT_NEAR(t.value(cross_entropy(t, big, 0))(0, 0), 0.0, 1e-12);
  EXPECT_NEAR(t.value(cross_entropy(t, big, 1))(0, 0), 1000.0, 1e-9);
}

// Whole-model check: perturb each parameter block through the Model API.
TEST(GradientCheck, ClassifierModelEndToEnd) {
  Fixture fx;
  const std::vector<LayerSpec> layers{LayerSpec::conv(3, 4), LayerSpec::norm(4), LayerSpec::relu(),
                                      LayerSpec::pool(90),   LayerSpec::conv(4, 4), LayerSpec::global_average(),
                                      LayerSpec::dense(4, 3)};
  const Model model(layers, PoolPolicy::kEnhanced, 7);
  const Matrix x = random_matrix(fx.edges(), 3, fx.rng);
  auto loss_of = [&](const Parameters& p) {
    const Model m(layers, PoolPolicy::kEnhanced, p);
    ForwardPass pass = m.forward(x, fx.topology);
    return pass.loss_value(pass.cross_entropy_loss(1));
  };
  ForwardPass pass = model.forward(x, fx.topology);
  const Gradients g = pass.backward(pass.cross_entropy_loss(1));
  const Parameters& params = model.parameters();
  ASSERT_EQ(g.size(), params.size());
  for (std::size_t k = 0; k < params.size(); ++k) {
    Matrix numeric(params.values[k].rows(), params.values[k].cols());
    Parameters probe = params;
    for (Eigen::Index i = 0; i < numeric.size(); ++i) {
      const double v = params.values[k].data()[i];
      probe.values[k].data()[i] = v + 1e-5;
      const double up = loss_of(probe);
      probe.values[k].data()[i] = v - 1e-5;
      const double down = loss_of(probe);
      probe.values[k].data()[i] = v;
      numeric.data()[i] = (up - down) / 2e-5;
    }
    // A conv bias feeding InstanceNorm has an identically zero gradient;
    // there the relative error is noise over noise, so compare absolutely.
    if (numeric.norm() < 1e-8 && g[k].norm() < 1e-8) {
      EXPECT_LT((numeric - g[k]).norm(), 1e-8) << params.names[k];
      continue;
    }
    const double scale = std::max(numeric.norm(), g[k].norm());
    EXPECT_LT((numeric - g[k]).norm() / scale, kTol) << params.names[k];
  }
}

TEST(ForwardPass, SecondBackwardIsALogicError) {
  Fixture fx;
  const Model model({LayerSpec::conv(2, 3), LayerSpec::global_average(), LayerSpec::dense(3, 2)},
                    PoolPolicy::kEnhanced, 1);
  ForwardPass pass = model.forward(random_matrix(fx.edges(), 2, fx.rng), fx.topology);
  const Var loss = pass.cross_entropy_loss(0);
  pass.backward(loss);
  EXPECT_THROW(pass.backward(loss), std::logic_error);
}

TEST(Model, RejectsInconsistentLayerStacks) {
  EXPECT_THROW(Model({LayerSpec::relu()}, PoolPolicy::kEnhanced, 0), std::invalid_argument);
  EXPECT_THROW(Model({LayerSpec::conv(3, 4), LayerSpec::norm(5)}, PoolPolicy::kEnhanced, 0), std::invalid_argument);
  EXPECT_THROW(Model({LayerSpec::conv(3, 4), LayerSpec::pool(10), LayerSpec::conv(4, 2)}, PoolPolicy::kEnhanced, 0),
               std::invalid_argument);
  const Model ok({LayerSpec::conv(3, 4), LayerSpec::pool(10), LayerSpec::unpool(), LayerSpec::conv(4, 2)},
                 PoolPolicy::kEnhanced, 0);
  EXPECT_EQ(ok.input_channels(), 3);
  EXPECT_EQ(ok.output_channels(), 2);
  EXPECT_FALSE(ok.per_mesh_output());
  Fixture fx;
  EXPECT_THROW(ok.forward(random_matrix(fx.edges(), 2, fx.rng), fx.topology), std::invalid_argument);
}

TEST(Model, SameSeedSameParameters) {
  const std::vector<LayerSpec> layers{LayerSpec::conv(3, 4), LayerSpec::global_average(), LayerSpec::dense(4, 2)};
  const Model a(layers, PoolPolicy::kEnhanced, 9), b(layers, PoolPolicy::kEnhanced, 9),
      c(layers, PoolPolicy::kEnhanced, 10);
  EXPECT_EQ(a.parameters().values, b.parameters().values);
  EXPECT_NE(a.parameters().values, c.parameters().values);
}

Parameters one_block(double v) {
  Parameters p;
  p.names = {"w"};
  p.values = {Matrix::Constant(1, 2, v)};
  return p;
}

TEST(Optimizer, SgdMomentumClosedForm) {
  Parameters p = one_block(1.0);
  Optimizer opt({OptimizerMethod::kSgdMomentum, 0.1, 0.9});
  const Gradients g{(Matrix(1, 2) << 2.0, -1.0).finished()};
  opt.step(p, g);
  EXPECT_NEAR(p.values[0](0, 0), 1.0 - 0.1 * 2.0, 1e-15);
  EXPECT_NEAR(p.values[0](0, 1), 1.0 + 0.1, 1e-15);
  opt.step(p, g);  // v = 0.9 * g + g
  EXPECT_NEAR(p.values[0](0, 0), 0.8 - 0.1 * 1.9 * 2.0, 1e-15);
}

TEST(Optimizer, AdamFirstStepIsSignTimesRate) {
  Parameters p = one_block(0.5);
  OptimizerSettings s;
  s.learning_rate = 0.01;
  Optimizer opt(s);
  opt.step(p, {(Matrix(1, 2) << 3.0, -1e-3).finished()});
  // Bias-corrected m/sqrt(v) = g/|g| up to epsilon.
  EXPECT_NEAR(p.values[0](0, 0), 0.5 - 0.01 * 3.0 / (3.0 + 1e-8), 1e-15);
  EXPECT_NEAR(p.values[0](0, 1), 0.5 + 0.01 * 1e-3 / (1e-3 + 1e-8), 1e-15);
  EXPECT_EQ(opt.steps(), 1u);
}

TEST(Optimizer, RejectsNonFiniteAndMismatchedGradients) {
  Parameters p = one_block(0.0);
  Optimizer opt({});
  EXPECT_THROW(opt.step(p, {(Matrix(1, 2) << 1.0, std::nan("")).finished()}), NonFiniteGradientError);
  EXPECT_THROW(opt.step(p, {Matrix::Zero(2, 2)}), std::invalid_argument);
  EXPECT_THROW(opt.step(p, {}), std::invalid_argument);
  EXPECT_EQ(p.values[0], Matrix::Zero(1, 2));
  EXPECT_THROW(parse_optimizer("rmsprop"), std::invalid_argument);
}

Checkpoint sample_checkpoint() {
  Checkpoint c;
  c.config_text = "task = classification\n";
  c.config_hash = 0x1234;
  c.model = Model({LayerSpec::conv(2, 3), LayerSpec::norm(3), LayerSpec::relu(), LayerSpec::pool(60),
                   LayerSpec::global_average(), LayerSpec::dense(3, 4)},
                  PoolPolicy::kBatchLegacy, 3);
  c.input_stats = ChannelStats{(RowVector(2) << 0.1, 0.2).finished(), (RowVector(2) << 1.0, 2.0).finished()};
  return c;
}

TEST(Checkpoint, RoundTripIsExact) {
  const Checkpoint c = sample_checkpoint();
  const std::string bytes = serialize_checkpoint(c);
  const Checkpoint back = deserialize_checkpoint(bytes);
  EXPECT_EQ(serialize_checkpoint(back), bytes);
  EXPECT_EQ(back.config_text, c.config_text);
  EXPECT_EQ(back.model.layers(), c.model.layers());
  EXPECT_EQ(back.model.pool_policy(), PoolPolicy::kBatchLegacy);
  EXPECT_EQ(back.model.parameters().values, c.model.parameters().values);
  EXPECT_FALSE(back.target_stats.has_value());

  Fixture fx;
  const Matrix x = random_matrix(fx.edges(), 2, fx.rng);
  EXPECT_EQ(c.model.forward(x, fx.topology).output(), back.model.forward(x, fx.topology).output());
}

TEST(Checkpoint, CorruptBytesAreDataErrors) {
  const std::string bytes = serialize_checkpoint(sample_checkpoint());
  EXPECT_THROW(deserialize_checkpoint("XXXX" + bytes.substr(4)), DataError);
  EXPECT_THROW(deserialize_checkpoint(bytes.substr(0, bytes.size() / 2)), DataError);
  EXPECT_THROW(deserialize_checkpoint(bytes + "!"), DataError);
  EXPECT_THROW(deserialize_checkpoint(""), DataError);
  EXPECT_THROW(load_checkpoint("/nonexistent/model.ckpt"), DataError);
}

}  // namespace
}  // namespace meshff::nn
