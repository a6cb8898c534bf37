#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "contactnet/errors.hpp"
#include "contactnet/net.hpp"
#include "contactnet/oracle.hpp"

using namespace contactnet;

namespace {
std::filesystem::path tmp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("contactnet_test_" + name);
}

Eigen::MatrixXd random_matrix(int r, int c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  Eigen::MatrixXd m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = u(rng);
  return m;
}

double relative_error(double a, double b) { return std::abs(a - b) / std::max(1e-6, std::abs(a) + std::abs(b)); }
}  // namespace

TEST(Mlp, StandardShape) {
  auto m = MlpModel::create(MlpModel::standard_dims(GaitKind::Walk), GaitKind::Walk, 1);
  EXPECT_EQ(m.dims, (std::vector<int>{14, 128, 128, 128, 100}));
  EXPECT_EQ(m.num_layers(), 4);
  EXPECT_EQ(MlpModel::standard_dims(GaitKind::Trot).back(), 162);
  EXPECT_EQ(m.parameter_count(), 14u * 128 + 128 + 2 * (128 * 128 + 128) + 128 * 100 + 100);
  for (const auto& b : m.biases) EXPECT_EQ(b.norm(), 0.0);
  // He-uniform limit sqrt(6 / fan_in).
  EXPECT_LE(m.weights[0].cwiseAbs().maxCoeff(), std::sqrt(6.0 / 14));
}

TEST(Mlp, ZeroModelGivesZeros) {
  auto m = MlpModel::zeros({14, 8, 5}, GaitKind::Walk);
  std::vector<double> x(14, 0.3);
  EXPECT_EQ(forward(m, x).norm(), 0.0);
}

TEST(Mlp, HandComputedToyNet) {
  // 2 -> 1 hidden -> 2: h = relu(1*x0 - 2*x1 + 0.5), y = [3h - 1, -h + 2].
  auto m = MlpModel::zeros({2, 1, 2}, GaitKind::Walk);
  m.weights[0] << 1.0, -2.0;
  m.biases[0] << 0.5;
  m.weights[1] << 3.0, -1.0;
  m.biases[1] << -1.0, 2.0;
  auto y = forward(m, std::vector<double>{1.0, 0.25});  // h = 1
  EXPECT_DOUBLE_EQ(y[0], 2.0);
  EXPECT_DOUBLE_EQ(y[1], 1.0);
  auto z = forward(m, std::vector<double>{0.0, 1.0});  // pre-activation -1.5, h = 0
  EXPECT_DOUBLE_EQ(z[0], -1.0);
  EXPECT_DOUBLE_EQ(z[1], 2.0);
  EXPECT_THROW(forward(m, std::vector<double>{1.0}), InvalidInput);
}

TEST(Mlp, BatchConsistent) {
  std::mt19937_64 rng(61);
  auto m = MlpModel::create({14, 32, 32, 32, 20}, GaitKind::Walk, 2);
  const Eigen::MatrixXd x = random_matrix(14, 50, rng);
  const Eigen::MatrixXd yb = forward_batch(m, x);
  for (int c = 0; c < 50; ++c) {
    const Eigen::VectorXd col = x.col(c);
    const Eigen::VectorXd y1 = forward(m, std::span<const double>(col.data(), 14));
    EXPECT_LT((y1 - yb.col(c)).lpNorm<Eigen::Infinity>(), 1e-12);
  }
}

TEST(Mlp, Loss) {
  std::vector<double> a{0.1, 0.2, 0.3};
  EXPECT_EQ(loss(a, a), 0.0);
  EXPECT_DOUBLE_EQ(loss(std::vector<double>{0, 0}, std::vector<double>{1, 0}), 0.5);
  std::mt19937_64 rng(62);
  std::uniform_real_distribution<double> u(-2, 2);
  std::vector<double> p(37), q(37);
  double acc = 0;
  for (int i = 0; i < 37; ++i) {
    p[i] = u(rng);
    q[i] = u(rng);
    acc += (q[i] - p[i]) * (q[i] - p[i]);
  }
  EXPECT_NEAR(loss(p, q), acc / 37, 1e-15);
}

TEST(Mlp, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(63);
  auto m = MlpModel::create({14, 8, 8, 8, 10}, GaitKind::Walk, 3);
  for (auto& b : m.biases) b = Eigen::VectorXd::Random(b.size()) * 0.1;
  const Eigen::MatrixXd x = random_matrix(14, 5, rng);
  const Eigen::MatrixXd y = random_matrix(10, 5, rng);
  Gradients g;
  loss_and_gradients(m, x, y, g);
  Gradients dummy;
  const double h = 1e-5;
  int checked = 0;
  for (int l = 0; l < m.num_layers(); ++l) {
    for (Eigen::Index i = 0; i < m.weights[l].size(); ++i) {
      const double w0 = m.weights[l](i);
      m.weights[l](i) = w0 + h;
      const double fp = loss_and_gradients(m, x, y, dummy);
      m.weights[l](i) = w0 - h;
      const double fm = loss_and_gradients(m, x, y, dummy);
      m.weights[l](i) = w0;
      const double fd = (fp - fm) / (2 * h);
      if (std::abs(fd) + std::abs(g.weights[l](i)) > 1e-8) {
        EXPECT_LT(relative_error(fd, g.weights[l](i)), 1e-4) << "layer " << l << " weight " << i;
        ++checked;
      }
    }
    for (Eigen::Index i = 0; i < m.biases[l].size(); ++i) {
      const double b0 = m.biases[l](i);
      m.biases[l](i) = b0 + h;
      const double fp = loss_and_gradients(m, x, y, dummy);
      m.biases[l](i) = b0 - h;
      const double fm = loss_and_gradients(m, x, y, dummy);
      m.biases[l](i) = b0;
      const double fd = (fp - fm) / (2 * h);
      if (std::abs(fd) + std::abs(g.biases[l](i)) > 1e-8) {
        EXPECT_LT(relative_error(fd, g.biases[l](i)), 1e-4) << "layer " << l << " bias " << i;
      }
    }
  }
  EXPECT_GT(checked, 100);
}

TEST(Train, ZeroLearningRateKeepsWeights) {
  std::mt19937_64 rng(64);
  auto m = MlpModel::create({14, 8, 3}, GaitKind::Walk, 4);
  const auto before = m.weights;
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 1;
  cfg.learning_rate = 0.0;
  train(m, random_matrix(14, 1, rng), random_matrix(3, 1, rng), cfg);
  for (int l = 0; l < m.num_layers(); ++l) EXPECT_EQ(m.weights[l], before[l]);
}

TEST(Train, MemorizesHundredSamples) {
  std::mt19937_64 rng(65);
  auto m = MlpModel::create({14, 64, 64, 64, 10}, GaitKind::Walk, 5);
  const Eigen::MatrixXd x = random_matrix(14, 100, rng);
  const Eigen::MatrixXd y = 0.5 * (random_matrix(10, 100, rng).array() + 1.0).matrix();
  TrainConfig cfg;
  cfg.epochs = 1000;
  cfg.batch_size = 100;
  auto hist = train(m, x, y, cfg);
  ASSERT_EQ(hist.size(), 1000u);
  Gradients g;
  EXPECT_LT(loss_and_gradients(m, x, y, g), 1e-3);
  EXPECT_LT(hist.back(), hist.front());
}

TEST(Train, SeedReproducible) {
  std::mt19937_64 rng(66);
  const Eigen::MatrixXd x = random_matrix(14, 30, rng);
  const Eigen::MatrixXd y = random_matrix(4, 30, rng);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.batch_size = 7;
  auto a = MlpModel::create({14, 16, 4}, GaitKind::Walk, 9);
  auto b = a;
  EXPECT_EQ(train(a, x, y, cfg), train(b, x, y, cfg));
  for (int l = 0; l < a.num_layers(); ++l) EXPECT_EQ(a.weights[l], b.weights[l]);
}

TEST(Train, ConfigValidation) {
  TrainConfig c;
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), InvalidInput);
  TrainConfig d;
  d.learning_rate = -1;
  EXPECT_THROW(d.validate(), InvalidInput);
}

TEST(Top5, PerfectAndConstantPredictors) {
  std::mt19937_64 rng(67);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<RankRecord> recs(40);
  for (auto& r : recs) {
    r.costs.resize(20);
    for (auto& c : r.costs) c = u(rng);
    r.costs[0] = 5.0;  // action 0 is never in the top five
  }
  Eigen::MatrixXd perfect(20, 40), constant = Eigen::MatrixXd::Zero(20, 40);
  for (int c = 0; c < 40; ++c) {
    auto y = rank_targets(recs[c].costs);
    for (int i = 0; i < 20; ++i) perfect(i, c) = y[i];
    constant(0, c) = 1.0;
  }
  EXPECT_EQ(top5_accuracy(perfect, recs), 100.0);
  EXPECT_EQ(top5_accuracy(constant, recs), 0.0);
}

TEST(Top5, DirectRecount) {
  std::mt19937_64 rng(68);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<RankRecord> recs(200);
  for (auto& r : recs) {
    for (auto& x : r.input) x = 2 * u(rng) - 1;
    r.costs.resize(12);
    for (auto& c : r.costs) c = u(rng);
  }
  auto m = MlpModel::create({14, 16, 12}, GaitKind::Walk, 7);
  NormalizationBounds b;
  b.lo.fill(-1.0);
  b.hi.fill(1.0);
  int hits = 0;
  for (const auto& r : recs) {
    auto y = forward(m, r.input);
    int arg = 0;
    for (int i = 1; i < 12; ++i) if (y[i] > y[arg]) arg = i;
    int better = 0;
    for (int i = 0; i < 12; ++i) better += r.costs[i] < r.costs[arg];
    hits += better < 5;
  }
  EXPECT_NEAR(top5_accuracy(m, recs, b), 100.0 * hits / 200, 1e-9);
}

TEST(Mlp, BiasShiftKeepsArgmax) {
  std::mt19937_64 rng(69);
  auto m = MlpModel::create({14, 16, 16, 9}, GaitKind::Walk, 8);
  auto shifted = m;
  shifted.biases.back().array() += 3.7;
  for (int k = 0; k < 50; ++k) {
    const Eigen::MatrixXd x = random_matrix(14, 1, rng);
    Eigen::Index a, b;
    forward_batch(m, x).col(0).maxCoeff(&a);
    forward_batch(shifted, x).col(0).maxCoeff(&b);
    EXPECT_EQ(a, b);
  }
}

TEST(ModelFile, RoundTripBitExact) {
  std::mt19937_64 rng(70);
  auto m = MlpModel::create(MlpModel::standard_dims(GaitKind::Trot), GaitKind::Trot, 11);
  NormalizationBounds b;
  for (int i = 0; i < kInputDim; ++i) {
    b.lo[i] = -1.0 - i;
    b.hi[i] = 2.0 + i;
  }
  m.bounds = b;
  m.meta = R"({"x": 1})";
  const auto path = tmp_file("model.cnwt");
  save_model(m, path);
  auto back = load_model(path);
  EXPECT_EQ(back.dims, m.dims);
  EXPECT_EQ(back.gait, GaitKind::Trot);
  EXPECT_EQ(back.meta, m.meta);
  ASSERT_TRUE(back.bounds.has_value());
  EXPECT_EQ(back.bounds->lo, b.lo);
  const Eigen::MatrixXd x = random_matrix(14, 20, rng);
  EXPECT_EQ(forward_batch(m, x), forward_batch(back, x));
  EXPECT_NO_THROW(load_model_for_gait(path, GaitKind::Trot));
  EXPECT_THROW(load_model_for_gait(path, GaitKind::Walk), ParseError);
  std::filesystem::remove(path);
}

TEST(ModelFile, CorruptedRejected) {
  auto m = MlpModel::create({14, 4, 100}, GaitKind::Walk, 1);
  const auto path = tmp_file("bad.cnwt");
  save_model(m, path);
  const auto size = std::filesystem::file_size(path);
  std::filesystem::resize_file(path, size - 3);
  EXPECT_THROW(load_model(path), ParseError);
  save_model(m, path);
  {
    std::ofstream f(path, std::ios::app | std::ios::binary);
    f << "xx";
  }
  EXPECT_THROW(load_model(path), ParseError);
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.write("CNDS", 4);
  }
  EXPECT_THROW(load_model(path), ParseError);
  std::filesystem::remove(path);
}
