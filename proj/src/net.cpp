#include "contactnet/net.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <tuple>

#include "binio.hpp"
#include "contactnet/errors.hpp"
#include "contactnet/oracle.hpp"

namespace contactnet {

namespace {

constexpr char kMagic[5] = "CNWT";
constexpr std::uint32_t kVersion = 1;

void check_dims(const std::vector<int>& dims) {
  if (dims.size() < 2) throw InvalidInput("mlp: need at least input and output widths");
  for (int d : dims) {
    if (d <= 0) throw InvalidInput("mlp: layer widths must be positive");
  }
}

// Activations of every layer (a[0] = input, a[L] = output).
void forward_all(const MlpModel& m, const Eigen::MatrixXd& x, std::vector<Eigen::MatrixXd>& a) {
  const int layers = m.num_layers();
  a.resize(layers + 1);
  a[0] = x;
  for (int l = 0; l < layers; ++l) {
    a[l + 1].noalias() = m.weights[l] * a[l];
    a[l + 1].colwise() += m.biases[l];
    if (l + 1 < layers) a[l + 1] = a[l + 1].cwiseMax(0.0);
  }
}

int argmax(const Eigen::Ref<const Eigen::VectorXd>& v) {
  int best = 0;
  for (int i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

}  // namespace

MlpModel MlpModel::zeros(std::vector<int> dims, GaitKind gait) {
  check_dims(dims);
  MlpModel m;
  m.gait = gait;
  m.dims = std::move(dims);
  for (std::size_t l = 0; l + 1 < m.dims.size(); ++l) {
    m.weights.push_back(Eigen::MatrixXd::Zero(m.dims[l + 1], m.dims[l]));
    m.biases.push_back(Eigen::VectorXd::Zero(m.dims[l + 1]));
  }
  return m;
}

MlpModel MlpModel::create(std::vector<int> dims, GaitKind gait, std::uint64_t seed) {
  MlpModel m = zeros(std::move(dims), gait);
  std::mt19937_64 rng(seed);
  for (auto& w : m.weights) {
    const double limit = std::sqrt(6.0 / static_cast<double>(w.cols()));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = dist(rng);
    }
  }
  return m;
}

std::vector<int> MlpModel::standard_dims(GaitKind gait) {
  return {kInputDim, 128, 128, 128, action_count(GaitSpec::for_kind(gait))};
}

std::size_t MlpModel::parameter_count() const {
  std::size_t n = 0;
  for (int l = 0; l < num_layers(); ++l) n += weights[l].size() + biases[l].size();
  return n;
}

Eigen::VectorXd forward(const MlpModel& m, std::span<const double> x) {
  if (static_cast<int>(x.size()) != m.input_dim()) {
    throw InvalidInput("forward: expected " + std::to_string(m.input_dim()) + " inputs, got " +
                       std::to_string(x.size()));
  }
  Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  for (int l = 0; l < m.num_layers(); ++l) {
    Eigen::VectorXd z = m.weights[l] * a + m.biases[l];
    a = (l + 1 < m.num_layers()) ? Eigen::VectorXd(z.cwiseMax(0.0)) : z;
  }
  return a;
}

Eigen::MatrixXd forward_batch(const MlpModel& m, const Eigen::MatrixXd& x) {
  if (x.rows() != m.input_dim()) throw InvalidInput("forward_batch: input row count mismatch");
  std::vector<Eigen::MatrixXd> a;
  forward_all(m, x, a);
  return a.back();
}

double loss(std::span<const double> yhat, std::span<const double> y) {
  if (yhat.size() != y.size() || y.empty()) throw InvalidInput("loss: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += (y[i] - yhat[i]) * (y[i] - yhat[i]);
  return s / static_cast<double>(y.size());
}

double loss_and_gradients(const MlpModel& m, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                          Gradients& grad) {
  if (x.rows() != m.input_dim() || y.rows() != m.output_dim() || x.cols() != y.cols() ||
      x.cols() == 0) {
    throw InvalidInput("loss_and_gradients: shape mismatch");
  }
  const int layers = m.num_layers();
  std::vector<Eigen::MatrixXd> a;
  forward_all(m, x, a);
  const double n = static_cast<double>(x.cols()) * static_cast<double>(y.rows());
  Eigen::MatrixXd delta = a.back() - y;
  const double value = delta.squaredNorm() / n;
  delta *= 2.0 / n;

  grad.weights.resize(layers);
  grad.biases.resize(layers);
  for (int l = layers - 1; l >= 0; --l) {
    grad.weights[l].noalias() = delta * a[l].transpose();
    grad.biases[l] = delta.rowwise().sum();
    if (l > 0) {
      Eigen::MatrixXd back = m.weights[l].transpose() * delta;
      delta = back.cwiseProduct((a[l].array() > 0.0).cast<double>().matrix());
    }
  }
  return value;
}

void TrainConfig::validate() const {
  if (epochs < 0 || batch_size <= 0 || learning_rate < 0.0 || !(beta1 >= 0.0 && beta1 < 1.0) ||
      !(beta2 >= 0.0 && beta2 < 1.0) || epsilon <= 0.0) {
    throw InvalidInput("train config: invalid hyperparameters");
  }
}

std::vector<double> train(MlpModel& m, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                          const TrainConfig& cfg, const std::function<void(int, double)>& on_epoch) {
  cfg.validate();
  if (x.cols() == 0) throw InvalidInput("train: empty dataset");
  if (x.rows() != m.input_dim() || y.rows() != m.output_dim() || x.cols() != y.cols()) {
    throw InvalidInput("train: data shape does not match the model");
  }
  const int layers = m.num_layers();
  std::vector<Eigen::MatrixXd> mw(layers), vw(layers);
  std::vector<Eigen::VectorXd> mb(layers), vb(layers);
  for (int l = 0; l < layers; ++l) {
    mw[l] = Eigen::MatrixXd::Zero(m.weights[l].rows(), m.weights[l].cols());
    vw[l] = mw[l];
    mb[l] = Eigen::VectorXd::Zero(m.biases[l].size());
    vb[l] = mb[l];
  }

  const Eigen::Index n = x.cols();
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(cfg.seed);
  Gradients g;
  Eigen::MatrixXd xb, yb;
  std::vector<double> history;
  history.reserve(cfg.epochs);
  long step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (Eigen::Index start = 0; start < n; start += cfg.batch_size) {
      const Eigen::Index bs = std::min<Eigen::Index>(cfg.batch_size, n - start);
      xb.resize(x.rows(), bs);
      yb.resize(y.rows(), bs);
      for (Eigen::Index j = 0; j < bs; ++j) {
        xb.col(j) = x.col(order[start + j]);
        yb.col(j) = y.col(order[start + j]);
      }
      epoch_loss += loss_and_gradients(m, xb, yb, g) * static_cast<double>(bs);
      ++step;
      const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
      const double lr = cfg.learning_rate;
      auto adam = [&](auto& param, auto& mom, auto& vel, const auto& gr) {
        mom = cfg.beta1 * mom + (1.0 - cfg.beta1) * gr;
        vel = cfg.beta2 * vel + (1.0 - cfg.beta2) * gr.cwiseAbs2();
        param.array() -= lr * (mom.array() / c1) / ((vel.array() / c2).sqrt() + cfg.epsilon);
      };
      for (int l = 0; l < layers; ++l) {
        adam(m.weights[l], mw[l], vw[l], g.weights[l]);
        adam(m.biases[l], mb[l], vb[l], g.biases[l]);
      }
    }
    history.push_back(epoch_loss / static_cast<double>(n));
    if (on_epoch) on_epoch(epoch, history.back());
  }
  return history;
}

Eigen::MatrixXd input_matrix(const std::vector<RankRecord>& records, const NormalizationBounds& b) {
  Eigen::MatrixXd x(kInputDim, static_cast<Eigen::Index>(records.size()));
  for (std::size_t j = 0; j < records.size(); ++j) {
    const InputVector u = normalize(records[j].input, b);
    for (int i = 0; i < kInputDim; ++i) x(i, static_cast<Eigen::Index>(j)) = u[i];
  }
  return x;
}

Eigen::MatrixXd target_matrix(const std::vector<RankRecord>& records) {
  if (records.empty()) return {};
  const auto na = static_cast<Eigen::Index>(records.front().costs.size());
  Eigen::MatrixXd y(na, static_cast<Eigen::Index>(records.size()));
  for (std::size_t j = 0; j < records.size(); ++j) {
    if (static_cast<Eigen::Index>(records[j].costs.size()) != na) {
      throw InvalidInput("target_matrix: inconsistent cost vector lengths");
    }
    const auto t = rank_targets(records[j].costs);
    y.col(static_cast<Eigen::Index>(j)) = Eigen::Map<const Eigen::VectorXd>(t.data(), na);
  }
  return y;
}

double top5_accuracy(const Eigen::MatrixXd& predictions, const std::vector<RankRecord>& records) {
  if (records.empty()) return 0.0;
  if (predictions.cols() != static_cast<Eigen::Index>(records.size())) {
    throw InvalidInput("top5_accuracy: prediction count mismatch");
  }
  std::size_t hits = 0;
  for (std::size_t j = 0; j < records.size(); ++j) {
    const int pick = argmax(predictions.col(static_cast<Eigen::Index>(j)));
    const auto order = ascending_order(records[j].costs);
    const auto top = std::min<std::size_t>(5, order.size());
    if (std::find(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(top), pick) !=
        order.begin() + static_cast<std::ptrdiff_t>(top)) {
      ++hits;
    }
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(records.size());
}

double top5_accuracy(const MlpModel& m, const std::vector<RankRecord>& records,
                     const NormalizationBounds& b) {
  if (records.empty()) return 0.0;
  return top5_accuracy(forward_batch(m, input_matrix(records, b)), records);
}

TrainingRun train_on_dataset(const Dataset& d, const TrainConfig& cfg, double train_fraction,
                             const std::function<void(int, double)>& on_epoch) {
  cfg.validate();
  if (d.records.size() < 2) throw InvalidInput("dataset needs at least 2 records");
  if (d.num_actions != action_count(GaitSpec::for_kind(d.gait))) {
    throw InvalidInput("dataset action count does not match its gait");
  }
  TrainingRun r;
  std::tie(r.train_set, r.test_set) = split(d.records, train_fraction, cfg.seed);
  const NormalizationBounds bounds = NormalizationBounds::from_records(r.train_set);
  r.model = MlpModel::create(MlpModel::standard_dims(d.gait), d.gait, cfg.seed);
  r.model.bounds = bounds;
  r.history = train(r.model, input_matrix(r.train_set, bounds), target_matrix(r.train_set), cfg,
                    on_epoch);
  r.train_top5 = top5_accuracy(r.model, r.train_set, bounds);
  r.test_top5 = top5_accuracy(r.model, r.test_set, bounds);
  return r;
}

void save_model(const MlpModel& m, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os.write(kMagic, 4);
  binio::put<std::uint32_t>(os, kVersion);
  binio::put<std::uint32_t>(os, static_cast<std::uint32_t>(m.gait));
  binio::put<std::uint32_t>(os, static_cast<std::uint32_t>(m.dims.size()));
  for (int d : m.dims) binio::put<std::uint32_t>(os, static_cast<std::uint32_t>(d));
  for (int l = 0; l < m.num_layers(); ++l) {
    const auto& w = m.weights[l];
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) binio::put<double>(os, w(i, j));
    }
    for (Eigen::Index i = 0; i < m.biases[l].size(); ++i) binio::put<double>(os, m.biases[l][i]);
  }
  binio::put<std::uint8_t>(os, m.bounds ? 1 : 0);
  if (m.bounds) {
    if (m.input_dim() != kInputDim) throw InvalidInput("save_model: bounds need 14 inputs");
    for (double v : m.bounds->lo) binio::put<double>(os, v);
    for (double v : m.bounds->hi) binio::put<double>(os, v);
  }
  binio::put<std::uint32_t>(os, static_cast<std::uint32_t>(m.meta.size()));
  binio::put_bytes(os, m.meta);
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

MlpModel load_model(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ParseError("cannot open model " + path.string());
  binio::expect_magic(is, kMagic);
  const auto version = binio::get<std::uint32_t>(is, "version");
  if (version != kVersion) throw ParseError("unsupported model version " + std::to_string(version));
  const auto gait = binio::get<std::uint32_t>(is, "gait");
  if (gait > 1) throw ParseError("unknown gait tag " + std::to_string(gait));
  const auto ndims = binio::get<std::uint32_t>(is, "layer count");
  if (ndims < 2 || ndims > 64) throw ParseError("implausible layer count " + std::to_string(ndims));
  std::vector<int> dims(ndims);
  for (auto& d : dims) {
    const auto v = binio::get<std::uint32_t>(is, "layer width");
    if (v == 0 || v > (1u << 20)) throw ParseError("implausible layer width " + std::to_string(v));
    d = static_cast<int>(v);
  }
  MlpModel m = MlpModel::zeros(dims, static_cast<GaitKind>(gait));
  for (int l = 0; l < m.num_layers(); ++l) {
    auto& w = m.weights[l];
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = binio::get<double>(is, "weight");
    }
    for (Eigen::Index i = 0; i < m.biases[l].size(); ++i) m.biases[l][i] = binio::get<double>(is, "bias");
  }
  const auto has_bounds = binio::get<std::uint8_t>(is, "bounds flag");
  if (has_bounds > 1) throw ParseError("bad bounds flag");
  if (has_bounds) {
    if (m.input_dim() != kInputDim) throw ParseError("bounds stored for a non-14-input model");
    NormalizationBounds b;
    for (double& v : b.lo) v = binio::get<double>(is, "bound");
    for (double& v : b.hi) v = binio::get<double>(is, "bound");
    try {
      b.validate();
    } catch (const InvalidInput& e) {
      throw ParseError(e.what());
    }
    m.bounds = b;
  }
  const auto meta_len = binio::get<std::uint32_t>(is, "meta length");
  if (meta_len > (1u << 24)) throw ParseError("implausible meta length");
  m.meta = binio::get_bytes(is, meta_len, "meta");
  if (is.peek() != std::char_traits<char>::eof()) throw ParseError("trailing bytes in model file");
  return m;
}

MlpModel load_model_for_gait(const std::filesystem::path& path, GaitKind gait) {
  MlpModel m = load_model(path);
  const int expected = action_count(GaitSpec::for_kind(gait));
  if (m.gait != gait || m.output_dim() != expected || m.input_dim() != kInputDim) {
    throw ParseError("model " + path.string() + " has " + std::to_string(m.output_dim()) +
                     " outputs for gait " + gait_name(m.gait) + ", expected " +
                     std::to_string(expected) + " for " + gait_name(gait));
  }
  return m;
}

}  // namespace contactnet
