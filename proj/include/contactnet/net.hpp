#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "contactnet/dataset.hpp"
#include "contactnet/footholds.hpp"

namespace contactnet {

/// Fully connected regressor: ReLU on hidden layers, identity output.
/// weights[l] maps layer l (dims[l]) to layer l + 1 (dims[l + 1]).
struct MlpModel {
  GaitKind gait{GaitKind::Walk};
  std::vector<int> dims;
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  std::optional<NormalizationBounds> bounds;
  std::string meta;  // configuration echo

  /// He-uniform weights, zero biases.
  static MlpModel create(std::vector<int> dims, GaitKind gait, std::uint64_t seed);
  static MlpModel zeros(std::vector<int> dims, GaitKind gait);

  /// [14, 128, 128, 128, N_a].
  static std::vector<int> standard_dims(GaitKind gait);

  int input_dim() const { return dims.front(); }
  int output_dim() const { return dims.back(); }
  int num_layers() const { return static_cast<int>(weights.size()); }
  std::size_t parameter_count() const;
};

Eigen::VectorXd forward(const MlpModel& m, std::span<const double> x);

/// Columns of X are samples.
Eigen::MatrixXd forward_batch(const MlpModel& m, const Eigen::MatrixXd& x);

/// (1/N) sum (y - yhat)^2.
double loss(std::span<const double> yhat, std::span<const double> y);

struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

/// Mean per-sample loss over the columns of X/Y and its gradient.
double loss_and_gradients(const MlpModel& m, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                          Gradients& grad);

struct TrainConfig {
  int epochs{1000};
  int batch_size{100};
  double learning_rate{1e-3};
  double beta1{0.9};
  double beta2{0.999};
  double epsilon{1e-8};
  std::uint64_t seed{1};

  void validate() const;
};

/// Mini-batch Adam with a per-epoch reshuffle. Returns the mean training
/// loss of every epoch. The callback (if set) sees (epoch, loss).
std::vector<double> train(MlpModel& m, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                          const TrainConfig& cfg,
                          const std::function<void(int, double)>& on_epoch = {});

/// Normalized inputs (14 x n) and rank targets (N_a x n) for a record set.
Eigen::MatrixXd input_matrix(const std::vector<RankRecord>& records, const NormalizationBounds& b);
Eigen::MatrixXd target_matrix(const std::vector<RankRecord>& records);

/// Percentage of records whose predicted argmax is among the 5 lowest costs.
double top5_accuracy(const MlpModel& m, const std::vector<RankRecord>& records,
                     const NormalizationBounds& b);
double top5_accuracy(const Eigen::MatrixXd& predictions, const std::vector<RankRecord>& records);

struct TrainingRun {
  MlpModel model;
  std::vector<double> history;
  std::vector<RankRecord> train_set;
  std::vector<RankRecord> test_set;
  double train_top5{0.0};
  double test_top5{0.0};
};

/// Split (seeded), fit bounds on the training part, train a standard-shape
/// network initialized from cfg.seed and score both parts.
TrainingRun train_on_dataset(const Dataset& d, const TrainConfig& cfg, double train_fraction,
                             const std::function<void(int, double)>& on_epoch = {});

void save_model(const MlpModel& m, const std::filesystem::path& path);
MlpModel load_model(const std::filesystem::path& path);
/// load_model plus a check that the output width matches the gait.
MlpModel load_model_for_gait(const std::filesystem::path& path, GaitKind gait);

}  // namespace contactnet
