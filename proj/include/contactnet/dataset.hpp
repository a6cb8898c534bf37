#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "contactnet/cost.hpp"
#include "contactnet/executor.hpp"
#include "contactnet/footholds.hpp"
#include "contactnet/trajopt.hpp"

namespace contactnet {

/// One oracle evaluation: network input and the full cost vector V.
struct RankRecord {
  std::uint32_t episode{0};
  std::uint32_t step{0};
  InputVector input{};
  std::vector<double> costs;
};

enum class Termination : std::uint8_t { StepLimit, Fall };

struct Episode {
  std::uint64_t seed{0};
  RobotState initial;
  Point2 user_vel;
  std::vector<RankRecord> records;
  Termination terminated_by{Termination::StepLimit};
  int steps_executed{0};
};

inline constexpr int kEpisodeSteps = 30;
inline constexpr int kFallTruncation = 3;

struct EpisodeParams {
  GaitKind gait{GaitKind::Walk};
  CostWeights weights{};
  TrajoptParams trajopt{};
  ExecutorParams executor{};
  HipOffsets hips{};
  int max_steps{kEpisodeSteps};
  double foot_jitter{0.03};
  double com_vel_range{0.1};
  double com_z_jitter{0.01};
  double user_vel_range{0.1};
  /// Test hook: returning true after executing step k (1-based) forces a fall.
  std::function<bool(int)> scripted_fall;
};

/// Random initial state for an episode seed (also used by run_episode).
RobotState sample_initial_state(std::uint64_t seed, const EpisodeParams& p);

Episode run_episode(std::uint64_t seed, std::uint32_t episode_id, const EpisodeParams& p);

struct Dataset {
  GaitKind gait{GaitKind::Walk};
  int num_actions{0};
  std::string meta;  // free-form JSON echo of the generating configuration
  std::vector<RankRecord> records;
};

struct GenerationSummary {
  int episodes{0};
  int falls{0};
  std::size_t records{0};
};

/// Episodes use seeds base_seed, base_seed + 1, ...; records keep episode order.
Dataset generate_dataset(int episodes, std::uint64_t base_seed, const EpisodeParams& p,
                         GenerationSummary* summary = nullptr,
                         const std::function<void(int, const Episode&)>& progress = {});

struct NormalizationBounds {
  InputVector lo{};
  InputVector hi{};

  /// Per-component data range widened by `padding` of its width (and to at
  /// least `min_width`).
  static NormalizationBounds from_records(const std::vector<RankRecord>& records,
                                          double padding = 0.05, double min_width = 1e-3);
  void validate() const;
};

InputVector normalize(const InputVector& u, const NormalizationBounds& b);
InputVector denormalize(const InputVector& x, const NormalizationBounds& b);

/// Seeded shuffle, then the first floor(fraction * n) records go to train.
std::pair<std::vector<RankRecord>, std::vector<RankRecord>> split(
    const std::vector<RankRecord>& records, double fraction, std::uint64_t seed);

void save_dataset(const Dataset& d, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

/// Header row, then episode,step,u0..u13,v0..v{N_a-1}.
void export_dataset_csv(const Dataset& d, const std::filesystem::path& path);

}  // namespace contactnet
