#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "contactnet/executor.hpp"
#include "contactnet/net.hpp"
#include "contactnet/planner.hpp"
#include "contactnet/terrain.hpp"
#include "contactnet/trajopt.hpp"

namespace contactnet {

struct PushSpec {
  Eigen::Vector3d force{Eigen::Vector3d::Zero()};  // N
  double start{0.0};
  double duration{0.0};
};

struct Scenario {
  std::string name{"flat"};
  TerrainMap terrain{TerrainMap::flat()};
  GaitKind gait{GaitKind::Walk};
  Point2 user_vel{0.05, 0.0};
  RobotState initial{RobotState::nominal({0.0, 0.0}, 0.24)};
  double duration{10.0};
  /// Success once all four feet are beyond this x (if set).
  std::optional<double> goal_x;
  double noise_variance{0.0};
  std::optional<PushSpec> push;
  std::uint64_t seed{0};

  void validate() const;
};

struct SimParams {
  TrajoptParams trajopt{};
  ExecutorParams executor{};
  HipOffsets hips{};
  double margin{kDefaultSafetyMargin};
};

/// One executed step horizon.
struct HorizonLog {
  double t{0.0};
  Action action;
  bool hold{false};
  int rank_position{0};
  double plan_ms{0.0};
  double end_stab{0.0};
  double max_stab{0.0};
};

struct NodeLog {
  double t{0.0};
  Eigen::Vector3d com_pos;
  Eigen::Vector3d com_vel;
  std::array<Point2, 4> feet{};
  double stab{0.0};
};

struct SwingEvent {
  Leg leg{Leg::LF};
  double t_start{0.0};
  double t_end{0.0};
};

struct RunMetrics {
  bool success{false};
  bool fell{false};
  int steps{0};
  int falls{0};
  int hold_events{0};
  int unsafe_footholds{0};
  double mean_plan_ms{0.0};
  double max_plan_ms{0.0};
  double mean_rank{0.0};
  int max_rank{0};
  double final_time{0.0};
  std::vector<HorizonLog> horizons;
  std::vector<NodeLog> nodes;
  std::vector<SwingEvent> swings;
};

/// MPC loop: one plan + trajectory optimization per step horizon.
RunMetrics run(const Scenario& scn, const MlpModel& model, const SimParams& params = {});

/// Robot standing at rest on the nominal stance centred at com_xy.
RobotState initial_state(Point2 com_xy, Point2 user_vel, const SimParams& params);

Scenario flat_scenario(GaitKind gait, Point2 user_vel, double duration, const SimParams& params = {});

/// 1.5 x 0.5 m field of 5 cm blocks between a start and an end platform.
TerrainMap block_course(int n_removed, std::uint64_t seed);
inline constexpr double kBlockFieldLength = 1.5;
Scenario block_field_scenario(GaitKind gait, int n_removed, std::uint64_t seed,
                              double noise_variance = 0.0, const SimParams& params = {});

Scenario stepping_stones_run(const SimParams& params = {});

/// True when the sequence repeats with some period p <= max_period.
bool has_short_period(std::span<const int> seq, int max_period = 4);
/// Swing leg (walk) or swing pair (trot) of each executed non-hold horizon.
std::vector<int> swing_sequence(const RunMetrics& m, const GaitSpec& gait);

struct Proportion {
  double rate{0.0};
  double lo{0.0};
  double hi{0.0};
};
/// Wilson score interval (z = 1.96 by default).
Proportion wilson_interval(int successes, int trials, double z = 1.96);

struct SweepRow {
  int n{0};
  bool noise{false};
  int trials{0};
  int successes{0};
  Proportion ci;
};

/// Trial t at removal count n uses terrain seed base_seed + 1000 n + t.
std::vector<SweepRow> success_rate_sweep(const MlpModel& model, GaitKind gait,
                                         std::span<const int> n_values, int trials, bool noise,
                                         const SimParams& params = {}, std::uint64_t base_seed = 1,
                                         double noise_variance = 0.01);

struct BenchRow {
  int n{0};
  int samples{0};
  double mean_ms{0.0};
  double stddev_ms{0.0};
  double max_ms{0.0};
};

/// Plan-time statistics over closed-loop runs; the first `warmup` plan calls
/// of every run are excluded.
std::vector<BenchRow> bench_planning_time(const MlpModel& model, GaitKind gait,
                                          std::span<const int> n_values, int trials,
                                          const SimParams& params = {}, std::uint64_t base_seed = 1,
                                          int warmup = 2);

void write_metrics_csv(const std::vector<std::pair<std::string, RunMetrics>>& runs,
                       const std::filesystem::path& path, const std::string& header_comment = {});
/// Rows: leg,t_start,t_end,phase (stance or swing).
void write_gait_schedule_csv(const RunMetrics& m, const std::filesystem::path& path,
                             const std::string& header_comment = {});
void write_trajectory_log_csv(const RunMetrics& m, const std::filesystem::path& path,
                              const std::string& header_comment = {});
void write_sweep_csv(const std::vector<SweepRow>& rows, GaitKind gait,
                     const std::filesystem::path& path, const std::string& header_comment = {});
void write_bench_csv(const std::vector<BenchRow>& rows, GaitKind gait,
                     const std::filesystem::path& path, const std::string& header_comment = {});

}  // namespace contactnet
