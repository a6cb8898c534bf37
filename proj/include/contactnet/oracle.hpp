#pragma once

#include <span>
#include <vector>

#include "contactnet/cost.hpp"
#include "contactnet/footholds.hpp"
#include "contactnet/trajopt.hpp"

namespace contactnet {

/// Ground-truth ranking: optimizes and evaluates every action of a gait.
/// Steps 2 and 3 of the horizon are all-stance holds.
class Oracle {
 public:
  Oracle(GaitSpec gait, CostWeights weights = {}, TrajoptParams params = {}, HipOffsets hips = {});

  /// V[i] = total cost of action i.
  std::vector<double> rank_all(const RobotState& s);

  /// Optimize and score a single action (used by rank_all).
  CostBreakdown evaluate_action(const RobotState& s, const Action& a);

  const GaitSpec& gait() const { return gait_; }
  const CostWeights& weights() const { return weights_; }
  const TrajoptParams& params() const { return optimizer_.params(); }
  const HipOffsets& hips() const { return hips_; }

 private:
  GaitSpec gait_;
  CostWeights weights_;
  HipOffsets hips_;
  TrajectoryOptimizer optimizer_;
  std::vector<Action> actions_;
};

std::vector<double> rank_all(const RobotState& s, const GaitSpec& gait, const CostWeights& w,
                             const TrajoptParams& params = {}, const HipOffsets& hips = {});

/// Y[i] = (position of V[i] in V sorted descending) / N_a; ties keep
/// ascending action index.
std::vector<double> rank_targets(std::span<const double> v);

/// argmin of V, lowest index on ties.
int best_action(std::span<const double> v);

/// Indices of V sorted ascending by cost (stable).
std::vector<int> ascending_order(std::span<const double> v);

}  // namespace contactnet
