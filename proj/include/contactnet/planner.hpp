#pragma once

#include <array>
#include <string>

#include "contactnet/dataset.hpp"
#include "contactnet/footholds.hpp"
#include "contactnet/net.hpp"
#include "contactnet/terrain.hpp"
#include "contactnet/trajopt.hpp"

namespace contactnet {

struct PlannerConfig {
  GaitSpec gait{GaitSpec::walk()};
  HipOffsets hips{};
  double margin{kDefaultSafetyMargin};
};

struct ContactPlan {
  StepActions actions{};
  StepFootholds footholds{};
  std::array<int, kPlanSteps> discarded{};
  std::array<int, kPlanSteps> rank_position{};
  std::array<RobotState, kPlanSteps> virtual_states{};
  double wall_time_ms{0.0};
};

/// Three network evaluations on virtually propagated states; at each step the
/// highest-scoring action whose footholds are all safe is taken.
/// Throws NoFeasibleAction when every action of a step is unsafe.
ContactPlan plan(const MlpModel& m, const RobotState& s, const TerrainMap& terrain,
                 const PlannerConfig& cfg, const NormalizationBounds& bounds);
/// Uses the bounds stored with the model.
ContactPlan plan(const MlpModel& m, const RobotState& s, const TerrainMap& terrain,
                 const PlannerConfig& cfg);

/// State after executing `a` under perfect velocity tracking.
RobotState propagate_virtual(const RobotState& s, const std::vector<Foothold>& footholds,
                             const GaitSpec& gait);

std::string plan_to_json(const ContactPlan& p, const GaitSpec& gait, int indent = 2);

}  // namespace contactnet
