#include "contactnet/planner.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

#include <json.hpp>

#include "contactnet/errors.hpp"

namespace contactnet {

RobotState propagate_virtual(const RobotState& s, const std::vector<Foothold>& footholds,
                             const GaitSpec& gait) {
  std::array<Point2, 4> world;
  for (Leg l : kAllLegs) world[leg_index(l)] = s.foot_world(l);
  for (const auto& [leg, p] : footholds) world[leg_index(leg)] = p;
  RobotState next = s;
  next.com_xy_world = s.com_xy_world + s.user_vel * gait.step_duration();
  next.com_vel = {s.user_vel.x, s.user_vel.y, 0.0};
  for (Leg l : kAllLegs) next.set_foot_world(l, world[leg_index(l)]);
  return next;
}

ContactPlan plan(const MlpModel& m, const RobotState& s, const TerrainMap& terrain,
                 const PlannerConfig& cfg, const NormalizationBounds& bounds) {
  const auto t0 = std::chrono::steady_clock::now();
  const int na = action_count(cfg.gait);
  if (m.gait != cfg.gait.kind || m.output_dim() != na || m.input_dim() != kInputDim) {
    throw InvalidInput("plan: model does not match gait " + gait_name(cfg.gait.kind));
  }
  if (!s.is_valid()) throw InvalidInput("plan: invalid robot state");

  ContactPlan out;
  RobotState virt = s;
  std::vector<int> order(na);
  for (int j = 0; j < kPlanSteps; ++j) {
    out.virtual_states[j] = virt;
    const InputVector x = normalize(virt.to_input(), bounds);
    const Eigen::VectorXd y = forward(m, x);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return y[a] > y[b]; });

    int pos = 0;
    for (; pos < na; ++pos) {
      const Action a = action_at(cfg.gait, order[pos]);
      auto feet = action_footholds(cfg.gait, a, virt, cfg.hips);
      const bool safe = std::all_of(feet.begin(), feet.end(), [&](const Foothold& f) {
        return is_safe(terrain, f.second, cfg.margin);
      });
      if (safe) {
        out.actions[j] = a;
        out.footholds[j] = std::move(feet);
        break;
      }
    }
    if (pos == na) {
      throw NoFeasibleAction("plan: no safe action at look-ahead step " + std::to_string(j + 1));
    }
    out.discarded[j] = pos;
    out.rank_position[j] = pos;
    virt = propagate_virtual(virt, out.footholds[j], cfg.gait);
  }
  out.wall_time_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

ContactPlan plan(const MlpModel& m, const RobotState& s, const TerrainMap& terrain,
                 const PlannerConfig& cfg) {
  if (!m.bounds) throw InvalidInput("plan: model carries no normalization bounds");
  return plan(m, s, terrain, cfg, *m.bounds);
}

std::string plan_to_json(const ContactPlan& p, const GaitSpec& gait, int indent) {
  nlohmann::json steps = nlohmann::json::array();
  for (int j = 0; j < kPlanSteps; ++j) {
    nlohmann::json feet = nlohmann::json::array();
    for (const auto& [leg, pt] : p.footholds[j]) {
      feet.push_back({{"leg", leg_name(leg)}, {"x", pt.x}, {"y", pt.y}});
    }
    steps.push_back({{"action", p.actions[j].index},
                     {"footholds", feet},
                     {"discarded", p.discarded[j]},
                     {"rank_position", p.rank_position[j]}});
  }
  nlohmann::json doc = {{"format", "contactnet-plan"},
                        {"version", 1},
                        {"gait", gait_name(gait.kind)},
                        {"steps", steps},
                        {"wall_time_ms", p.wall_time_ms}};
  return doc.dump(indent);
}

}  // namespace contactnet
