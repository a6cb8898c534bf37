#include "contactnet/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "contactnet/errors.hpp"

namespace contactnet {

Oracle::Oracle(GaitSpec gait, CostWeights weights, TrajoptParams params, HipOffsets hips)
    : gait_(gait), weights_(weights), hips_(hips), optimizer_(params),
      actions_(enumerate_actions(gait)) {
  weights_.validate();
}

CostBreakdown Oracle::evaluate_action(const RobotState& s, const Action& a) {
  const StepActions steps{a, Action::hold(), Action::hold()};
  const ContactSchedule sched = build_schedule(gait_, steps, s, hips_);
  const Trajectory traj =
      optimizer_.optimize(s, sched, References::from_state(s, optimizer_.params()));
  return evaluate(traj, sched, weights_, hips_);
}

std::vector<double> Oracle::rank_all(const RobotState& s) {
  if (!s.is_valid()) throw InvalidInput("rank_all: invalid robot state");
  std::vector<double> v(actions_.size());
  for (std::size_t i = 0; i < actions_.size(); ++i) v[i] = evaluate_action(s, actions_[i]).total;
  return v;
}

std::vector<double> rank_all(const RobotState& s, const GaitSpec& gait, const CostWeights& w,
                             const TrajoptParams& params, const HipOffsets& hips) {
  Oracle oracle(gait, w, params, hips);
  return oracle.rank_all(s);
}

std::vector<double> rank_targets(std::span<const double> v) {
  const auto n = v.size();
  for (double x : v) {
    if (!std::isfinite(x)) throw InvalidInput("rank_targets: non-finite cost");
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return v[a] > v[b]; });
  std::vector<double> y(n);
  for (std::size_t pos = 0; pos < n; ++pos) {
    y[order[pos]] = static_cast<double>(pos) / static_cast<double>(n);
  }
  return y;
}

int best_action(std::span<const double> v) {
  if (v.empty()) throw InvalidInput("best_action: empty cost vector");
  return static_cast<int>(std::min_element(v.begin(), v.end()) - v.begin());
}

std::vector<int> ascending_order(std::span<const double> v) {
  std::vector<int> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return v[a] < v[b]; });
  return order;
}

}  // namespace contactnet
