#include "contactnet/cost.hpp"

#include "contactnet/errors.hpp"

namespace contactnet {

void CostWeights::validate() const {
  if (gamma_opt < 0 || gamma_stab < 0 || gamma_hip < 0 || gamma_cent < 0 || gamma_area < 0) {
    throw InvalidInput("cost weights must be non-negative");
  }
  if (!(hip_radius_max > 0)) throw InvalidInput("hip_radius_max must be positive");
}

double CostBreakdown::combine(const CostWeights& w, double v_opt, double v_stab, double v_hip,
                              double v_cent, double v_area) {
  return w.gamma_opt * v_opt + w.gamma_stab * v_stab + w.gamma_hip * v_hip +
         w.gamma_cent * v_cent - w.gamma_area * v_area;
}

ConvexPolygon stance_polygon(const ContactSchedule& sched, int node) {
  std::array<Point2, 4> pts;
  std::size_t n = 0;
  for (Leg l : kAllLegs) {
    if (sched.stance[node][leg_index(l)]) pts[n++] = sched.feet[node][leg_index(l)];
  }
  return convex_hull(std::span<const Point2>(pts.data(), n));
}

RunningTerms running_cost(Point2 com_xy, const ContactSchedule& sched, int node,
                          const HipOffsets& hips, const CostWeights& w) {
  RunningTerms t;
  t.v_stab = distance_outside(com_xy, stance_polygon(sched, node));
  for (Leg l : kAllLegs) {
    if (!sched.stance[node][leg_index(l)]) continue;
    const Point2 hip = com_xy + hips[l];
    if (norm(sched.feet[node][leg_index(l)] - hip) > w.hip_radius_max) t.v_hip += 1.0;
  }
  return t;
}

TerminalTerms terminal_cost(const ConvexPolygon& final_polygon, Point2 com_xy) {
  return {norm(com_xy - polygon_centroid(final_polygon)), polygon_area(final_polygon)};
}

CostBreakdown evaluate(const Trajectory& traj, const ContactSchedule& sched, const CostWeights& w,
                       const HipOffsets& hips, bool step_horizon_only) {
  const int last = step_horizon_only ? sched.nodes_per_step : traj.num_nodes();
  if (last > traj.num_nodes() || last >= static_cast<int>(traj.com_pos.size())) {
    throw InvalidInput("evaluate: trajectory shorter than one step horizon");
  }
  auto com_xy = [&](int k) { return Point2{traj.com_pos[k].x(), traj.com_pos[k].y()}; };

  CostBreakdown b;
  b.v_opt = traj.v_opt;
  // The schedule has no entry past its last node; the final state reuses it.
  for (int k = 0; k <= last; ++k) {
    const int node = std::min(k, sched.num_nodes() - 1);
    const auto r = running_cost(com_xy(k), sched, node, hips, w);
    b.v_stab += r.v_stab;
    b.v_hip += r.v_hip;
  }
  const int term_node = std::min(last, sched.num_nodes() - 1);
  const auto term = terminal_cost(stance_polygon(sched, term_node), com_xy(last));
  b.v_cent = term.v_cent;
  b.v_area = term.v_area;
  b.total = CostBreakdown::combine(w, b.v_opt, b.v_stab, b.v_hip, b.v_cent, b.v_area);
  return b;
}

}  // namespace contactnet
