#pragma once

#include <array>

#include "contactnet/footholds.hpp"
#include "contactnet/geometry.hpp"
#include "contactnet/trajopt.hpp"

namespace contactnet {

struct CostWeights {
  double gamma_opt{1.0};
  double gamma_stab{20.0};
  double gamma_hip{5.0};
  double gamma_cent{10.0};
  double gamma_area{10.0};
  double hip_radius_max{0.22};

  void validate() const;
};

struct CostBreakdown {
  double v_opt{0.0};
  double v_stab{0.0};
  double v_hip{0.0};
  double v_cent{0.0};
  double v_area{0.0};
  double total{0.0};

  /// gamma-weighted combination of the terms.
  static double combine(const CostWeights& w, double v_opt, double v_stab, double v_hip,
                        double v_cent, double v_area);
};

struct RunningTerms {
  double v_stab{0.0};
  double v_hip{0.0};
};

struct TerminalTerms {
  double v_cent{0.0};
  double v_area{0.0};
};

/// Support polygon (hull of stance feet) at a schedule node.
ConvexPolygon stance_polygon(const ContactSchedule& sched, int node);

/// v_stab: CoM distance outside the support polygon. v_hip: number of stance
/// legs farther than hip_radius_max from their hip (hip = CoM + offset).
RunningTerms running_cost(Point2 com_xy, const ContactSchedule& sched, int node,
                          const HipOffsets& hips, const CostWeights& w);

TerminalTerms terminal_cost(const ConvexPolygon& final_polygon, Point2 com_xy);

/// Foothold cost V of a trajectory: running terms summed over nodes 0..N_s of
/// the first step horizon (whole horizon if !step_horizon_only), optimizer
/// objective added once, terminal terms at the last summed node.
CostBreakdown evaluate(const Trajectory& traj, const ContactSchedule& sched, const CostWeights& w,
                       const HipOffsets& hips, bool step_horizon_only = true);

}  // namespace contactnet
