#include "contactnet/executor.hpp"

#include <algorithm>
#include <cmath>

#include "contactnet/cost.hpp"

namespace contactnet {

HorizonResult execute_horizon(const RobotState& s, const Trajectory& traj,
                              const ContactSchedule& sched, const TrajoptParams& tp,
                              const ExecutorParams& ep, double t0, const PushProfile& push) {
  const int ns = sched.nodes_per_step;
  const double h = sched.dt / ep.substeps_per_node;

  HorizonResult res;
  res.com_pos.reserve(ns + 1);
  res.com_vel.reserve(ns + 1);

  // Deviation from the planned trajectory.
  Eigen::Vector3d e = Eigen::Vector3d::Zero();
  Eigen::Vector3d de = Eigen::Vector3d::Zero();
  res.com_pos.push_back(traj.com_pos[0]);
  res.com_vel.push_back(traj.com_vel[0]);
  for (int k = 0; k < ns; ++k) {
    const Eigen::Vector3d f_plan = traj.net_force(k);
    for (int sub = 0; sub < ep.substeps_per_node; ++sub) {
      const double t = t0 + k * sched.dt + sub * h;
      Eigen::Vector3d a_fb = -ep.kp * e - ep.kd * de;
      // The feedback force shares the friction budget with the planned force.
      const double fz = std::max(f_plan.z() + tp.mass * a_fb.z(), 0.0);
      for (int ax = 0; ax < 2; ++ax) {
        const double lim = tp.mu * fz;
        const double total = std::clamp(f_plan[ax] + tp.mass * a_fb[ax], -lim, lim);
        a_fb[ax] = (total - f_plan[ax]) / tp.mass;
      }
      Eigen::Vector3d a = a_fb;
      if (push) a += push(t) / tp.mass;
      de += h * a;
      e += h * de;
    }
    res.com_pos.push_back(traj.com_pos[k + 1] + e);
    res.com_vel.push_back(traj.com_vel[k + 1] + de);
  }

  for (int k = 0; k < ns; ++k) {
    const Point2 c{res.com_pos[k].x(), res.com_pos[k].y()};
    res.stab_distance.push_back(distance_outside(c, stance_polygon(sched, k)));
  }
  const Point2 c_end{res.com_pos[ns].x(), res.com_pos[ns].y()};
  res.end_stab_distance = distance_outside(c_end, stance_polygon(sched, std::min(ns, sched.num_nodes() - 1)));
  res.fell = !traj.feasible || std::all_of(res.stab_distance.begin(), res.stab_distance.end(),
                                           [&](double d) { return d > ep.fall_distance; });

  RobotState next = s;
  next.com_xy_world = c_end;
  next.com_z = res.com_pos[ns].z();
  next.com_vel = res.com_vel[ns];
  for (Leg l : kAllLegs) next.set_foot_world(l, sched.feet[std::min(ns, sched.num_nodes() - 1)][leg_index(l)]);
  res.state = next;
  return res;
}

}  // namespace contactnet
