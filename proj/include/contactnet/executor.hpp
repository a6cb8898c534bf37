#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "contactnet/footholds.hpp"
#include "contactnet/trajopt.hpp"

namespace contactnet {

/// Idealized tracking of an optimized trajectory. The executed CoM follows
/// the optimizer's prediction exactly; external pushes create a deviation
/// that a critically damped CoM feedback (1 kHz, friction-limited) rejects.
struct ExecutorParams {
  double kp{60.0};
  double kd{15.5};
  int substeps_per_node{40};
  double fall_distance{0.06};
};

/// External force in N as a function of absolute time.
using PushProfile = std::function<Eigen::Vector3d(double)>;

struct HorizonResult {
  RobotState state;                        // after the first step horizon
  std::vector<Eigen::Vector3d> com_pos;    // nodes 0..N_s
  std::vector<Eigen::Vector3d> com_vel;    // nodes 0..N_s
  std::vector<double> stab_distance;       // nodes 0..N_s-1
  double end_stab_distance{0.0};           // all-stance polygon at N_s
  bool fell{false};
};

HorizonResult execute_horizon(const RobotState& s, const Trajectory& traj,
                              const ContactSchedule& sched, const TrajoptParams& tp,
                              const ExecutorParams& ep, double t0 = 0.0,
                              const PushProfile& push = {});

}  // namespace contactnet
