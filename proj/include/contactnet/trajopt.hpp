#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "contactnet/footholds.hpp"
#include "contactnet/qpsolve.hpp"

namespace contactnet {

/// Model and cost parameters of the convex point-mass optimizer.
struct TrajoptParams {
  double mass{2.2};
  double gravity{9.81};
  double mu{0.6};
  double f_max{15.0};  // per leg
  double z_ref{0.24};
  double w_v{10.0};
  double w_z{50.0};
  double w_f{1e-3};
  double w_tau{1e-2};
  double v_big{1e6};
  QpSettings qp{};
};

struct References {
  Eigen::Vector3d com_vel{Eigen::Vector3d::Zero()};
  double com_z{0.24};

  static References from_state(const RobotState& s, const TrajoptParams& p) {
    return {Eigen::Vector3d(s.user_vel.x, s.user_vel.y, 0.0), p.z_ref};
  }
};

inline constexpr int kPlanSteps = 3;
using StepActions = std::array<Action, kPlanSteps>;
using StepFootholds = std::array<std::vector<Foothold>, kPlanSteps>;

/// Per-node stance flags and world foot positions over the prediction horizon.
struct ContactSchedule {
  double dt{0.04};
  int nodes_per_step{8};
  StepActions actions{};
  std::vector<std::array<bool, 4>> stance;
  std::vector<std::array<Point2, 4>> feet;

  int num_nodes() const { return static_cast<int>(stance.size()); }
  int stance_count(int node) const;
  /// Swing legs of each step, in node order (-1 marks an all-stance step).
  std::vector<Leg> swing_legs(int step) const;
};

/// Touchdown targets for each step, anchored to the hip of the virtually
/// propagated CoM (com_xy + user_vel * step_duration * j).
StepFootholds plan_footholds(const GaitSpec& gait, const StepActions& actions, const RobotState& s,
                             const HipOffsets& hips);

ContactSchedule build_schedule(const GaitSpec& gait, const StepActions& actions,
                               const StepFootholds& footholds, const RobotState& s);
ContactSchedule build_schedule(const GaitSpec& gait, const StepActions& actions,
                               const RobotState& s, const HipOffsets& hips);

struct Trajectory {
  double dt{0.04};
  std::vector<Eigen::Vector3d> com_pos;  // nodes 0..N
  std::vector<Eigen::Vector3d> com_vel;  // nodes 0..N
  std::vector<std::array<Eigen::Vector3d, 4>> forces;  // nodes 0..N-1, zero for swing legs
  double v_opt{0.0};
  bool feasible{false};
  QpStatus status{QpStatus::MaxIterations};
  int iterations{0};
  Eigen::VectorXd qp_x;
  Eigen::VectorXd qp_y;

  int num_nodes() const { return static_cast<int>(forces.size()); }
  Eigen::Vector3d net_force(int node) const;
};

/// Stage cost of node k (uses the state reached at k + 1 and the forces
/// applied over [k, k + 1)). Moment arms are taken about the reference CoM
/// path p0 + v_ref t at height z_ref.
double stage_cost(const Trajectory& traj, const ContactSchedule& sched, const References& ref,
                  const TrajoptParams& params, int k);

class TrajectoryOptimizer {
 public:
  explicit TrajectoryOptimizer(TrajoptParams params = {});

  /// Solve the force QP; on non-convergence the trajectory is flagged
  /// infeasible and v_opt = v_big.
  Trajectory optimize(const RobotState& s, const ContactSchedule& sched, const References& ref,
                      const QpWarmStart* warm = nullptr);

  /// Condensed QP in the stacked stance forces. `constant` receives the
  /// offset such that v_opt = objective(x) + constant.
  QpProblem assemble(const RobotState& s, const ContactSchedule& sched, const References& ref,
                     double& constant);

  /// Integrate the point-mass dynamics for given forces.
  Trajectory rollout(const RobotState& s, const ContactSchedule& sched,
                     const Eigen::VectorXd& x) const;

  const TrajoptParams& params() const { return params_; }

 private:
  void ensure_gram(int nodes, double dt);

  TrajoptParams params_;
  QpSolver solver_;
  int gram_nodes_{-1};
  double gram_dt_{0.0};
  Eigen::MatrixXd gram_v_;
  Eigen::MatrixXd gram_z_;
  std::vector<std::array<int, 4>> var_base_;
};

/// Rows: node,t,px,py,pz,vx,vy,vz, then fx,fy,fz for LF,RF,LH,RH.
void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path,
                          const std::string& header_comment = {});

}  // namespace contactnet
