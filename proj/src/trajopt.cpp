#include "contactnet/trajopt.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "contactnet/errors.hpp"

namespace contactnet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::Matrix3d skew(const Eigen::Vector3d& r) {
  Eigen::Matrix3d s;
  s << 0.0, -r.z(), r.y(), r.z(), 0.0, -r.x(), -r.y(), r.x(), 0.0;
  return s;
}

Eigen::Vector3d moment_arm(const ContactSchedule& sched, const Eigen::Vector3d& p0,
                           const References& ref, int k, Leg l) {
  const Point2 f = sched.feet[k][leg_index(l)];
  const double t = k * sched.dt;
  return {f.x - (p0.x() + ref.com_vel.x() * t), f.y - (p0.y() + ref.com_vel.y() * t), -ref.com_z};
}

}  // namespace

int ContactSchedule::stance_count(int node) const {
  int c = 0;
  for (bool b : stance[node]) c += b ? 1 : 0;
  return c;
}

std::vector<Leg> ContactSchedule::swing_legs(int step) const {
  std::vector<Leg> out;
  const auto& a = actions[step];
  for (int i = 0; i < a.num_legs; ++i) out.push_back(a.legs[i]);
  return out;
}

StepFootholds plan_footholds(const GaitSpec& gait, const StepActions& actions, const RobotState& s,
                             const HipOffsets& hips) {
  StepFootholds out;
  RobotState virt = s;
  for (int j = 0; j < kPlanSteps; ++j) {
    out[j] = action_footholds(gait, actions[j], virt, hips);
    virt.com_xy_world += virt.user_vel * gait.step_duration();
  }
  return out;
}

ContactSchedule build_schedule(const GaitSpec& gait, const StepActions& actions,
                               const StepFootholds& footholds, const RobotState& s) {
  ContactSchedule sched;
  sched.dt = gait.node_dt;
  sched.nodes_per_step = gait.nodes_per_step();
  sched.actions = actions;
  std::array<Point2, 4> feet;
  for (Leg l : kAllLegs) feet[leg_index(l)] = s.foot_world(l);

  const int lift = gait.stance_nodes_pre;
  const int land = gait.stance_nodes_pre + gait.swing_nodes;
  for (int j = 0; j < kPlanSteps; ++j) {
    if (static_cast<int>(footholds[j].size()) != actions[j].num_legs) {
      throw InvalidInput("build_schedule: foothold count does not match action");
    }
    for (int n = 0; n < sched.nodes_per_step; ++n) {
      if (n == land) {
        for (const auto& [leg, p] : footholds[j]) feet[leg_index(leg)] = p;
      }
      std::array<bool, 4> st{true, true, true, true};
      if (n >= lift && n < land) {
        for (int i = 0; i < actions[j].num_legs; ++i) st[leg_index(actions[j].legs[i])] = false;
      }
      sched.stance.push_back(st);
      sched.feet.push_back(feet);
    }
  }
  return sched;
}

ContactSchedule build_schedule(const GaitSpec& gait, const StepActions& actions,
                               const RobotState& s, const HipOffsets& hips) {
  return build_schedule(gait, actions, plan_footholds(gait, actions, s, hips), s);
}

Eigen::Vector3d Trajectory::net_force(int node) const {
  Eigen::Vector3d f = Eigen::Vector3d::Zero();
  for (const auto& fi : forces[node]) f += fi;
  return f;
}

double stage_cost(const Trajectory& traj, const ContactSchedule& sched, const References& ref,
                  const TrajoptParams& params, int k) {
  const Eigen::Vector3d& p0 = traj.com_pos[0];
  double c = params.w_v * (traj.com_vel[k + 1] - ref.com_vel).squaredNorm();
  const double ez = traj.com_pos[k + 1].z() - ref.com_z;
  c += params.w_z * ez * ez;
  const int n_st = sched.stance_count(k);
  Eigen::Vector3d moment = Eigen::Vector3d::Zero();
  for (Leg l : kAllLegs) {
    if (!sched.stance[k][leg_index(l)]) continue;
    const Eigen::Vector3d& f = traj.forces[k][leg_index(l)];
    const Eigen::Vector3d f_ref(0.0, 0.0, params.mass * params.gravity / n_st);
    c += params.w_f * (f - f_ref).squaredNorm();
    moment += moment_arm(sched, p0, ref, k, l).cross(f);
  }
  c += params.w_tau * moment.squaredNorm();
  return c;
}

TrajectoryOptimizer::TrajectoryOptimizer(TrajoptParams params)
    : params_(params), solver_(params.qp) {}

void TrajectoryOptimizer::ensure_gram(int nodes, double dt) {
  if (nodes == gram_nodes_ && dt == gram_dt_) return;
  const double m = params_.mass;
  const double cv = dt / m;
  const double cp = dt * dt / m;
  gram_v_.resize(nodes, nodes);
  gram_z_.resize(nodes, nodes);
  for (int j = 0; j < nodes; ++j) {
    for (int jj = 0; jj < nodes; ++jj) {
      gram_v_(j, jj) = cv * cv * (nodes - std::max(j, jj));
      double acc = 0.0;
      for (int k = 1; k <= nodes; ++k) {
        acc += std::max(0, k - j) * std::max(0, k - jj);
      }
      gram_z_(j, jj) = cp * cp * acc;
    }
  }
  gram_nodes_ = nodes;
  gram_dt_ = dt;
}

QpProblem TrajectoryOptimizer::assemble(const RobotState& s, const ContactSchedule& sched,
                                        const References& ref, double& constant) {
  const int N = sched.num_nodes();
  const double dt = sched.dt;
  const double m = params_.mass;
  const double g = params_.gravity;
  ensure_gram(N, dt);

  var_base_.assign(N, {-1, -1, -1, -1});
  int n = 0;
  for (int k = 0; k < N; ++k) {
    if (sched.stance_count(k) == 0) throw InvalidInput("trajopt: node without stance legs");
    for (Leg l : kAllLegs) {
      if (sched.stance[k][leg_index(l)]) {
        var_base_[k][leg_index(l)] = n;
        n += 3;
      }
    }
  }

  // Zero-force drift and its tracking errors.
  const Eigen::Vector3d p0(s.com_xy_world.x, s.com_xy_world.y, s.com_z);
  const Eigen::Vector3d gvec(0.0, 0.0, -g);
  std::vector<Eigen::Vector3d> ev(N + 1);
  std::vector<double> ez(N + 1);
  Eigen::Vector3d v = s.com_vel;
  Eigen::Vector3d p = p0;
  constant = 0.0;
  for (int k = 1; k <= N; ++k) {
    v += dt * gvec;
    p += dt * v;
    ev[k] = v - ref.com_vel;
    ez[k] = p.z() - ref.com_z;
    constant += params_.w_v * ev[k].squaredNorm() + params_.w_z * ez[k] * ez[k];
  }

  // Linear tracking coefficient per node and axis.
  const double cv = dt / m;
  const double cp = dt * dt / m;
  Eigen::MatrixXd lin(N, 3);
  for (int j = 0; j < N; ++j) {
    Eigen::Vector3d acc = Eigen::Vector3d::Zero();
    double accz = 0.0;
    for (int k = j + 1; k <= N; ++k) {
      acc += ev[k];
      accz += (k - j) * ez[k];
    }
    lin.row(j) = (2.0 * params_.w_v * cv * acc).transpose();
    lin(j, 2) += 2.0 * params_.w_z * cp * accz;
  }

  QpProblem qp;
  qp.P = Eigen::MatrixXd::Zero(n, n);
  qp.q = Eigen::VectorXd::Zero(n);

  for (int j = 0; j < N; ++j) {
    for (Leg li : kAllLegs) {
      const int bi = var_base_[j][leg_index(li)];
      if (bi < 0) continue;
      for (int jj = 0; jj < N; ++jj) {
        const double tv = 2.0 * params_.w_v * gram_v_(j, jj);
        const double tz = 2.0 * params_.w_z * gram_z_(j, jj);
        for (Leg lj : kAllLegs) {
          const int bj = var_base_[jj][leg_index(lj)];
          if (bj < 0) continue;
          qp.P(bi, bj) += tv;
          qp.P(bi + 1, bj + 1) += tv;
          qp.P(bi + 2, bj + 2) += tv + tz;
        }
      }
      qp.q.segment<3>(bi) += lin.row(j).transpose();
    }
  }

  for (int k = 0; k < N; ++k) {
    const int n_st = sched.stance_count(k);
    const double fz_ref = m * g / n_st;
    std::array<Eigen::Matrix3d, 4> S;
    for (Leg l : kAllLegs) {
      const int b = var_base_[k][leg_index(l)];
      if (b < 0) continue;
      S[leg_index(l)] = skew(moment_arm(sched, p0, ref, k, l));
      qp.P.block<3, 3>(b, b).diagonal().array() += 2.0 * params_.w_f;
      qp.q[b + 2] -= 2.0 * params_.w_f * fz_ref;
      constant += params_.w_f * fz_ref * fz_ref;
    }
    for (Leg la : kAllLegs) {
      const int ba = var_base_[k][leg_index(la)];
      if (ba < 0) continue;
      for (Leg lb : kAllLegs) {
        const int bb = var_base_[k][leg_index(lb)];
        if (bb < 0) continue;
        qp.P.block<3, 3>(ba, bb) +=
            2.0 * params_.w_tau * S[leg_index(la)].transpose() * S[leg_index(lb)];
      }
    }
  }

  // Friction pyramid and normal-force bounds: 5 rows per stance force.
  const int rows = 5 * (n / 3);
  qp.A = Eigen::MatrixXd::Zero(rows, n);
  qp.l.resize(rows);
  qp.u.resize(rows);
  const double mu = params_.mu;
  for (int b = 0, r = 0; b < n; b += 3, r += 5) {
    qp.A(r, b) = 1.0;
    qp.A(r, b + 2) = -mu;
    qp.l[r] = -kInf;
    qp.u[r] = 0.0;
    qp.A(r + 1, b) = 1.0;
    qp.A(r + 1, b + 2) = mu;
    qp.l[r + 1] = 0.0;
    qp.u[r + 1] = kInf;
    qp.A(r + 2, b + 1) = 1.0;
    qp.A(r + 2, b + 2) = -mu;
    qp.l[r + 2] = -kInf;
    qp.u[r + 2] = 0.0;
    qp.A(r + 3, b + 1) = 1.0;
    qp.A(r + 3, b + 2) = mu;
    qp.l[r + 3] = 0.0;
    qp.u[r + 3] = kInf;
    qp.A(r + 4, b + 2) = 1.0;
    qp.l[r + 4] = 0.0;
    qp.u[r + 4] = params_.f_max;
  }
  return qp;
}

Trajectory TrajectoryOptimizer::rollout(const RobotState& s, const ContactSchedule& sched,
                                        const Eigen::VectorXd& x) const {
  const int N = sched.num_nodes();
  Trajectory t;
  t.dt = sched.dt;
  t.forces.assign(N, {Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero(),
                      Eigen::Vector3d::Zero()});
  int b = 0;
  for (int k = 0; k < N; ++k) {
    for (Leg l : kAllLegs) {
      if (!sched.stance[k][leg_index(l)]) continue;
      t.forces[k][leg_index(l)] = x.segment<3>(b);
      b += 3;
    }
  }
  const Eigen::Vector3d gvec(0.0, 0.0, -params_.gravity);
  t.com_pos.resize(N + 1);
  t.com_vel.resize(N + 1);
  t.com_pos[0] = {s.com_xy_world.x, s.com_xy_world.y, s.com_z};
  t.com_vel[0] = s.com_vel;
  for (int k = 0; k < N; ++k) {
    t.com_vel[k + 1] = t.com_vel[k] + sched.dt * (t.net_force(k) / params_.mass + gvec);
    t.com_pos[k + 1] = t.com_pos[k] + sched.dt * t.com_vel[k + 1];
  }
  return t;
}

Trajectory TrajectoryOptimizer::optimize(const RobotState& s, const ContactSchedule& sched,
                                         const References& ref, const QpWarmStart* warm) {
  double constant = 0.0;
  const QpProblem qp = assemble(s, sched, ref, constant);
  const QpSolution sol = solver_.solve(qp, warm);
  Trajectory t = rollout(s, sched, sol.x);
  t.status = sol.status;
  t.iterations = sol.iterations;
  t.qp_x = sol.x;
  t.qp_y = sol.y;
  t.feasible = sol.status == QpStatus::Solved;
  t.v_opt = t.feasible ? sol.objective + constant : params_.v_big;
  return t;
}

void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path,
                          const std::string& header_comment) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "# contactnet trajectory v1";
  if (!header_comment.empty()) out << ' ' << header_comment;
  out << "\nnode,t,px,py,pz,vx,vy,vz";
  for (Leg l : kAllLegs) {
    const auto n = leg_name(l);
    out << ",f" << n << "_x,f" << n << "_y,f" << n << "_z";
  }
  out << '\n';
  out.precision(10);
  for (int k = 0; k <= traj.num_nodes(); ++k) {
    const auto& p = traj.com_pos[k];
    const auto& v = traj.com_vel[k];
    out << k << ',' << k * traj.dt << ',' << p.x() << ',' << p.y() << ',' << p.z() << ','
        << v.x() << ',' << v.y() << ',' << v.z();
    for (int i = 0; i < 4; ++i) {
      const Eigen::Vector3d f =
          k < traj.num_nodes() ? traj.forces[k][i] : Eigen::Vector3d::Zero().eval();
      out << ',' << f.x() << ',' << f.y() << ',' << f.z();
    }
    out << '\n';
  }
}

}  // namespace contactnet
