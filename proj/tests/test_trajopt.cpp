#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "contactnet/trajopt.hpp"
#include "oracles.hpp"

using namespace contactnet;

namespace {
const StepActions kHolds{Action::hold(), Action::hold(), Action::hold()};

// Stacked stance forces in schedule order, nodes then legs.
int num_force_vars(const ContactSchedule& sched) {
  int n = 0;
  for (int k = 0; k < sched.num_nodes(); ++k) n += 3 * sched.stance_count(k);
  return n;
}

// Horizon objective written from the model definition: semi-implicit Euler
// point mass, velocity and height tracking, force tracking around an even
// weight split and the moment about the reference path.
double horizon_cost(const RobotState& s, const ContactSchedule& sched, const References& ref,
                    const TrajoptParams& p, const Eigen::VectorXd& x) {
  Eigen::Vector3d pos(s.com_xy_world.x, s.com_xy_world.y, s.com_z);
  const Eigen::Vector3d p0 = pos;
  Eigen::Vector3d vel = s.com_vel;
  double cost = 0.0;
  int b = 0;
  for (int k = 0; k < sched.num_nodes(); ++k) {
    const int n_st = sched.stance_count(k);
    Eigen::Vector3d total = Eigen::Vector3d::Zero(), moment = Eigen::Vector3d::Zero();
    for (int leg = 0; leg < 4; ++leg) {
      if (!sched.stance[k][leg]) continue;
      const Eigen::Vector3d f = x.segment<3>(b);
      b += 3;
      total += f;
      const double t = k * sched.dt;
      const Eigen::Vector3d r(sched.feet[k][leg].x - (p0.x() + ref.com_vel.x() * t),
                              sched.feet[k][leg].y - (p0.y() + ref.com_vel.y() * t), -ref.com_z);
      moment += r.cross(f);
      cost += p.w_f * (f - Eigen::Vector3d(0, 0, p.mass * p.gravity / n_st)).squaredNorm();
    }
    cost += p.w_tau * moment.squaredNorm();
    vel += sched.dt * (total / p.mass - Eigen::Vector3d(0, 0, p.gravity));
    pos += sched.dt * vel;
    cost += p.w_v * (vel - ref.com_vel).squaredNorm();
    cost += p.w_z * (pos.z() - ref.com_z) * (pos.z() - ref.com_z);
  }
  return cost;
}

struct OracleSolution {
  double value;
  Eigen::VectorXd x;
  bool ok;
};

// Recovers the quadratic by polarization of horizon_cost and solves it with
// the primal active-set method from the even weight split.
OracleSolution independent_solve(const RobotState& s, const ContactSchedule& sched, const References& ref,
                                 const TrajoptParams& p) {
  const int n = num_force_vars(sched);
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(n);
  const double c0 = horizon_cost(s, sched, ref, p, x0);
  Eigen::VectorXd ce(n), cme(n);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd e = x0;
    e[i] = 1.0;
    ce[i] = horizon_cost(s, sched, ref, p, e);
    e[i] = -1.0;
    cme[i] = horizon_cost(s, sched, ref, p, e);
  }
  Eigen::MatrixXd P(n, n);
  Eigen::VectorXd q(n);
  for (int i = 0; i < n; ++i) {
    P(i, i) = ce[i] + cme[i] - 2 * c0;
    q[i] = 0.5 * (ce[i] - cme[i]);
    for (int j = 0; j < i; ++j) {
      Eigen::VectorXd e = x0;
      e[i] = 1.0;
      e[j] = 1.0;
      P(i, j) = P(j, i) = horizon_cost(s, sched, ref, p, e) - ce[i] - ce[j] + c0;
    }
  }
  // Friction pyramid and normal bounds.
  const int nf = n / 3;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(3 * nf, n);
  Eigen::VectorXd l(3 * nf), u(3 * nf);
  const double inf = std::numeric_limits<double>::infinity();
  for (int f = 0; f < nf; ++f) {
    // fx - mu fz <= 0, -fx - mu fz <= 0 merged as |fx| <= mu fz using two rows.
    A(3 * f, 3 * f) = 1;
    A(3 * f, 3 * f + 2) = -p.mu;
    l[3 * f] = -inf;
    u[3 * f] = 0;
    A(3 * f + 1, 3 * f) = -1;
    A(3 * f + 1, 3 * f + 2) = -p.mu;
    l[3 * f + 1] = -inf;
    u[3 * f + 1] = 0;
    A(3 * f + 2, 3 * f + 2) = 1;
    l[3 * f + 2] = 0;
    u[3 * f + 2] = p.f_max;
  }
  Eigen::MatrixXd Ay = Eigen::MatrixXd::Zero(2 * nf, n);
  Eigen::VectorXd ly(2 * nf), uy(2 * nf);
  for (int f = 0; f < nf; ++f) {
    Ay(2 * f, 3 * f + 1) = 1;
    Ay(2 * f, 3 * f + 2) = -p.mu;
    Ay(2 * f + 1, 3 * f + 1) = -1;
    Ay(2 * f + 1, 3 * f + 2) = -p.mu;
    ly[2 * f] = ly[2 * f + 1] = -inf;
    uy[2 * f] = uy[2 * f + 1] = 0;
  }
  Eigen::MatrixXd Aall(5 * nf, n);
  Aall << A, Ay;
  Eigen::VectorXd lall(5 * nf), uall(5 * nf);
  lall << l, ly;
  uall << u, uy;
  Eigen::VectorXd x(n);
  int b = 0;
  for (int k = 0; k < sched.num_nodes(); ++k) {
    for (int i = 0; i < sched.stance_count(k); ++i, b += 3) {
      x.segment<3>(b) = Eigen::Vector3d(0, 0, p.mass * p.gravity / sched.stance_count(k));
    }
  }
  const bool ok = oracle::primal_active_set(P, q, Aall, lall, uall, x);
  return {horizon_cost(s, sched, ref, p, x), x, ok};
}

RobotState random_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  auto s = RobotState::nominal({u(rng), u(rng)}, 0.24);
  for (auto& f : s.foot_xy_in_com) f += Point2{0.03 * u(rng), 0.03 * u(rng)};
  s.com_z = 0.24 + 0.01 * u(rng);
  s.com_vel = {0.1 * u(rng), 0.1 * u(rng), 0.1 * u(rng)};
  s.user_vel = {0.1 * u(rng), 0.1 * u(rng)};
  return s;
}
}  // namespace

TEST(Schedule, WalkTiming) {
  const auto g = GaitSpec::walk();
  auto s = RobotState::nominal({0, 0}, 0.24);
  StepActions acts{action_at(g, 3), action_at(g, 25 + 7), action_at(g, 50 + 12)};
  auto sched = build_schedule(g, acts, s, HipOffsets{});
  ASSERT_EQ(sched.num_nodes(), 24);
  int all_stance = 0;
  for (int k = 0; k < 24; ++k) {
    const int local = k % 8;
    const int swinging = 4 - sched.stance_count(k);
    all_stance += swinging == 0;
    if (local >= 3 && local <= 6) {
      EXPECT_EQ(swinging, 1);
      EXPECT_FALSE(sched.stance[k][leg_index(acts[k / 8].legs[0])]);
    } else {
      EXPECT_EQ(swinging, 0);
    }
  }
  EXPECT_EQ(all_stance, 12);
  // Touchdown: the swing foot sits at its target from node 7 of its step.
  auto targets = plan_footholds(g, acts, s, HipOffsets{});
  EXPECT_EQ(sched.feet[7][0], targets[0][0].second);
  EXPECT_EQ(sched.feet[6][0], s.foot_world(Leg::LF));
}

TEST(Schedule, TrotPairSwingsTogether) {
  const auto g = GaitSpec::trot();
  auto s = RobotState::nominal({0, 0}, 0.24);
  StepActions acts{action_at(g, 40), action_at(g, 81 + 40), action_at(g, 10)};
  auto sched = build_schedule(g, acts, s, HipOffsets{});
  for (int k = 3; k <= 6; ++k) {
    EXPECT_FALSE(sched.stance[k][leg_index(Leg::LF)]);
    EXPECT_FALSE(sched.stance[k][leg_index(Leg::RH)]);
    EXPECT_TRUE(sched.stance[k][leg_index(Leg::RF)]);
    EXPECT_TRUE(sched.stance[k][leg_index(Leg::LH)]);
    EXPECT_FALSE(sched.stance[k + 8][leg_index(Leg::RF)]);
    EXPECT_FALSE(sched.stance[k + 8][leg_index(Leg::LH)]);
  }
}

TEST(Trajopt, StandingStatics) {
  TrajoptParams p;
  TrajectoryOptimizer opt(p);
  auto s = RobotState::nominal({0, 0}, p.z_ref);
  auto sched = build_schedule(GaitSpec::walk(), kHolds, s, HipOffsets{});
  auto t = opt.optimize(s, sched, References{}, nullptr);
  ASSERT_TRUE(t.feasible);
  for (int k = 0; k < t.num_nodes(); ++k) {
    EXPECT_NEAR(t.net_force(k).z(), 2.2 * 9.81, 1e-4);
    EXPECT_LT(t.com_vel[k + 1].norm(), 1e-6);
  }
  EXPECT_LT(t.v_opt, 1e-8);
}

TEST(Trajopt, StaticsWithoutTracking) {
  TrajoptParams p;
  p.w_v = 0.0;
  p.w_z = 0.0;
  TrajectoryOptimizer opt(p);
  auto s = RobotState::nominal({0.4, -0.2}, p.z_ref);
  auto sched = build_schedule(GaitSpec::walk(), kHolds, s, HipOffsets{});
  auto t = opt.optimize(s, sched, References{Eigen::Vector3d::Zero(), p.z_ref}, nullptr);
  ASSERT_TRUE(t.feasible);
  for (int k = 0; k < t.num_nodes(); ++k) EXPECT_NEAR(t.net_force(k).z(), 2.2 * 9.81, 1e-4);
}

TEST(Trajopt, FrictionAndDynamics) {
  std::mt19937_64 rng(31);
  TrajoptParams p;
  TrajectoryOptimizer opt(p);
  const auto g = GaitSpec::walk();
  for (int trial = 0; trial < 10; ++trial) {
    auto s = random_state(rng);
    StepActions acts{action_at(g, static_cast<int>(rng() % 100)), Action::hold(), Action::hold()};
    auto sched = build_schedule(g, acts, s, HipOffsets{});
    auto t = opt.optimize(s, sched, References::from_state(s, p), nullptr);
    ASSERT_TRUE(t.feasible);
    for (int k = 0; k < t.num_nodes(); ++k) {
      for (int leg = 0; leg < 4; ++leg) {
        const auto& f = t.forces[k][leg];
        if (!sched.stance[k][leg]) {
          EXPECT_EQ(f.norm(), 0.0);
          continue;
        }
        EXPECT_LE(std::abs(f.x()), p.mu * f.z() + 1e-6);
        EXPECT_LE(std::abs(f.y()), p.mu * f.z() + 1e-6);
        EXPECT_GE(f.z(), -1e-6);
        EXPECT_LE(f.z(), p.f_max + 1e-6);
      }
      const Eigen::Vector3d acc = t.net_force(k) / p.mass - Eigen::Vector3d(0, 0, p.gravity);
      EXPECT_LT((t.com_vel[k + 1] - t.com_vel[k] - t.dt * acc).norm(), 1e-6);
      EXPECT_LT((t.com_pos[k + 1] - t.com_pos[k] - t.dt * t.com_vel[k + 1]).norm(), 1e-6);
    }
  }
}

TEST(Trajopt, HorizonEqualsStageSum) {
  std::mt19937_64 rng(32);
  TrajoptParams p;
  TrajectoryOptimizer opt(p);
  const auto g = GaitSpec::trot();
  for (int trial = 0; trial < 5; ++trial) {
    auto s = random_state(rng);
    StepActions acts{action_at(g, static_cast<int>(rng() % 162)), Action::hold(), Action::hold()};
    auto sched = build_schedule(g, acts, s, HipOffsets{});
    const auto ref = References::from_state(s, p);
    auto t = opt.optimize(s, sched, ref, nullptr);
    ASSERT_TRUE(t.feasible);
    double sum = 0.0;
    for (int k = 0; k < t.num_nodes(); ++k) sum += stage_cost(t, sched, ref, p, k);
    EXPECT_NEAR(sum, t.v_opt, 1e-8 * std::max(1.0, std::abs(sum)));
    EXPECT_NEAR(horizon_cost(s, sched, ref, p, t.qp_x), t.v_opt, 1e-8 * std::max(1.0, std::abs(sum)));
  }
}

TEST(Trajopt, MatchesIndependentQp) {
  std::mt19937_64 rng(33);
  TrajoptParams p;
  TrajectoryOptimizer opt(p);
  const auto g = GaitSpec::walk();
  for (int trial = 0; trial < 10; ++trial) {
    auto s = random_state(rng);
    StepActions acts{action_at(g, static_cast<int>(rng() % 100)), Action::hold(), Action::hold()};
    auto sched = build_schedule(g, acts, s, HipOffsets{});
    const auto ref = References::from_state(s, p);
    auto t = opt.optimize(s, sched, ref, nullptr);
    ASSERT_TRUE(t.feasible);
    auto o = independent_solve(s, sched, ref, p);
    ASSERT_TRUE(o.ok);
    EXPECT_NEAR(t.v_opt, o.value, 1e-4) << "trial " << trial;
  }
}

TEST(Trajopt, WarmStartEquivalent) {
  std::mt19937_64 rng(34);
  TrajoptParams p;
  TrajectoryOptimizer opt(p);
  const auto g = GaitSpec::walk();
  for (int trial = 0; trial < 5; ++trial) {
    auto s = random_state(rng);
    StepActions acts{action_at(g, static_cast<int>(rng() % 100)), Action::hold(), Action::hold()};
    auto sched = build_schedule(g, acts, s, HipOffsets{});
    const auto ref = References::from_state(s, p);
    auto cold = opt.optimize(s, sched, ref, nullptr);
    QpWarmStart w{cold.qp_x, cold.qp_y};
    auto warm = opt.optimize(s, sched, ref, &w);
    EXPECT_NEAR(cold.v_opt, warm.v_opt, 1e-4);
    // Warm start from a neighbouring action's solution.
    StepActions acts2{action_at(g, (acts[0].index + 1) % 100), Action::hold(), Action::hold()};
    auto sched2 = build_schedule(g, acts2, s, HipOffsets{});
    auto cold2 = opt.optimize(s, sched2, ref, nullptr);
    auto warm2 = opt.optimize(s, sched2, ref, &w);
    EXPECT_NEAR(cold2.v_opt, warm2.v_opt, 1e-4);
  }
}

TEST(Trajopt, NonConvergenceGivesBigValue) {
  TrajoptParams p;
  p.qp.max_iter = 1;
  p.qp.polish = false;
  p.qp.polish_interval = 0;
  p.qp.unconstrained_start = false;
  TrajectoryOptimizer opt(p);
  auto s = RobotState::nominal({0, 0}, 0.24);
  s.com_vel = {0.3, 0.0, 0.0};
  auto sched = build_schedule(GaitSpec::walk(), kHolds, s, HipOffsets{});
  auto t = opt.optimize(s, sched, References{}, nullptr);
  EXPECT_FALSE(t.feasible);
  EXPECT_EQ(t.v_opt, p.v_big);
}
