#include "contactnet/simlab.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <random>

#include "contactnet/cost.hpp"
#include "contactnet/errors.hpp"

namespace contactnet {

void Scenario::validate() const {
  if (!(noise_variance >= 0.0)) throw InvalidInput("scenario: noise variance must be >= 0");
  if (push && !(push->duration >= 0.0)) throw InvalidInput("scenario: push duration must be >= 0");
  if (!(duration > 0.0)) throw InvalidInput("scenario: duration must be positive");
  if (!is_finite(user_vel)) throw InvalidInput("scenario: non-finite user velocity");
  if (!initial.is_valid()) throw InvalidInput("scenario: invalid initial state");
}

RobotState initial_state(Point2 com_xy, Point2 user_vel, const SimParams& params) {
  RobotState s = RobotState::nominal(com_xy, params.trajopt.z_ref, params.hips);
  s.user_vel = user_vel;
  return s;
}

RunMetrics run(const Scenario& scn, const MlpModel& model, const SimParams& params) {
  scn.validate();
  const GaitSpec gait = GaitSpec::for_kind(scn.gait);
  if (model.gait != scn.gait || model.output_dim() != action_count(gait)) {
    throw InvalidInput("run: model does not match gait " + gait_name(scn.gait));
  }
  if (!model.bounds) throw InvalidInput("run: model carries no normalization bounds");

  TrajectoryOptimizer optimizer(params.trajopt);
  const PlannerConfig pc{gait, params.hips, params.margin};
  std::mt19937_64 rng(scn.seed * 0x9E3779B97F4A7C15ULL + 17);
  std::normal_distribution<double> noise(0.0, std::sqrt(scn.noise_variance));

  PushProfile push;
  if (scn.push) {
    const PushSpec p = *scn.push;
    push = [p](double t) -> Eigen::Vector3d {
      return (t >= p.start && t < p.start + p.duration) ? p.force : Eigen::Vector3d::Zero();
    };
  }

  RunMetrics m;
  RobotState s = scn.initial;
  s.user_vel = scn.user_vel;
  const double ts = gait.step_duration();
  double t = 0.0;
  double plan_sum = 0.0;
  long rank_sum = 0;
  int planned = 0;

  while (t < scn.duration - 1e-9) {
    RobotState measured = s;
    if (scn.noise_variance > 0.0) {
      for (int i = 0; i < 3; ++i) measured.com_vel[i] += noise(rng);
    }

    HorizonLog hl;
    hl.t = t;
    StepActions acts{Action::hold(), Action::hold(), Action::hold()};
    StepFootholds feet{};
    const auto t_plan = std::chrono::steady_clock::now();
    try {
      const ContactPlan p = plan(model, measured, scn.terrain, pc);
      acts = p.actions;
      feet = p.footholds;
      hl.rank_position = p.rank_position[0];
      hl.plan_ms = p.wall_time_ms;
      rank_sum += hl.rank_position;
      m.max_rank = std::max(m.max_rank, hl.rank_position);
      ++planned;
    } catch (const NoFeasibleAction&) {
      hl.hold = true;
      hl.plan_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_plan).count();
      ++m.hold_events;
    }
    plan_sum += hl.plan_ms;
    m.max_plan_ms = std::max(m.max_plan_ms, hl.plan_ms);
    hl.action = acts[0];

    for (const auto& f : feet[0]) {
      if (!is_safe(scn.terrain, f.second, params.margin)) ++m.unsafe_footholds;
    }

    const ContactSchedule sched = build_schedule(gait, acts, feet, s);
    const Trajectory traj =
        optimizer.optimize(s, sched, References::from_state(s, params.trajopt));
    const HorizonResult res =
        execute_horizon(s, traj, sched, params.trajopt, params.executor, t, push);

    for (int k = 0; k < sched.nodes_per_step; ++k) {
      NodeLog nl;
      nl.t = t + k * sched.dt;
      nl.com_pos = res.com_pos[k];
      nl.com_vel = res.com_vel[k];
      nl.feet = sched.feet[k];
      nl.stab = res.stab_distance[k];
      m.nodes.push_back(nl);
    }
    for (int i = 0; i < acts[0].num_legs; ++i) {
      m.swings.push_back({acts[0].legs[i], t + gait.stance_nodes_pre * gait.node_dt,
                          t + (gait.stance_nodes_pre + gait.swing_nodes) * gait.node_dt});
    }
    hl.end_stab = res.end_stab_distance;
    hl.max_stab = *std::max_element(res.stab_distance.begin(), res.stab_distance.end());
    m.horizons.push_back(hl);

    s = res.state;
    s.user_vel = scn.user_vel;
    t += ts;
    ++m.steps;
    if (res.fell) {
      m.fell = true;
      m.falls = 1;
      break;
    }
    if (scn.goal_x) {
      bool beyond = true;
      for (Leg l : kAllLegs) beyond = beyond && s.foot_world(l).x > *scn.goal_x;
      if (beyond) {
        m.success = true;
        break;
      }
    }
  }
  if (!scn.goal_x) m.success = !m.fell;
  m.final_time = t;
  if (m.steps > 0) m.mean_plan_ms = plan_sum / m.steps;
  if (planned > 0) m.mean_rank = static_cast<double>(rank_sum) / planned;
  return m;
}

Scenario flat_scenario(GaitKind gait, Point2 user_vel, double duration, const SimParams& params) {
  Scenario s;
  s.name = "flat";
  s.gait = gait;
  s.user_vel = user_vel;
  s.duration = duration;
  s.initial = initial_state({0.0, 0.0}, user_vel, params);
  return s;
}

TerrainMap block_course(int n_removed, std::uint64_t seed) {
  const double width = 0.5;
  const double platform = 0.8;
  return gen_block_field(kBlockFieldLength, width, 0.05, n_removed, seed)
      .with_stone(RectangleStone{{-platform / 2, 0.0}, platform, width})
      .with_stone(RectangleStone{{kBlockFieldLength + platform / 2, 0.0}, platform, width});
}

Scenario block_field_scenario(GaitKind gait, int n_removed, std::uint64_t seed,
                              double noise_variance, const SimParams& params) {
  Scenario s;
  s.name = "blocks_n" + std::to_string(n_removed) + "_s" + std::to_string(seed);
  s.terrain = block_course(n_removed, seed);
  s.gait = gait;
  s.user_vel = {0.05, 0.0};
  s.initial = initial_state({-0.22, 0.0}, s.user_vel, params);
  s.duration = 60.0;
  s.goal_x = kBlockFieldLength;
  s.noise_variance = noise_variance;
  s.seed = seed;
  return s;
}

Scenario stepping_stones_run(const SimParams& params) {
  Scenario s;
  s.name = "stones";
  s.terrain = stepping_stones_scenario();
  s.gait = GaitKind::Walk;
  s.user_vel = {0.05, 0.0};
  // Start on the first stone (start square), finish on the far-most rectangle.
  const RectangleStone* start = nullptr;
  const RectangleStone* end = nullptr;
  for (const auto& st : s.terrain.stones()) {
    if (const auto* r = std::get_if<RectangleStone>(&st)) {
      if (!start || r->center.x < start->center.x) start = r;
      if (!end || r->center.x > end->center.x) end = r;
    }
  }
  if (!start || !end) throw InvalidInput("stones layout needs start and end squares");
  s.initial = initial_state(start->center, s.user_vel, params);
  s.goal_x = end->center.x - end->width / 2;
  s.duration = 60.0;
  return s;
}

bool has_short_period(std::span<const int> seq, int max_period) {
  const int n = static_cast<int>(seq.size());
  for (int p = 1; p <= max_period && p < n; ++p) {
    bool periodic = true;
    for (int i = 0; i + p < n && periodic; ++i) periodic = seq[i] == seq[i + p];
    if (periodic) return true;
  }
  return false;
}

std::vector<int> swing_sequence(const RunMetrics& m, const GaitSpec& gait) {
  std::vector<int> seq;
  for (const auto& h : m.horizons) {
    if (h.hold || h.action.is_hold()) continue;
    if (gait.kind == GaitKind::Walk) {
      seq.push_back(leg_index(h.action.legs[0]));
    } else {
      seq.push_back(h.action.index / (gait.cells_per_leg() * gait.cells_per_leg()));
    }
  }
  return seq;
}

Proportion wilson_interval(int successes, int trials, double z) {
  if (trials <= 0) return {0.0, 0.0, 1.0};
  const double n = trials;
  const double p = successes / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2 * n)) / denom;
  const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom;
  return {p, std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

std::vector<SweepRow> success_rate_sweep(const MlpModel& model, GaitKind gait,
                                         std::span<const int> n_values, int trials, bool noise,
                                         const SimParams& params, std::uint64_t base_seed,
                                         double noise_variance) {
  if (trials < 1) throw InvalidInput("sweep: trials must be >= 1");
  std::vector<SweepRow> rows;
  for (int n : n_values) {
    SweepRow row;
    row.n = n;
    row.noise = noise;
    row.trials = trials;
    for (int t = 0; t < trials; ++t) {
      const std::uint64_t seed = base_seed + 1000ULL * static_cast<std::uint64_t>(n) + t;
      const Scenario scn =
          block_field_scenario(gait, n, seed, noise ? noise_variance : 0.0, params);
      if (run(scn, model, params).success) ++row.successes;
    }
    row.ci = wilson_interval(row.successes, trials);
    rows.push_back(row);
  }
  return rows;
}

std::vector<BenchRow> bench_planning_time(const MlpModel& model, GaitKind gait,
                                          std::span<const int> n_values, int trials,
                                          const SimParams& params, std::uint64_t base_seed,
                                          int warmup) {
  std::vector<BenchRow> rows;
  for (int n : n_values) {
    std::vector<double> samples;
    for (int t = 0; t < trials; ++t) {
      const std::uint64_t seed = base_seed + 1000ULL * static_cast<std::uint64_t>(n) + t;
      const RunMetrics m = run(block_field_scenario(gait, n, seed, 0.0, params), model, params);
      for (std::size_t i = static_cast<std::size_t>(std::max(warmup, 0)); i < m.horizons.size(); ++i) {
        if (!m.horizons[i].hold) samples.push_back(m.horizons[i].plan_ms);
      }
    }
    BenchRow row;
    row.n = n;
    row.samples = static_cast<int>(samples.size());
    if (!samples.empty()) {
      double sum = 0.0;
      for (double v : samples) sum += v;
      row.mean_ms = sum / samples.size();
      double var = 0.0;
      for (double v : samples) var += (v - row.mean_ms) * (v - row.mean_ms);
      row.stddev_ms = std::sqrt(var / samples.size());
      row.max_ms = *std::max_element(samples.begin(), samples.end());
    }
    rows.push_back(row);
  }
  return rows;
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path, const std::string& header_comment) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os.precision(10);
  if (!header_comment.empty()) {
    std::size_t start = 0;
    while (start <= header_comment.size()) {
      const auto end = header_comment.find('\n', start);
      os << "# " << header_comment.substr(start, end - start) << '\n';
      if (end == std::string::npos) break;
      start = end + 1;
    }
  }
  return os;
}

}  // namespace

void write_metrics_csv(const std::vector<std::pair<std::string, RunMetrics>>& runs,
                       const std::filesystem::path& path, const std::string& header_comment) {
  auto os = open_csv(path, header_comment);
  os << "scenario,success,fell,steps,falls,hold_events,unsafe_footholds,mean_plan_ms,max_plan_ms,"
        "mean_rank,max_rank,final_time\n";
  for (const auto& [name, m] : runs) {
    os << name << ',' << m.success << ',' << m.fell << ',' << m.steps << ',' << m.falls << ','
       << m.hold_events << ',' << m.unsafe_footholds << ',' << m.mean_plan_ms << ','
       << m.max_plan_ms << ',' << m.mean_rank << ',' << m.max_rank << ',' << m.final_time << '\n';
  }
}

void write_gait_schedule_csv(const RunMetrics& m, const std::filesystem::path& path,
                             const std::string& header_comment) {
  auto os = open_csv(path, header_comment);
  os << "leg,t_start,t_end,phase\n";
  for (Leg l : kAllLegs) {
    double cursor = 0.0;
    for (const auto& sw : m.swings) {
      if (sw.leg != l) continue;
      if (sw.t_start > cursor) os << leg_name(l) << ',' << cursor << ',' << sw.t_start << ",stance\n";
      os << leg_name(l) << ',' << sw.t_start << ',' << sw.t_end << ",swing\n";
      cursor = sw.t_end;
    }
    if (m.final_time > cursor) os << leg_name(l) << ',' << cursor << ',' << m.final_time << ",stance\n";
  }
}

void write_trajectory_log_csv(const RunMetrics& m, const std::filesystem::path& path,
                              const std::string& header_comment) {
  auto os = open_csv(path, header_comment);
  os << "t,px,py,pz,vx,vy,vz";
  for (Leg l : kAllLegs) os << ',' << leg_name(l) << "_x," << leg_name(l) << "_y";
  os << ",stab\n";
  for (const auto& n : m.nodes) {
    os << n.t;
    for (int i = 0; i < 3; ++i) os << ',' << n.com_pos[i];
    for (int i = 0; i < 3; ++i) os << ',' << n.com_vel[i];
    for (const auto& f : n.feet) os << ',' << f.x << ',' << f.y;
    os << ',' << n.stab << '\n';
  }
}

void write_sweep_csv(const std::vector<SweepRow>& rows, GaitKind gait,
                     const std::filesystem::path& path, const std::string& header_comment) {
  auto os = open_csv(path, header_comment);
  os << "gait,n,noise,trials,successes,success_pct,ci_lo_pct,ci_hi_pct\n";
  for (const auto& r : rows) {
    os << gait_name(gait) << ',' << r.n << ',' << (r.noise ? 1 : 0) << ',' << r.trials << ','
       << r.successes << ',' << 100.0 * r.ci.rate << ',' << 100.0 * r.ci.lo << ','
       << 100.0 * r.ci.hi << '\n';
  }
}

void write_bench_csv(const std::vector<BenchRow>& rows, GaitKind gait,
                     const std::filesystem::path& path, const std::string& header_comment) {
  auto os = open_csv(path, header_comment);
  os << "gait,n,samples,mean_ms,stddev_ms,max_ms\n";
  for (const auto& r : rows) {
    os << gait_name(gait) << ',' << r.n << ',' << r.samples << ',' << r.mean_ms << ','
       << r.stddev_ms << ',' << r.max_ms << '\n';
  }
}

}  // namespace contactnet
