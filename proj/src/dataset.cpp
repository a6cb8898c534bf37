#include "contactnet/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "binio.hpp"
#include "contactnet/errors.hpp"
#include "contactnet/oracle.hpp"

namespace contactnet {

namespace {
constexpr char kMagic[5] = "CNDS";
constexpr std::uint32_t kVersion = 1;
}  // namespace

RobotState sample_initial_state(std::uint64_t seed, const EpisodeParams& p) {
  std::mt19937_64 rng(seed);
  auto uni = [&](double r) { return std::uniform_real_distribution<double>(-r, r)(rng); };
  RobotState s = RobotState::nominal({0.0, 0.0}, p.trajopt.z_ref, p.hips);
  for (auto& f : s.foot_xy_in_com) f += Point2{uni(p.foot_jitter), uni(p.foot_jitter)};
  s.com_vel = {uni(p.com_vel_range), uni(p.com_vel_range), uni(p.com_vel_range)};
  s.com_z = p.trajopt.z_ref + uni(p.com_z_jitter);
  s.user_vel = {uni(p.user_vel_range), uni(p.user_vel_range)};
  return s;
}

Episode run_episode(std::uint64_t seed, std::uint32_t episode_id, const EpisodeParams& p) {
  const GaitSpec gait = GaitSpec::for_kind(p.gait);
  Oracle oracle(gait, p.weights, p.trajopt, p.hips);
  TrajectoryOptimizer optimizer(p.trajopt);

  Episode ep;
  ep.seed = seed;
  ep.initial = sample_initial_state(seed, p);
  ep.user_vel = ep.initial.user_vel;

  RobotState s = ep.initial;
  double t = 0.0;
  for (int k = 1; k <= p.max_steps; ++k) {
    RankRecord rec;
    rec.episode = episode_id;
    rec.step = static_cast<std::uint32_t>(k - 1);
    rec.input = s.to_input();
    rec.costs = oracle.rank_all(s);
    const Action best = action_at(gait, best_action(rec.costs));
    ep.records.push_back(std::move(rec));

    const StepActions steps{best, Action::hold(), Action::hold()};
    const ContactSchedule sched = build_schedule(gait, steps, s, p.hips);
    const Trajectory traj = optimizer.optimize(s, sched, References::from_state(s, p.trajopt));
    const HorizonResult res = execute_horizon(s, traj, sched, p.trajopt, p.executor, t);
    ep.steps_executed = k;
    t += gait.step_duration();
    s = res.state;
    const bool fell = res.fell || (p.scripted_fall && p.scripted_fall(k));
    if (fell) {
      ep.terminated_by = Termination::Fall;
      const std::size_t keep =
          ep.records.size() > kFallTruncation ? ep.records.size() - kFallTruncation : 0;
      ep.records.resize(keep);
      break;
    }
  }
  return ep;
}

Dataset generate_dataset(int episodes, std::uint64_t base_seed, const EpisodeParams& p,
                         GenerationSummary* summary,
                         const std::function<void(int, const Episode&)>& progress) {
  if (episodes < 0) throw InvalidInput("generate_dataset: negative episode count");
  Dataset d;
  d.gait = p.gait;
  d.num_actions = action_count(GaitSpec::for_kind(p.gait));
  GenerationSummary sum;
  for (int e = 0; e < episodes; ++e) {
    Episode ep = run_episode(base_seed + static_cast<std::uint64_t>(e), static_cast<std::uint32_t>(e), p);
    ++sum.episodes;
    if (ep.terminated_by == Termination::Fall) ++sum.falls;
    if (progress) progress(e, ep);
    for (auto& r : ep.records) d.records.push_back(std::move(r));
  }
  sum.records = d.records.size();
  if (summary) *summary = sum;
  return d;
}

NormalizationBounds NormalizationBounds::from_records(const std::vector<RankRecord>& records,
                                                      double padding, double min_width) {
  if (records.empty()) throw InvalidInput("normalization bounds need at least one record");
  NormalizationBounds b;
  b.lo.fill(std::numeric_limits<double>::infinity());
  b.hi.fill(-std::numeric_limits<double>::infinity());
  for (const auto& r : records) {
    for (int i = 0; i < kInputDim; ++i) {
      b.lo[i] = std::min(b.lo[i], r.input[i]);
      b.hi[i] = std::max(b.hi[i], r.input[i]);
    }
  }
  for (int i = 0; i < kInputDim; ++i) {
    const double mid = 0.5 * (b.lo[i] + b.hi[i]);
    const double half = 0.5 * std::max((b.hi[i] - b.lo[i]) * (1.0 + 2.0 * padding), min_width);
    b.lo[i] = mid - half;
    b.hi[i] = mid + half;
  }
  return b;
}

void NormalizationBounds::validate() const {
  for (int i = 0; i < kInputDim; ++i) {
    if (!(std::isfinite(lo[i]) && std::isfinite(hi[i]) && lo[i] < hi[i])) {
      throw InvalidInput("normalization bounds: need finite min < max for component " +
                         std::to_string(i));
    }
  }
}

InputVector normalize(const InputVector& u, const NormalizationBounds& b) {
  InputVector x;
  for (int i = 0; i < kInputDim; ++i) {
    const double v = 2.0 * (u[i] - b.lo[i]) / (b.hi[i] - b.lo[i]) - 1.0;
    x[i] = std::clamp(v, -1.0, 1.0);
  }
  return x;
}

InputVector denormalize(const InputVector& x, const NormalizationBounds& b) {
  InputVector u;
  for (int i = 0; i < kInputDim; ++i) u[i] = b.lo[i] + 0.5 * (x[i] + 1.0) * (b.hi[i] - b.lo[i]);
  return u;
}

std::pair<std::vector<RankRecord>, std::vector<RankRecord>> split(
    const std::vector<RankRecord>& records, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw InvalidInput("split: fraction must lie in (0, 1)");
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train =
      static_cast<std::size_t>(std::floor(fraction * static_cast<double>(records.size()) + 1e-9));
  std::pair<std::vector<RankRecord>, std::vector<RankRecord>> out;
  out.first.reserve(n_train);
  out.second.reserve(records.size() - n_train);
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_train ? out.first : out.second).push_back(records[order[i]]);
  }
  return out;
}

void save_dataset(const Dataset& d, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os.write(kMagic, 4);
  binio::put<std::uint32_t>(os, kVersion);
  binio::put<std::uint32_t>(os, static_cast<std::uint32_t>(d.gait));
  binio::put<std::uint32_t>(os, static_cast<std::uint32_t>(d.num_actions));
  binio::put<std::uint64_t>(os, d.records.size());
  binio::put<std::uint32_t>(os, static_cast<std::uint32_t>(d.meta.size()));
  binio::put_bytes(os, d.meta);
  for (const auto& r : d.records) {
    if (static_cast<int>(r.costs.size()) != d.num_actions) {
      throw InvalidInput("save_dataset: record cost vector has wrong length");
    }
    binio::put<std::uint32_t>(os, r.episode);
    binio::put<std::uint32_t>(os, r.step);
    for (double v : r.input) binio::put<double>(os, v);
    for (double v : r.costs) binio::put<double>(os, v);
  }
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ParseError("cannot open dataset " + path.string());
  binio::expect_magic(is, kMagic);
  const auto version = binio::get<std::uint32_t>(is, "version");
  if (version != kVersion) throw ParseError("unsupported dataset version " + std::to_string(version));
  Dataset d;
  const auto gait = binio::get<std::uint32_t>(is, "gait");
  if (gait > 1) throw ParseError("unknown gait tag " + std::to_string(gait));
  d.gait = static_cast<GaitKind>(gait);
  d.num_actions = static_cast<int>(binio::get<std::uint32_t>(is, "action count"));
  if (d.num_actions != action_count(GaitSpec::for_kind(d.gait))) {
    throw ParseError("action count does not match gait " + gait_name(d.gait));
  }
  const auto count = binio::get<std::uint64_t>(is, "record count");
  const auto meta_len = binio::get<std::uint32_t>(is, "meta length");
  if (meta_len > (1u << 24)) throw ParseError("implausible meta length");
  d.meta = binio::get_bytes(is, meta_len, "meta");

  const auto here = is.tellg();
  is.seekg(0, std::ios::end);
  const auto remaining = static_cast<std::uint64_t>(is.tellg() - here);
  is.seekg(here);
  const std::uint64_t rec_size = 8 + 8 * (kInputDim + static_cast<std::uint64_t>(d.num_actions));
  if (remaining != count * rec_size) {
    throw ParseError("dataset payload size mismatch: expected " + std::to_string(count) +
                     " records");
  }
  d.records.resize(count);
  for (auto& r : d.records) {
    r.episode = binio::get<std::uint32_t>(is, "episode");
    r.step = binio::get<std::uint32_t>(is, "step");
    for (double& v : r.input) v = binio::get<double>(is, "input");
    r.costs.resize(d.num_actions);
    for (double& v : r.costs) v = binio::get<double>(is, "cost");
  }
  return d;
}

void export_dataset_csv(const Dataset& d, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os.precision(17);
  os << "episode,step";
  for (int i = 0; i < kInputDim; ++i) os << ",u" << i;
  for (int i = 0; i < d.num_actions; ++i) os << ",v" << i;
  os << '\n';
  for (const auto& r : d.records) {
    os << r.episode << ',' << r.step;
    for (double v : r.input) os << ',' << v;
    for (double v : r.costs) os << ',' << v;
    os << '\n';
  }
}

}  // namespace contactnet
