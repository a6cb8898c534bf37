// contactnet command-line front end: data generation, training, closed-loop
// runs, timing benchmarks, success-rate sweeps and terrain export.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "contactnet/config.hpp"
#include "contactnet/dataset.hpp"
#include "contactnet/errors.hpp"
#include "contactnet/net.hpp"
#include "contactnet/planner.hpp"
#include "contactnet/simlab.hpp"
#include "contactnet/terrain.hpp"

namespace fs = std::filesystem;
using namespace contactnet;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitTaskFailure = 1;
constexpr int kExitUsage = 2;

std::vector<int> parse_range(const std::string& spec) {
  std::vector<int> out;
  if (spec.find(':') != std::string::npos) {
    int a = 0, b = 0, step = 1;
    char c1 = 0, c2 = ':';
    std::istringstream in(spec);
    in >> a >> c1 >> b;
    if (!in.eof()) in >> c2 >> step;
    if (in.fail() || !in.eof() || c1 != ':' || c2 != ':' || step <= 0 || b < a) {
      throw InvalidInput("bad range '" + spec + "' (expected start:stop[:step])");
    }
    for (int v = a; v <= b; v += step) out.push_back(v);
  } else {
    std::istringstream in(spec);
    std::string item;
    while (std::getline(in, item, ',')) {
      std::size_t pos = 0;
      int v = 0;
      try {
        v = std::stoi(item, &pos);
      } catch (const std::exception&) {
        throw InvalidInput("bad list entry '" + item + "'");
      }
      if (pos != item.size()) throw InvalidInput("bad list entry '" + item + "'");
      out.push_back(v);
    }
  }
  if (out.empty()) throw InvalidInput("empty range '" + spec + "'");
  for (int v : out) {
    if (v < 0) throw InvalidInput("range values must be >= 0");
  }
  return out;
}

std::string header(const std::string& command, const RunConfig& cfg, const std::string& extra = {}) {
  std::string h = "contactnet " + command + " v1\nconfig: " + cfg.to_json().dump();
  if (!extra.empty()) h += "\n" + extra;
  return h;
}

// Missing inputs are usage errors, not task failures.
void require_file(const std::string& path, const char* what) {
  if (!fs::is_regular_file(path)) throw InvalidInput(std::string(what) + " not found: " + path);
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"contactnet: learned contact planning for a point-mass quadruped"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("-c,--config", config_path, "TOML or JSON configuration file");

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Generate an oracle-ranked dataset on flat ground");
  std::string gen_gait, gen_out, gen_csv;
  int gen_episodes = 0;
  std::uint64_t gen_seed = 0;
  auto* gen_gait_opt = gen->add_option("--gait", gen_gait, "walk or trot");
  auto* gen_ep_opt = gen->add_option("--episodes", gen_episodes, "Number of episodes");
  auto* gen_seed_opt = gen->add_option("--seed", gen_seed, "Base seed");
  gen->add_option("--out", gen_out, "Dataset file")->required();
  gen->add_option("--csv", gen_csv, "Also export the records as CSV");

  // train
  auto* tr = app.add_subcommand("train", "Train the ranking network");
  std::string tr_data, tr_out, tr_loss, tr_gait;
  int tr_epochs = 0, tr_batch = 0;
  double tr_lr = 0.0;
  std::uint64_t tr_seed = 0;
  tr->add_option("--data", tr_data, "Dataset file")->required();
  tr->add_option("--out", tr_out, "Weight file")->required();
  auto* tr_epochs_opt = tr->add_option("--epochs", tr_epochs, "Epochs (default 1000)");
  auto* tr_batch_opt = tr->add_option("--batch", tr_batch, "Batch size (default 100)");
  auto* tr_lr_opt = tr->add_option("--lr", tr_lr, "Learning rate (default 0.001)");
  auto* tr_seed_opt = tr->add_option("--seed", tr_seed, "Seed for init, split and shuffling");
  auto* tr_gait_opt = tr->add_option("--gait", tr_gait, "Expected gait of the dataset");
  tr->add_option("--loss-csv", tr_loss, "Loss history CSV (default <out>.loss.csv)");

  // run
  auto* rn = app.add_subcommand("run", "Closed-loop run of one scenario");
  std::string rn_model, rn_kind, rn_terrain, rn_push, rn_dir = ".";
  double rn_vx = 0, rn_vy = 0, rn_duration = 0, rn_noise = 0;
  int rn_removed = 0;
  std::uint64_t rn_seed = 0;
  rn->add_option("--model", rn_model, "Weight file")->required();
  auto* rn_kind_opt = rn->add_option("--scenario", rn_kind, "flat, stones, blocks or file");
  auto* rn_terrain_opt = rn->add_option("--terrain", rn_terrain, "Terrain JSON (scenario file)");
  auto* rn_vx_opt = rn->add_option("--vx", rn_vx, "User velocity x");
  auto* rn_vy_opt = rn->add_option("--vy", rn_vy, "User velocity y");
  auto* rn_dur_opt = rn->add_option("--duration", rn_duration, "Duration in s");
  auto* rn_removed_opt = rn->add_option("--n-removed", rn_removed, "Removed blocks (blocks)");
  auto* rn_noise_opt = rn->add_option("--noise", rn_noise, "Velocity noise variance");
  auto* rn_push_opt = rn->add_option("--push", rn_push, "fx,fy,fz,start,duration");
  auto* rn_seed_opt = rn->add_option("--seed", rn_seed, "Scenario seed");
  rn->add_option("--out-dir", rn_dir, "Directory for metrics and dumps");

  // bench
  auto* bn = app.add_subcommand("bench", "Planning-time benchmark over removed-block counts");
  std::string bn_model, bn_range = "50:100:10", bn_out = "bench.csv";
  int bn_trials = 5, bn_warmup = 2;
  bn->add_option("--model", bn_model, "Weight file")->required();
  bn->add_option("--n-range", bn_range, "start:stop:step or comma list");
  bn->add_option("--trials", bn_trials, "Runs per n");
  bn->add_option("--warmup", bn_warmup, "Plan calls dropped at the start of each run");
  bn->add_option("--out", bn_out, "CSV output");

  // sweep
  auto* sw = app.add_subcommand("sweep", "Success rate over removed-block counts");
  std::string sw_model, sw_range = "50:120:10", sw_noise = "both", sw_out = "sweep.csv";
  int sw_trials = 25;
  sw->add_option("--model", sw_model, "Weight file")->required();
  sw->add_option("--n-range", sw_range, "start:stop:step or comma list");
  sw->add_option("--trials", sw_trials, "Trials per n");
  sw->add_option("--noise", sw_noise, "off, on or both")->check(CLI::IsMember({"off", "on", "both"}));
  sw->add_option("--out", sw_out, "CSV output");

  // make-terrain
  auto* mt = app.add_subcommand("make-terrain", "Write a terrain file");
  std::string mt_kind, mt_out, mt_occ;
  int mt_removed = 0;
  std::uint64_t mt_seed = 1;
  double mt_res = 0.005;
  mt->add_option("--kind", mt_kind, "blocks or stones")->required()->check(CLI::IsMember({"blocks", "stones"}));
  mt->add_option("--n-removed", mt_removed, "Removed blocks");
  mt->add_option("--seed", mt_seed, "Seed");
  mt->add_option("--out", mt_out, "Terrain JSON")->required();
  mt->add_option("--occupancy", mt_occ, "Also write an occupancy CSV");
  mt->add_option("--resolution", mt_res, "Occupancy raster spacing in m");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);

    if (*gen) {
      if (*gen_gait_opt) cfg.gait = parse_gait(gen_gait);
      if (*gen_ep_opt) cfg.data.episodes = gen_episodes;
      if (*gen_seed_opt) cfg.seed = gen_seed;
      cfg.validate();
      EpisodeParams p;
      p.gait = cfg.gait;
      p.weights = cfg.weights;
      p.trajopt = cfg.trajopt;
      p.executor = cfg.executor;
      GenerationSummary sum;
      const auto t0 = std::chrono::steady_clock::now();
      Dataset d = generate_dataset(cfg.data.episodes, cfg.seed, p, &sum, [&](int e, const Episode&) {
        if ((e + 1) % 10 == 0) std::fprintf(stderr, "  episode %d/%d\n", e + 1, cfg.data.episodes);
      });
      d.meta = cfg.to_json().dump();
      ensure_parent(gen_out);
      save_dataset(d, gen_out);
      if (!gen_csv.empty()) export_dataset_csv(d, gen_csv);
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::printf("gait %s episodes %d records %zu falls %d (fall rate %.1f%%) in %.1f s\n",
                  gait_name(cfg.gait).c_str(), sum.episodes, sum.records, sum.falls,
                  sum.episodes ? 100.0 * sum.falls / sum.episodes : 0.0, secs);
      return kExitOk;
    }

    if (*tr) {
      if (*tr_epochs_opt) cfg.train.epochs = tr_epochs;
      if (*tr_batch_opt) cfg.train.batch_size = tr_batch;
      if (*tr_lr_opt) cfg.train.learning_rate = tr_lr;
      if (*tr_seed_opt) cfg.seed = tr_seed;
      cfg.train.seed = cfg.seed;
      cfg.validate();
      require_file(tr_data, "dataset");
      const Dataset d = load_dataset(tr_data);
      if (*tr_gait_opt && parse_gait(tr_gait) != d.gait) {
        throw InvalidInput("dataset gait " + gait_name(d.gait) + " does not match --gait " + tr_gait);
      }
      cfg.gait = d.gait;
      TrainingRun r = train_on_dataset(d, cfg.train, cfg.data.train_fraction, [&](int e, double l) {
        if ((e + 1) % 100 == 0) std::fprintf(stderr, "  epoch %d loss %.6g\n", e + 1, l);
      });
      MlpModel& m = r.model;
      m.meta = cfg.to_json().dump();
      const auto& history = r.history;
      ensure_parent(tr_out);
      save_model(m, tr_out);
      const std::string loss_path = tr_loss.empty() ? tr_out + ".loss.csv" : tr_loss;
      {
        std::ofstream os(loss_path);
        if (!os) throw std::runtime_error("cannot write " + loss_path);
        os << "# " << "contactnet train v1\n# config: " << cfg.to_json().dump() << "\nepoch,loss\n";
        os.precision(12);
        for (std::size_t e = 0; e < history.size(); ++e) os << e + 1 << ',' << history[e] << '\n';
      }
      std::printf("top5 train %.2f%% / test %.2f%%\n", r.train_top5, r.test_top5);
      return kExitOk;
    }

    if (*rn) {
      if (*rn_kind_opt) cfg.scenario.kind = rn_kind;
      if (*rn_terrain_opt) cfg.scenario.terrain_file = rn_terrain;
      if (*rn_vx_opt) cfg.scenario.vx = rn_vx;
      if (*rn_vy_opt) cfg.scenario.vy = rn_vy;
      if (*rn_dur_opt) cfg.scenario.duration = rn_duration;
      if (*rn_removed_opt) cfg.scenario.n_removed = rn_removed;
      if (*rn_noise_opt) cfg.scenario.noise_variance = rn_noise;
      if (*rn_seed_opt) cfg.seed = rn_seed;
      if (*rn_push_opt) {
        std::vector<double> v;
        std::istringstream in(rn_push);
        std::string item;
        while (std::getline(in, item, ',')) v.push_back(std::stod(item));
        if (v.size() != 5) throw InvalidInput("--push expects fx,fy,fz,start,duration");
        cfg.scenario.push = PushSpec{{v[0], v[1], v[2]}, v[3], v[4]};
      }
      cfg.validate();
      require_file(rn_model, "model");
      const MlpModel model = load_model(rn_model);
      cfg.gait = model.gait;
      const SimParams params = cfg.sim_params();
      const Point2 vel{cfg.scenario.vx, cfg.scenario.vy};
      Scenario scn;
      if (cfg.scenario.kind == "stones") {
        scn = stepping_stones_run(params);
        scn.gait = model.gait;
      } else if (cfg.scenario.kind == "blocks") {
        scn = block_field_scenario(model.gait, cfg.scenario.n_removed, cfg.seed, 0.0, params);
      } else {
        scn = flat_scenario(model.gait, vel, cfg.scenario.duration, params);
        if (cfg.scenario.kind == "file") {
          require_file(cfg.scenario.terrain_file, "terrain");
          scn.name = fs::path(cfg.scenario.terrain_file).stem().string();
          scn.terrain = load_terrain(cfg.scenario.terrain_file);
        }
      }
      scn.user_vel = vel;
      scn.initial.user_vel = vel;
      if (*rn_dur_opt || cfg.scenario.kind == "flat" || cfg.scenario.kind == "file") {
        scn.duration = cfg.scenario.duration;
      }
      scn.noise_variance = cfg.scenario.noise_variance;
      scn.push = cfg.scenario.push;
      scn.seed = cfg.seed;

      const RunMetrics m = run(scn, model, params);
      fs::create_directories(rn_dir);
      const std::string h = header("run", cfg, "scenario: " + scn.name);
      write_metrics_csv({{scn.name, m}}, fs::path(rn_dir) / "metrics.csv", h);
      write_gait_schedule_csv(m, fs::path(rn_dir) / "gait_schedule.csv", h);
      write_trajectory_log_csv(m, fs::path(rn_dir) / "trajectory.csv", h);
      try {
        const ContactPlan first =
            plan(model, scn.initial, scn.terrain, {GaitSpec::for_kind(model.gait), params.hips, params.margin});
        std::ofstream(fs::path(rn_dir) / "plan.json") << plan_to_json(first, GaitSpec::for_kind(model.gait)) << '\n';
      } catch (const NoFeasibleAction&) {
      }
      std::printf("%s: %s after %d steps (%.2f s), holds %d, unsafe footholds %d, rank mean %.2f max %d, "
                  "plan mean %.3f ms max %.3f ms\n",
                  scn.name.c_str(), m.success ? "success" : (m.fell ? "fall" : "not completed"),
                  m.steps, m.final_time, m.hold_events, m.unsafe_footholds, m.mean_rank, m.max_rank,
                  m.mean_plan_ms, m.max_plan_ms);
      return m.success ? kExitOk : kExitTaskFailure;
    }

    if (*bn) {
      cfg.validate();
      require_file(bn_model, "model");
      const MlpModel model = load_model(bn_model);
      cfg.gait = model.gait;
      const auto ns = parse_range(bn_range);
      if (bn_trials < 1) throw InvalidInput("--trials must be >= 1");
      const auto rows = bench_planning_time(model, model.gait, ns, bn_trials, cfg.sim_params(),
                                            cfg.seed, bn_warmup);
      ensure_parent(bn_out);
      write_bench_csv(rows, model.gait, bn_out, header("bench", cfg));
      std::printf("%-6s %-8s %-10s %-10s %-10s\n", "n", "samples", "mean_ms", "std_ms", "max_ms");
      for (const auto& r : rows) {
        std::printf("%-6d %-8d %-10.4f %-10.4f %-10.4f\n", r.n, r.samples, r.mean_ms, r.stddev_ms, r.max_ms);
      }
      return kExitOk;
    }

    if (*sw) {
      cfg.validate();
      require_file(sw_model, "model");
      const MlpModel model = load_model(sw_model);
      cfg.gait = model.gait;
      const auto ns = parse_range(sw_range);
      if (sw_trials < 1) throw InvalidInput("--trials must be >= 1");
      std::vector<SweepRow> rows;
      for (bool noisy : {false, true}) {
        if ((noisy && sw_noise == "off") || (!noisy && sw_noise == "on")) continue;
        const auto r = success_rate_sweep(model, model.gait, ns, sw_trials, noisy, cfg.sim_params(),
                                          cfg.seed, 0.01);
        rows.insert(rows.end(), r.begin(), r.end());
      }
      ensure_parent(sw_out);
      write_sweep_csv(rows, model.gait, sw_out, header("sweep", cfg));
      std::printf("%-6s %-6s %-10s %-18s\n", "n", "noise", "success%", "95% CI");
      for (const auto& r : rows) {
        std::printf("%-6d %-6s %-10.1f [%.1f, %.1f]\n", r.n, r.noise ? "on" : "off",
                    100 * r.ci.rate, 100 * r.ci.lo, 100 * r.ci.hi);
      }
      return kExitOk;
    }

    if (*mt) {
      TerrainMap map = mt_kind == "stones" ? stepping_stones_scenario() : block_course(mt_removed, mt_seed);
      ensure_parent(mt_out);
      save_terrain(map, mt_out);
      if (!mt_occ.empty()) {
        const Point2 lo = mt_kind == "stones" ? Point2{-0.5, -0.35} : Point2{-0.8, -0.3};
        const Point2 hi = mt_kind == "stones" ? Point2{1.75, 0.35} : Point2{2.3, 0.3};
        export_occupancy_csv(map, mt_occ, lo, hi, mt_res, cfg.margin);
      }
      std::printf("wrote %s (%zu stones%s)\n", mt_out.c_str(), map.stones().size(),
                  map.block_grid() ? ", block grid" : "");
      return kExitOk;
    }
  } catch (const ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const InvalidInput& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitTaskFailure;
  }
  return kExitUsage;
}
