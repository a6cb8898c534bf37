#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "contactnet/cost.hpp"
#include "contactnet/executor.hpp"
#include "contactnet/footholds.hpp"
#include "contactnet/net.hpp"
#include "contactnet/simlab.hpp"
#include "contactnet/trajopt.hpp"

namespace contactnet {

struct DataConfig {
  int episodes{200};
  double train_fraction{0.7};
};

struct ScenarioConfig {
  std::string kind{"flat"};  // flat | stones | blocks | file
  double vx{0.05};
  double vy{0.0};
  double duration{10.0};
  int n_removed{0};
  double noise_variance{0.0};
  std::string terrain_file;
  std::optional<PushSpec> push;
};

/// Everything a CLI command can be configured with. Unknown keys are errors.
struct RunConfig {
  GaitKind gait{GaitKind::Walk};
  std::uint64_t seed{1};
  double margin{kDefaultSafetyMargin};
  CostWeights weights{};
  TrajoptParams trajopt{};
  ExecutorParams executor{};
  TrainConfig train{};
  DataConfig data{};
  ScenarioConfig scenario{};

  void validate() const;
  nlohmann::json to_json() const;
  SimParams sim_params() const;
};

/// Overlay the keys of `doc` onto `base`; throws ParseError naming the
/// offending key path on unknown keys or wrong types.
RunConfig config_from_json(const nlohmann::json& doc, RunConfig base = {});

/// Accepts JSON or the TOML subset (tables, key = value, scalars, flat arrays).
nlohmann::json parse_toml(const std::string& text);

/// Format chosen by extension (.toml, otherwise JSON).
RunConfig load_config(const std::filesystem::path& path);

}  // namespace contactnet
