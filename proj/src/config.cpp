#include "contactnet/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "contactnet/errors.hpp"

namespace contactnet {

namespace {

using nlohmann::json;

// Consumes the keys of one object and complains about leftovers.
class Section {
 public:
  Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ParseError(path_ + ": expected a table/object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    const auto it = obj_.find(key);
    if (it == obj_.end()) return;
    seen_.insert(key);
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!it->is_number()) throw ParseError("");
      } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!it->is_number_integer() && !it->is_number_unsigned()) throw ParseError("");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!it->is_boolean()) throw ParseError("");
      } else {
        if (!it->is_string()) throw ParseError("");
      }
      out = it->get<T>();
    } catch (const std::exception&) {
      throw ParseError(path_ + "." + key + ": wrong type");
    }
  }

  std::optional<Section> sub(const char* key) {
    const auto it = obj_.find(key);
    if (it == obj_.end()) return std::nullopt;
    seen_.insert(key);
    return Section(*it, path_ + "." + key);
  }

  void finish() const {
    for (const auto& [k, v] : obj_.items()) {
      if (!seen_.count(k)) throw ParseError(path_ + "." + k + ": unknown key");
    }
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace

void RunConfig::validate() const {
  weights.validate();
  train.validate();
  if (!(margin >= 0.0)) throw InvalidInput("margin must be >= 0");
  if (!(trajopt.mass > 0 && trajopt.gravity > 0 && trajopt.mu > 0 && trajopt.f_max > 0 &&
        trajopt.z_ref > 0)) {
    throw InvalidInput("trajopt: mass, gravity, mu, f_max and z_ref must be positive");
  }
  if (trajopt.w_v < 0 || trajopt.w_z < 0 || trajopt.w_f <= 0 || trajopt.w_tau < 0) {
    throw InvalidInput("trajopt: weights must be non-negative (w_f positive)");
  }
  if (trajopt.qp.max_iter <= 0 || trajopt.qp.rho <= 0 || trajopt.qp.sigma <= 0 ||
      !(trajopt.qp.alpha > 0 && trajopt.qp.alpha < 2)) {
    throw InvalidInput("trajopt.qp: invalid solver settings");
  }
  if (executor.substeps_per_node <= 0 || executor.kp < 0 || executor.kd < 0 ||
      executor.fall_distance <= 0) {
    throw InvalidInput("executor: invalid parameters");
  }
  if (data.episodes < 0) throw InvalidInput("data.episodes must be >= 0");
  if (!(data.train_fraction > 0 && data.train_fraction < 1)) {
    throw InvalidInput("data.train_fraction must lie in (0, 1)");
  }
  static const std::set<std::string> kinds{"flat", "stones", "blocks", "file"};
  if (!kinds.count(scenario.kind)) throw InvalidInput("scenario.kind: unknown kind " + scenario.kind);
  if (scenario.kind == "file" && scenario.terrain_file.empty()) {
    throw InvalidInput("scenario.terrain_file is required for kind = file");
  }
  if (!(scenario.duration > 0)) throw InvalidInput("scenario.duration must be positive");
  if (scenario.n_removed < 0) throw InvalidInput("scenario.n_removed must be >= 0");
  if (!(scenario.noise_variance >= 0)) throw InvalidInput("scenario.noise_variance must be >= 0");
  if (scenario.push && !(scenario.push->duration >= 0)) {
    throw InvalidInput("scenario.push.duration must be >= 0");
  }
}

SimParams RunConfig::sim_params() const {
  SimParams p;
  p.trajopt = trajopt;
  p.executor = executor;
  p.margin = margin;
  return p;
}

nlohmann::json RunConfig::to_json() const {
  json j;
  j["gait"] = gait_name(gait);
  j["seed"] = seed;
  j["margin"] = margin;
  j["weights"] = {{"gamma_opt", weights.gamma_opt},   {"gamma_stab", weights.gamma_stab},
                  {"gamma_hip", weights.gamma_hip},   {"gamma_cent", weights.gamma_cent},
                  {"gamma_area", weights.gamma_area}, {"hip_radius_max", weights.hip_radius_max}};
  j["trajopt"] = {{"mass", trajopt.mass},   {"gravity", trajopt.gravity}, {"mu", trajopt.mu},
                  {"f_max", trajopt.f_max}, {"z_ref", trajopt.z_ref},     {"w_v", trajopt.w_v},
                  {"w_z", trajopt.w_z},     {"w_f", trajopt.w_f},         {"w_tau", trajopt.w_tau},
                  {"v_big", trajopt.v_big}};
  j["trajopt"]["qp"] = {{"rho", trajopt.qp.rho},
                        {"sigma", trajopt.qp.sigma},
                        {"alpha", trajopt.qp.alpha},
                        {"eps_abs", trajopt.qp.eps_abs},
                        {"eps_rel", trajopt.qp.eps_rel},
                        {"eps_infeasible", trajopt.qp.eps_infeasible},
                        {"max_iter", trajopt.qp.max_iter},
                        {"scaling_sweeps", trajopt.qp.scaling_sweeps},
                        {"check_interval", trajopt.qp.check_interval},
                        {"polish", trajopt.qp.polish},
                        {"polish_interval", trajopt.qp.polish_interval}};
  j["executor"] = {{"kp", executor.kp},
                   {"kd", executor.kd},
                   {"substeps_per_node", executor.substeps_per_node},
                   {"fall_distance", executor.fall_distance}};
  j["train"] = {{"epochs", train.epochs},   {"batch_size", train.batch_size},
                {"learning_rate", train.learning_rate}, {"beta1", train.beta1},
                {"beta2", train.beta2},     {"epsilon", train.epsilon}};
  j["data"] = {{"episodes", data.episodes}, {"train_fraction", data.train_fraction}};
  j["scenario"] = {{"kind", scenario.kind},
                   {"vx", scenario.vx},
                   {"vy", scenario.vy},
                   {"duration", scenario.duration},
                   {"n_removed", scenario.n_removed},
                   {"noise_variance", scenario.noise_variance},
                   {"terrain_file", scenario.terrain_file}};
  if (scenario.push) {
    const auto& p = *scenario.push;
    j["scenario"]["push"] = {{"fx", p.force.x()}, {"fy", p.force.y()}, {"fz", p.force.z()},
                             {"start", p.start}, {"duration", p.duration}};
  }
  return j;
}

RunConfig config_from_json(const nlohmann::json& doc, RunConfig c) {
  Section root(doc, "$");
  std::string gait = gait_name(c.gait);
  root.get("gait", gait);
  try {
    c.gait = parse_gait(gait);
  } catch (const std::exception& e) {
    throw ParseError(std::string("$.gait: ") + e.what());
  }
  root.get("seed", c.seed);
  root.get("margin", c.margin);
  if (auto s = root.sub("weights")) {
    s->get("gamma_opt", c.weights.gamma_opt);
    s->get("gamma_stab", c.weights.gamma_stab);
    s->get("gamma_hip", c.weights.gamma_hip);
    s->get("gamma_cent", c.weights.gamma_cent);
    s->get("gamma_area", c.weights.gamma_area);
    s->get("hip_radius_max", c.weights.hip_radius_max);
    s->finish();
  }
  if (auto s = root.sub("trajopt")) {
    auto& t = c.trajopt;
    s->get("mass", t.mass);
    s->get("gravity", t.gravity);
    s->get("mu", t.mu);
    s->get("f_max", t.f_max);
    s->get("z_ref", t.z_ref);
    s->get("w_v", t.w_v);
    s->get("w_z", t.w_z);
    s->get("w_f", t.w_f);
    s->get("w_tau", t.w_tau);
    s->get("v_big", t.v_big);
    if (auto q = s->sub("qp")) {
      q->get("rho", t.qp.rho);
      q->get("sigma", t.qp.sigma);
      q->get("alpha", t.qp.alpha);
      q->get("eps_abs", t.qp.eps_abs);
      q->get("eps_rel", t.qp.eps_rel);
      q->get("eps_infeasible", t.qp.eps_infeasible);
      q->get("max_iter", t.qp.max_iter);
      q->get("scaling_sweeps", t.qp.scaling_sweeps);
      q->get("check_interval", t.qp.check_interval);
      q->get("polish", t.qp.polish);
      q->get("polish_interval", t.qp.polish_interval);
      q->finish();
    }
    s->finish();
  }
  if (auto s = root.sub("executor")) {
    s->get("kp", c.executor.kp);
    s->get("kd", c.executor.kd);
    s->get("substeps_per_node", c.executor.substeps_per_node);
    s->get("fall_distance", c.executor.fall_distance);
    s->finish();
  }
  if (auto s = root.sub("train")) {
    s->get("epochs", c.train.epochs);
    s->get("batch_size", c.train.batch_size);
    s->get("learning_rate", c.train.learning_rate);
    s->get("beta1", c.train.beta1);
    s->get("beta2", c.train.beta2);
    s->get("epsilon", c.train.epsilon);
    s->finish();
  }
  if (auto s = root.sub("data")) {
    s->get("episodes", c.data.episodes);
    s->get("train_fraction", c.data.train_fraction);
    s->finish();
  }
  if (auto s = root.sub("scenario")) {
    auto& sc = c.scenario;
    s->get("kind", sc.kind);
    s->get("vx", sc.vx);
    s->get("vy", sc.vy);
    s->get("duration", sc.duration);
    s->get("n_removed", sc.n_removed);
    s->get("noise_variance", sc.noise_variance);
    s->get("terrain_file", sc.terrain_file);
    if (auto p = s->sub("push")) {
      PushSpec push = sc.push.value_or(PushSpec{});
      double fx = push.force.x(), fy = push.force.y(), fz = push.force.z();
      p->get("fx", fx);
      p->get("fy", fy);
      p->get("fz", fz);
      p->get("start", push.start);
      p->get("duration", push.duration);
      p->finish();
      push.force = {fx, fy, fz};
      sc.push = push;
    }
    s->finish();
  }
  root.finish();
  c.train.seed = c.seed;
  return c;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& line) {
  bool in_str = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_str = !in_str;
    if (line[i] == '#' && !in_str) return line.substr(0, i);
  }
  return line;
}

json parse_scalar(const std::string& v, int line) {
  auto fail = [&](const std::string& what) -> json {
    throw ParseError("toml line " + std::to_string(line) + ": " + what);
  };
  if (v.empty()) return fail("missing value");
  if (v == "true") return true;
  if (v == "false") return false;
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"') return fail("unterminated string");
    std::string out;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
      if (v[i] == '\\' && i + 2 < v.size()) {
        const char n = v[++i];
        out += n == 'n' ? '\n' : n == 't' ? '\t' : n;
      } else {
        out += v[i];
      }
    }
    return out;
  }
  std::string num;
  for (char ch : v) {
    if (ch != '_') num += ch;
  }
  const bool is_float = num.find_first_of(".eE") != std::string::npos ||
                        num == "inf" || num == "+inf" || num == "-inf" || num == "nan";
  if (is_float) {
    std::size_t pos = 0;
    double d = 0.0;
    try {
      d = std::stod(num, &pos);
    } catch (const std::exception&) {
      return fail("bad number '" + v + "'");
    }
    if (pos != num.size()) return fail("bad number '" + v + "'");
    return d;
  }
  const char* first = num.data() + (num.front() == '+' ? 1 : 0);
  long long i = 0;
  const auto [ptr, ec] = std::from_chars(first, num.data() + num.size(), i);
  if (ec != std::errc() || ptr != num.data() + num.size()) return fail("bad value '" + v + "'");
  return i;
}

json parse_value(const std::string& v, int line) {
  if (!v.empty() && v.front() == '[') {
    if (v.back() != ']') throw ParseError("toml line " + std::to_string(line) + ": unterminated array");
    json arr = json::array();
    std::string body = trim(v.substr(1, v.size() - 2));
    std::string item;
    bool in_str = false;
    for (char ch : body + ",") {
      if (ch == '"') in_str = !in_str;
      if (ch == ',' && !in_str) {
        const std::string t = trim(item);
        if (!t.empty()) arr.push_back(parse_scalar(t, line));
        item.clear();
      } else {
        item += ch;
      }
    }
    return arr;
  }
  return parse_scalar(v, line);
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char ch : k) {
    if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-')) return false;
  }
  return true;
}

}  // namespace

nlohmann::json parse_toml(const std::string& text) {
  json root = json::object();
  json* table = &root;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(strip_comment(raw));
    if (s.empty()) continue;
    const std::string where = "toml line " + std::to_string(line) + ": ";
    if (s.front() == '[') {
      if (s.back() != ']' || s.size() < 3) throw ParseError(where + "bad table header");
      table = &root;
      std::stringstream parts(trim(s.substr(1, s.size() - 2)));
      std::string part;
      while (std::getline(parts, part, '.')) {
        part = trim(part);
        if (!valid_key(part)) throw ParseError(where + "bad table name");
        json& next = (*table)[part];
        if (next.is_null()) next = json::object();
        if (!next.is_object()) throw ParseError(where + "'" + part + "' is not a table");
        table = &next;
      }
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ParseError(where + "expected key = value");
    const std::string key = trim(s.substr(0, eq));
    if (!valid_key(key)) throw ParseError(where + "bad key '" + key + "'");
    if (table->contains(key)) throw ParseError(where + "duplicate key '" + key + "'");
    (*table)[key] = parse_value(trim(s.substr(eq + 1)), line);
  }
  return root;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ParseError("cannot open config " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  json doc;
  if (path.extension() == ".toml") {
    doc = parse_toml(ss.str());
  } else {
    try {
      doc = json::parse(ss.str());
    } catch (const json::parse_error& e) {
      throw ParseError("config " + path.string() + ": " + e.what());
    }
  }
  RunConfig c = config_from_json(doc);
  c.validate();
  return c;
}

}  // namespace contactnet
