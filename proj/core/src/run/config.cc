#include "slr/run/config.h"

#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace slr {

namespace {

std::string Join(const std::vector<std::string>& issues) {
  std::string out;
  for (const std::string& s : issues) out += (out.empty() ? "" : "; ") + s;
  return out;
}

// --- value <-> json ---

Json ToJson(double v) { return v; }
Json ToJson(int v) { return v; }
Json ToJson(bool v) { return v; }
Json ToJson(std::uint64_t v) { return v; }
Json ToJson(const std::string& v) { return v; }
Json ToJson(const Range& r) { return Json::array({r.lo, r.hi}); }
Json ToJson(const IntRange& r) { return Json::array({r.lo, r.hi}); }
Json ToJson(Activation a) { return std::string(ActivationName(a)); }
Json ToJson(VariantKind k) { return std::string(VariantName(k)); }
Json ToJson(TerrainMode m) { return std::string(TerrainName(m)); }

template <typename T>
Json ToJson(const std::vector<T>& v) {
  Json arr = Json::array();
  for (const T& x : v) arr.push_back(ToJson(x));
  return arr;
}

// each FromJson throws std::string describing the mismatch
void FromJson(const Json& j, double& out) {
  if (!j.is_number()) throw std::string("expected a number");
  out = j.get<double>();
}

void FromJson(const Json& j, int& out) {
  if (!j.is_number_integer()) throw std::string("expected an integer");
  const std::int64_t v = j.get<std::int64_t>();
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw std::string("integer out of range");
  }
  out = static_cast<int>(v);
}

void FromJson(const Json& j, std::uint64_t& out) {
  if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() &&
                                 j.get<std::int64_t>() < 0)) {
    throw std::string("expected a non-negative integer");
  }
  out = j.get<std::uint64_t>();
}

void FromJson(const Json& j, bool& out) {
  if (!j.is_boolean()) throw std::string("expected true or false");
  out = j.get<bool>();
}

void FromJson(const Json& j, std::string& out) {
  if (!j.is_string()) throw std::string("expected a string");
  out = j.get<std::string>();
}

void FromJson(const Json& j, Range& out) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw std::string("expected [lo, hi]");
  }
  out = {j[0].get<double>(), j[1].get<double>()};
}

void FromJson(const Json& j, IntRange& out) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() ||
      !j[1].is_number_integer()) {
    throw std::string("expected [lo, hi] integers");
  }
  out = {j[0].get<int>(), j[1].get<int>()};
}

template <typename Parse, typename T>
void FromName(const Json& j, T& out, Parse parse) {
  if (!j.is_string()) throw std::string("expected a string");
  try {
    out = parse(j.get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw std::string(e.what());
  }
}

void FromJson(const Json& j, Activation& out) { FromName(j, out, ParseActivation); }
void FromJson(const Json& j, VariantKind& out) { FromName(j, out, ParseVariant); }
void FromJson(const Json& j, TerrainMode& out) { FromName(j, out, ParseTerrain); }

template <typename T>
void FromJson(const Json& j, std::vector<T>& out) {
  if (!j.is_array()) throw std::string("expected an array");
  std::vector<T> v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    try {
      FromJson(j[i], v[i]);
    } catch (const std::string& e) {
      throw "element " + std::to_string(i) + ": " + e;
    }
  }
  out = std::move(v);
}

// --- the field table ---

template <typename V>
void VisitFields(RunConfig& c, V& v) {
  TrainerConfig& t = c.trainer;
  EnvConfig& e = t.env;
  RandomizationConfig& r = e.randomization;
  PpoConfig& p = t.ppo;
  NetworkConfig& n = t.net;

  v("run", "name", c.name);
  v("run", "output_dir", c.output_dir);
  v("run", "seed", t.seed);
  v("run", "variant", t.variant);
  v("run", "iterations", t.iterations);
  v("run", "checkpoint_every", c.checkpoint_every);
  v("run", "final_window", c.final_window);

  v("env", "num_envs", t.num_envs);
  v("env", "horizon", t.horizon);
  v("env", "dt", e.dt);
  v("env", "substeps", e.substeps);
  v("env", "episode_length", e.episode_length);
  v("env", "action_limit", e.action_limit);
  v("env", "command_vx", e.command_vx);
  v("env", "command_yaw", e.command_yaw);
  v("env", "curriculum", t.curriculum);
  v("env", "max_terrain_level", t.max_terrain_level);
  v("env", "step_height", e.step_shape.height);
  v("env", "step_width", e.step_shape.width);

  v("env.randomization", "terrains", r.terrains);
  v("env.randomization", "terrain_scale", r.terrain_scale);
  v("env.randomization", "friction", r.friction);
  v("env.randomization", "restitution", r.restitution);
  v("env.randomization", "body_mass_scale", r.body_mass_scale);
  v("env.randomization", "payload_mass", r.payload_mass);
  v("env.randomization", "motor_strength_scale", r.motor_strength_scale);
  v("env.randomization", "kp_scale", r.kp_scale);
  v("env.randomization", "kd_scale", r.kd_scale);
  v("env.randomization", "action_delay_steps", r.action_delay_steps);
  v("env.randomization", "external_force", r.external_force);
  v("env.randomization", "initial_joint_scale", r.initial_joint_scale);

  v("env.noise", "level", e.observation_noise);
  v("env.noise", "gravity", e.sensor_noise.gravity);
  v("env.noise", "pitch_rate", e.sensor_noise.pitch_rate);
  v("env.noise", "wheel_angle", e.sensor_noise.wheel_angle);
  v("env.noise", "wheel_speed", e.sensor_noise.wheel_speed);

  v("env.reward", "sigma", e.reward.sigma);
  for (std::size_t i = 0; i < kNumRewardTerms; ++i) {
    v("env.reward", std::string(RewardTermName(i)), e.reward.weights[i]);
  }

  v("networks", "encoder_hidden", n.encoder_hidden);
  v("networks", "actor_hidden", n.actor_hidden);
  v("networks", "critic_hidden", n.critic_hidden);
  v("networks", "transition_hidden", n.transition_hidden);
  v("networks", "teacher_hidden", n.teacher_hidden);
  v("networks", "teacher_latent_dim", t.dims.teacher_latent_dim);
  v("networks", "activation", n.activation);
  v("networks", "actor_full_history", n.actor_full_history);
  v("networks", "init_log_std", n.init_log_std);

  v("ppo", "clip_range", p.clip_range);
  v("ppo", "entropy_coef", p.entropy_coef);
  v("ppo", "gamma", p.gamma);
  v("ppo", "lambda", p.lambda);
  v("ppo", "desired_kl", p.desired_kl);
  v("ppo", "learning_rate", p.learning_rate);
  v("ppo", "adam_eps", p.adam_eps);
  v("ppo", "value_coef", p.value_coef);
  v("ppo", "max_grad_norm", p.max_grad_norm);
  v("ppo", "adaptive_lr", p.adaptive_lr);
  v("ppo", "lr_min", p.lr_min);
  v("ppo", "lr_max", p.lr_max);
  v("ppo", "epochs", p.epochs);
  v("ppo", "minibatches", p.minibatches);
  v("ppo", "estimator_coef", p.estimator_coef);

  v("slr", "history_len", t.dims.history_len);
  v("slr", "latent_dim", t.dims.latent_dim);
  v("slr", "margin", p.margin);
  v("slr", "triplet_coef", p.triplet_coef);

  v("analysis", "sequence", c.course.sequence);
  v("analysis", "steps_per_terrain", c.course.steps_per_terrain);
  v("analysis", "terrain_scale", c.course.terrain_scale);
  v("analysis", "command_vx", c.course.command_vx);
  v("analysis", "boundary_window", c.course.boundary_window);
  v("analysis", "shuffles", c.shuffles);

  v("eval", "command_lo", c.eval.command_lo);
  v("eval", "command_hi", c.eval.command_hi);
  v("eval", "grid_points", c.eval.grid_points);
  v("eval", "episodes", c.eval.episodes);
  v("eval", "steps", c.eval.steps);

  v("ablate", "variants", c.ablate.variants);
  v("ablate", "seeds", c.ablate.seeds);
}

std::vector<std::string> SplitDots(std::string_view s) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = s.find('.', start);
    parts.emplace_back(s.substr(start, dot - start));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return parts;
}

Json& TableAt(Json& root, const std::string& section) {
  Json* t = &root;
  for (const std::string& k : SplitDots(section)) {
    if (!t->contains(k)) (*t)[k] = Json::object();
    t = &(*t)[k];
  }
  return *t;
}

const Json* FindTable(const Json& root, const std::string& section) {
  const Json* t = &root;
  for (const std::string& k : SplitDots(section)) {
    if (!t->is_object() || !t->contains(k)) return nullptr;
    t = &(*t)[k];
  }
  return t;
}

struct Writer {
  Json root = Json::object();
  template <typename T>
  void operator()(const std::string& section, const std::string& key, const T& value) {
    TableAt(root, section)[key] = ToJson(value);
  }
};

struct Reader {
  const Json& root;
  std::set<std::string> known;
  std::vector<std::string> issues;

  template <typename T>
  void operator()(const std::string& section, const std::string& key, T& value) {
    known.insert(section + "." + key);
    const Json* table = FindTable(root, section);
    if (table == nullptr) return;
    if (!table->is_object()) {
      issues.push_back(section + ": expected a table");
      return;
    }
    if (!table->contains(key)) return;
    try {
      FromJson((*table)[key], value);
    } catch (const std::string& e) {
      issues.push_back(section + "." + key + ": " + e);
    }
  }

  void FindUnknown(const Json& table, const std::string& path) {
    for (const auto& [k, v] : table.items()) {
      const std::string full = path.empty() ? k : path + "." + k;
      if (known.count(full)) continue;
      if (v.is_object()) {
        bool is_section = false;
        for (const std::string& f : known) {
          if (f.rfind(full + ".", 0) == 0) is_section = true;
        }
        if (is_section) {
          FindUnknown(v, full);
          continue;
        }
      }
      issues.push_back(full + ": unknown key");
    }
  }
};

void Check(std::vector<std::string>& issues, bool ok, const std::string& what) {
  if (!ok) issues.push_back(what);
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> issues)
    : std::runtime_error(Join(issues)), issues_(std::move(issues)) {}

void RunConfig::Validate() const {
  std::vector<std::string> issues;
  try {
    trainer.Validate();
  } catch (const std::invalid_argument& e) {
    issues.emplace_back(e.what());
  }
  Check(issues, !name.empty() && name.find('/') == std::string::npos,
        "run.name must be non-empty and contain no '/'");
  Check(issues, !output_dir.empty(), "run.output_dir must be non-empty");
  Check(issues, checkpoint_every >= 1, "run.checkpoint_every must be >= 1");
  Check(issues, final_window >= 1, "run.final_window must be >= 1");
  Check(issues, shuffles >= 1, "analysis.shuffles must be >= 1");
  Check(issues, course.sequence.size() >= 2,
        "analysis.sequence needs at least 2 terrains");
  Check(issues, course.steps_per_terrain >= 1,
        "analysis.steps_per_terrain must be >= 1");
  Check(issues, course.boundary_window >= 0,
        "analysis.boundary_window must be >= 0");
  Check(issues, course.terrain_scale >= 0.0,
        "analysis.terrain_scale must be >= 0");
  Check(issues, eval.command_lo <= eval.command_hi,
        "eval.command_lo must not exceed eval.command_hi");
  Check(issues, eval.grid_points >= 1, "eval.grid_points must be >= 1");
  Check(issues, eval.episodes >= 1, "eval.episodes must be >= 1");
  Check(issues, eval.steps >= 1, "eval.steps must be >= 1");
  Check(issues, !ablate.variants.empty(), "ablate.variants must be non-empty");
  Check(issues, !ablate.seeds.empty(), "ablate.seeds must be non-empty");
  if (!issues.empty()) throw ConfigError(std::move(issues));
}

RunConfig ConfigFromToml(const Json& tree) {
  RunConfig c;
  if (!tree.is_object()) throw ConfigError({"config root must be a table"});
  Reader reader{tree, {}, {}};
  VisitFields(c, reader);
  reader.FindUnknown(tree, "");
  if (!reader.issues.empty()) throw ConfigError(std::move(reader.issues));
  c.Validate();
  return c;
}

RunConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot read config file " + path.string()});
  std::stringstream text;
  text << in.rdbuf();
  try {
    return ConfigFromToml(ParseToml(text.str()));
  } catch (const TomlError& e) {
    throw ConfigError({path.string() + ": " + e.what()});
  }
}

Json ConfigToToml(const RunConfig& config) {
  Writer w;
  VisitFields(const_cast<RunConfig&>(config), w);
  return w.root;
}

std::string ConfigText(const RunConfig& config) {
  return WriteToml(ConfigToToml(config));
}

void ApplyOverride(Json& tree, std::string_view assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError({"--set expects section.key=value, got '" +
                       std::string(assignment) + "'"});
  }
  const std::string path(assignment.substr(0, eq));
  const std::string_view text = assignment.substr(eq + 1);
  const std::size_t dot = path.rfind('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == path.size()) {
    throw ConfigError({"--set key must look like section.key, got '" + path + "'"});
  }
  Json value;
  try {
    value = ParseTomlValue(text);
  } catch (const TomlError&) {
    value = std::string(text);
  }
  Json& table = TableAt(tree, path.substr(0, dot));
  if (!table.is_object()) throw ConfigError({path.substr(0, dot) + ": not a table"});
  table[path.substr(dot + 1)] = std::move(value);
}

std::string SharedConfigHash(const RunConfig& config) {
  RunConfig shared = config;
  shared.name.clear();
  shared.output_dir.clear();
  shared.trainer.seed = 0;
  shared.trainer.variant = VariantKind::kSlr;
  const std::string text = ConfigText(shared);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace slr
