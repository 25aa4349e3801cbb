/*
 * Copyright (c) 2026 The corra authors
 *
 * SPDX-License-Identifier: Apache-2.0
 */

#include "corra/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "corra/baselines.hpp"
#include "corra/errors.hpp"

namespace corra {

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

struct RawValue {
  std::string value;
  int line = 0;
};

/// section -> key -> value, with strict consumption tracking.
class RawConfig {
 public:
  void insert(const std::string& section, const std::string& key,
              const std::string& value, int line) {
    auto& sec = sections_[section];
    if (sec.count(key))
      throw ConfigError("duplicate key '" + section + "." + key + "'", line);
    sec[key] = RawValue{value, line};
  }

  bool has(const std::string& section, const std::string& key) {
    if (env_value(section, key)) return true;
    auto s = sections_.find(section);
    return s != sections_.end() && s->second.count(key) > 0;
  }

  std::string take(const std::string& section, const std::string& key,
                   int* line_out) {
    if (auto env = env_value(section, key)) {
      // consume any file copy so it is not reported as unknown
      auto s = sections_.find(section);
      if (s != sections_.end()) s->second.erase(key);
      consumed_.insert(section + "." + key);
      *line_out = 0;
      return *env;
    }
    auto s = sections_.find(section);
    if (s == sections_.end() || !s->second.count(key))
      throw ConfigError("missing required key '" + section + "." + key + "'");
    RawValue v = s->second.at(key);
    s->second.erase(key);
    consumed_.insert(section + "." + key);
    *line_out = v.line;
    return v.value;
  }

  void reject_unknown() const {
    for (const auto& [section, keys] : sections_) {
      for (const auto& [key, v] : keys)
        throw ConfigError("unknown key '" + section + "." + key + "'", v.line);
    }
  }

 private:
  static std::optional<std::string> env_value(const std::string& section,
                                              const std::string& key) {
    std::string name = "CORRA_" + section + "_" + key;
    for (char& c : name) {
      if (c == '.') c = '_';
      c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    const char* v = std::getenv(name.c_str());
    if (!v) return std::nullopt;
    return std::string(v);
  }

  std::map<std::string, std::map<std::string, RawValue>> sections_;
  std::set<std::string> consumed_;
};

double parse_double(const std::string& raw, const std::string& what, int line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(raw, &used);
    if (used != raw.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("cannot parse number for " + what + ": '" + raw + "'",
                      line);
  }
}

long parse_long(const std::string& raw, const std::string& what, int line) {
  try {
    std::size_t used = 0;
    const long v = std::stol(raw, &used);
    if (used != raw.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("cannot parse integer for " + what + ": '" + raw + "'",
                      line);
  }
}

std::vector<double> parse_doubles(const std::string& raw, std::size_t count,
                                  const std::string& what, int line) {
  std::istringstream in(raw);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(parse_double(tok, what, line));
  if (count != 0 && out.size() != count)
    throw ConfigError(what + " expects " + std::to_string(count) + " numbers",
                      line);
  return out;
}

class Loader {
 public:
  explicit Loader(RawConfig raw) : raw_(std::move(raw)) {}

  double num(const std::string& section, const std::string& key) {
    int line = 0;
    const std::string v = raw_.take(section, key, &line);
    return parse_double(v, section + "." + key, line);
  }
  double num_or(const std::string& section, const std::string& key, double dflt) {
    return raw_.has(section, key) ? num(section, key) : dflt;
  }
  long integer(const std::string& section, const std::string& key) {
    int line = 0;
    const std::string v = raw_.take(section, key, &line);
    return parse_long(v, section + "." + key, line);
  }
  long integer_or(const std::string& section, const std::string& key, long dflt) {
    return raw_.has(section, key) ? integer(section, key) : dflt;
  }
  std::string str(const std::string& section, const std::string& key) {
    int line = 0;
    return raw_.take(section, key, &line);
  }
  std::string str_or(const std::string& section, const std::string& key,
                     const std::string& dflt) {
    return raw_.has(section, key) ? str(section, key) : dflt;
  }
  std::vector<double> nums(const std::string& section, const std::string& key,
                           std::size_t count) {
    int line = 0;
    const std::string v = raw_.take(section, key, &line);
    return parse_doubles(v, count, section + "." + key, line);
  }
  bool has(const std::string& section, const std::string& key) {
    return raw_.has(section, key);
  }
  void finish() { raw_.reject_unknown(); }

 private:
  RawConfig raw_;
};

RawConfig tokenize(const std::string& text) {
  RawConfig raw;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw ConfigError("malformed section header", line_no);
      section = trim(t.substr(1, t.size() - 2));
      if (section.empty()) throw ConfigError("empty section name", line_no);
      continue;
    }
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected 'key = value'", line_no);
    if (section.empty())
      throw ConfigError("key outside of any [section]", line_no);
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key", line_no);
    raw.insert(section, key, value, line_no);
  }
  return raw;
}

}  // namespace

RunConfig RunConfig::parse_string(const std::string& text) {
  Loader cfg(tokenize(text));
  RunConfig rc;

  // [system]
  const long bs_count = cfg.integer("system", "bs_count");
  if (bs_count < 1 || bs_count > 64)
    throw ConfigError("system.bs_count must be in [1, 64]");
  rc.system.bs.clear();
  for (long n = 0; n < bs_count; ++n) {
    const std::string base = "bs." + std::to_string(n);
    BsSite site;
    const std::string kind = cfg.str("system", base + ".kind");
    if (kind == "tbs") site.kind = BsKind::kTbs;
    else if (kind == "ntbs") site.kind = BsKind::kNtbs;
    else throw ConfigError("system." + base + ".kind must be tbs or ntbs");
    const auto pos = cfg.nums("system", base + ".position_m", 3);
    site.position = {pos[0], pos[1], pos[2]};
    rc.system.bs.push_back(site);
  }
  rc.system.users_per_bs = static_cast<int>(cfg.integer("system", "users_per_bs"));
  rc.system.subchannels = static_cast<int>(cfg.integer("system", "subchannels"));
  rc.system.srb_count = static_cast<int>(cfg.integer("system", "srb_count"));
  rc.system.subchannel_bandwidth_hz = cfg.num("system", "subchannel_bandwidth_hz");
  rc.system.p_max_w = dbm_to_watts(cfg.num("system", "p_max_dbm"));
  rc.system.qos_rate_bps = cfg.num("system", "qos_rate_mbps") * 1e6;
  rc.system.noise_density_w_hz =
      dbm_to_watts(cfg.num_or("system", "noise_density_dbm_hz", -174.0));
  rc.system.episode_length =
      static_cast<int>(cfg.integer_or("system", "episode_length", 100));
  const auto area = cfg.nums("system", "area_m", 2);
  rc.system.area_x_m = area[0];
  rc.system.area_y_m = area[1];
  rc.system.frame_duration_s = cfg.num_or("system", "frame_duration_s", 0.01);
  rc.system.tbs_tx_gain_db = cfg.num_or("system", "tbs_tx_gain_db", 0.0);
  rc.system.ntbs_tx_gain_db = cfg.num_or("system", "ntbs_tx_gain_db", 0.0);

  auto pathloss = [&](const std::string& key, PathlossModel dflt) {
    if (!cfg.has("system", key)) return dflt;
    const auto v = cfg.nums("system", key, 3);
    return PathlossModel{v[0], v[1], v[2]};
  };
  rc.system.terrestrial_pl = pathloss("terrestrial_pathloss", {128.1, 37.6, 1000.0});
  rc.system.aerial_los_pl = pathloss("aerial_los_pathloss", {98.4, 20.0, 1000.0});
  rc.system.aerial_nlos_pl = pathloss("aerial_nlos_pathloss", {118.4, 23.0, 1000.0});
  if (cfg.has("system", "los_logistic")) {
    const auto v = cfg.nums("system", "los_logistic", 2);
    rc.system.fading.los_a = v[0];
    rc.system.fading.los_b = v[1];
  }
  rc.system.fading.rician_k_db = cfg.num_or("system", "rician_k_db", 10.0);
  rc.system.fading.rho = cfg.num_or("system", "fading_rho", 0.0);
  if (cfg.has("system", "gain_db_bounds")) {
    const auto v = cfg.nums("system", "gain_db_bounds", 2);
    rc.system.obs.gain_db_floor = v[0];
    rc.system.obs.gain_db_ceil = v[1];
  }
  if (cfg.has("system", "pathloss_db_bounds")) {
    const auto v = cfg.nums("system", "pathloss_db_bounds", 2);
    rc.system.obs.pathloss_db_floor = v[0];
    rc.system.obs.pathloss_db_ceil = v[1];
  }

  // [dynamics]
  rc.dynamics.arrival_rate_per_min = cfg.num_or("dynamics", "arrival_rate_per_min", 3.0);
  rc.dynamics.dwell_mean_min = cfg.num_or("dynamics", "dwell_mean_min", 3.0);
  rc.dynamics.walk_speed_mps = cfg.num_or("dynamics", "walk_speed_mps", 1.0);
  rc.dynamics.training_mean_fraction =
      cfg.num_or("dynamics", "training_mean_fraction", 0.5);

  // [trainer]
  rc.trainer.learning_rate = cfg.num_or("trainer", "learning_rate", 5e-5);
  rc.trainer.gamma = cfg.num_or("trainer", "gamma", 0.9);
  rc.trainer.minibatch_size =
      static_cast<int>(cfg.integer_or("trainer", "minibatch_size", 64));
  rc.trainer.clip_epsilon = cfg.num_or("trainer", "clip_epsilon", 0.2);
  rc.trainer.gae_lambda = cfg.num_or("trainer", "gae_lambda", 0.95);
  rc.trainer.entropy_coef = cfg.num_or("trainer", "entropy_coef", 0.01);
  rc.trainer.dual_rate = cfg.num_or("trainer", "dual_rate", 1e-3);
  rc.trainer.epochs_per_batch =
      static_cast<int>(cfg.integer_or("trainer", "epochs_per_batch", 4));
  rc.trainer.rollout_episodes =
      static_cast<int>(cfg.integer_or("trainer", "rollout_episodes", 1));
  rc.trainer.lambda_max = cfg.num_or("trainer", "lambda_max", 100.0);
  rc.trainer.grad_norm_clip = cfg.num_or("trainer", "grad_norm_clip", 0.5);
  rc.trainer.reward_scale = cfg.num_or("trainer", "reward_scale", 1e-6);
  if (cfg.has("trainer", "hidden")) {
    const auto v = cfg.nums("trainer", "hidden", 0);
    rc.trainer.hidden.clear();
    for (double h : v) rc.trainer.hidden.push_back(static_cast<int>(h));
  }
  const std::string act = cfg.str_or("trainer", "activation", "tanh");
  if (act == "tanh") rc.trainer.activation = Activation::kTanh;
  else if (act == "relu") rc.trainer.activation = Activation::kRelu;
  else throw ConfigError("trainer.activation must be tanh or relu");
  rc.system.gamma = rc.trainer.gamma;

  // [run]
  rc.run.seed = static_cast<std::uint64_t>(cfg.integer_or("run", "seed", 0));
  rc.run.episodes = cfg.integer_or("run", "episodes", 1000);
  rc.run.workers = static_cast<int>(cfg.integer_or("run", "workers", 1));
  rc.run.out_dir = cfg.str_or("run", "out_dir", "out");
  rc.run.method = cfg.str_or("run", "method", "decomposed");
  rc.run.checkpoint_every = cfg.integer_or("run", "checkpoint_every", 0);
  rc.run.eval_duration_min = cfg.num_or("run", "eval_duration_min", 30.0);
  rc.run.max_cpu_hours = cfg.num_or("run", "max_cpu_hours", 0.0);

  cfg.finish();
  rc.validate();
  return rc;
}

RunConfig RunConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_string(text.str());
}

void RunConfig::validate() const {
  system.validate();
  trainer.validate();
  if (dynamics.arrival_rate_per_min < 0.0)
    throw ConfigError("dynamics.arrival_rate_per_min must be >= 0");
  if (dynamics.dwell_mean_min <= 0.0)
    throw ConfigError("dynamics.dwell_mean_min must be > 0");
  if (dynamics.walk_speed_mps < 0.0)
    throw ConfigError("dynamics.walk_speed_mps must be >= 0");
  if (dynamics.training_mean_fraction <= 0.0)
    throw ConfigError("dynamics.training_mean_fraction must be > 0");
  if (run.episodes < 0) throw ConfigError("run.episodes must be >= 0");
  if (run.workers < 1) throw ConfigError("run.workers must be >= 1");
  if (run.out_dir.empty()) throw ConfigError("run.out_dir must not be empty");
  if (run.eval_duration_min <= 0.0)
    throw ConfigError("run.eval_duration_min must be > 0");
  if (run.max_cpu_hours < 0.0)
    throw ConfigError("run.max_cpu_hours must be >= 0");
  if (run.method != "decomposed" && run.method != "mappo" &&
      run.method != "ippo" && run.method != "full-activation-uniform" &&
      run.method != "random-assignment")
    throw ConfigError("run.method must be one of decomposed|mappo|ippo|"
                      "full-activation-uniform|random-assignment");
}

namespace {

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

void emit_system(const RunConfig& rc, std::map<std::string, std::string>& kv) {
  const SystemConfig& s = rc.system;
  kv["system.bs_count"] = std::to_string(s.bs_count());
  for (int n = 0; n < s.bs_count(); ++n) {
    const std::string base = "system.bs." + std::to_string(n);
    kv[base + ".kind"] = s.bs[n].kind == BsKind::kTbs ? "tbs" : "ntbs";
    kv[base + ".position_m"] = fmt(s.bs[n].position[0]) + " " +
                               fmt(s.bs[n].position[1]) + " " +
                               fmt(s.bs[n].position[2]);
  }
  kv["system.users_per_bs"] = std::to_string(s.users_per_bs);
  kv["system.subchannels"] = std::to_string(s.subchannels);
  kv["system.srb_count"] = std::to_string(s.srb_count);
  kv["system.subchannel_bandwidth_hz"] = fmt(s.subchannel_bandwidth_hz);
  kv["system.p_max_w"] = fmt(s.p_max_w);
  kv["system.qos_rate_bps"] = fmt(s.qos_rate_bps);
  kv["system.noise_density_w_hz"] = fmt(s.noise_density_w_hz);
  kv["system.gamma"] = fmt(s.gamma);
  kv["system.episode_length"] = std::to_string(s.episode_length);
  kv["system.area_m"] = fmt(s.area_x_m) + " " + fmt(s.area_y_m);
  kv["system.frame_duration_s"] = fmt(s.frame_duration_s);
  kv["system.tbs_tx_gain_db"] = fmt(s.tbs_tx_gain_db);
  kv["system.ntbs_tx_gain_db"] = fmt(s.ntbs_tx_gain_db);
  auto pl = [&](const std::string& key, const PathlossModel& m) {
    kv[key] = fmt(m.intercept_db) + " " + fmt(m.slope_db_per_decade) + " " +
              fmt(m.reference_distance_m);
  };
  pl("system.terrestrial_pathloss", s.terrestrial_pl);
  pl("system.aerial_los_pathloss", s.aerial_los_pl);
  pl("system.aerial_nlos_pathloss", s.aerial_nlos_pl);
  kv["system.los_logistic"] = fmt(s.fading.los_a) + " " + fmt(s.fading.los_b);
  kv["system.rician_k_db"] = fmt(s.fading.rician_k_db);
  kv["system.fading_rho"] = fmt(s.fading.rho);
  kv["system.gain_db_bounds"] =
      fmt(s.obs.gain_db_floor) + " " + fmt(s.obs.gain_db_ceil);
  kv["system.pathloss_db_bounds"] =
      fmt(s.obs.pathloss_db_floor) + " " + fmt(s.obs.pathloss_db_ceil);
}

}  // namespace

std::string RunConfig::canonical_text() const {
  std::map<std::string, std::string> kv;
  emit_system(*this, kv);

  kv["dynamics.arrival_rate_per_min"] = fmt(dynamics.arrival_rate_per_min);
  kv["dynamics.dwell_mean_min"] = fmt(dynamics.dwell_mean_min);
  kv["dynamics.walk_speed_mps"] = fmt(dynamics.walk_speed_mps);
  kv["dynamics.training_mean_fraction"] = fmt(dynamics.training_mean_fraction);

  kv["trainer.learning_rate"] = fmt(trainer.learning_rate);
  kv["trainer.gamma"] = fmt(trainer.gamma);
  kv["trainer.minibatch_size"] = std::to_string(trainer.minibatch_size);
  kv["trainer.clip_epsilon"] = fmt(trainer.clip_epsilon);
  kv["trainer.gae_lambda"] = fmt(trainer.gae_lambda);
  kv["trainer.entropy_coef"] = fmt(trainer.entropy_coef);
  kv["trainer.dual_rate"] = fmt(trainer.dual_rate);
  kv["trainer.epochs_per_batch"] = std::to_string(trainer.epochs_per_batch);
  kv["trainer.rollout_episodes"] = std::to_string(trainer.rollout_episodes);
  kv["trainer.lambda_max"] = fmt(trainer.lambda_max);
  kv["trainer.grad_norm_clip"] = fmt(trainer.grad_norm_clip);
  kv["trainer.reward_scale"] = fmt(trainer.reward_scale);
  {
    std::string h;
    for (int v : trainer.hidden) h += (h.empty() ? "" : " ") + std::to_string(v);
    kv["trainer.hidden"] = h;
  }
  kv["trainer.activation"] =
      trainer.activation == Activation::kTanh ? "tanh" : "relu";

  // run.out_dir is deliberately outside the canonical form: where outputs
  // land is not semantic.
  kv["run.seed"] = std::to_string(run.seed);
  kv["run.episodes"] = std::to_string(run.episodes);
  kv["run.workers"] = std::to_string(run.workers);
  kv["run.method"] = run.method;
  kv["run.checkpoint_every"] = std::to_string(run.checkpoint_every);
  kv["run.eval_duration_min"] = fmt(run.eval_duration_min);
  kv["run.max_cpu_hours"] = fmt(run.max_cpu_hours);

  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

std::uint64_t RunConfig::config_hash() const { return fnv1a64(canonical_text()); }

std::uint64_t RunConfig::system_hash() const {
  std::map<std::string, std::string> kv;
  emit_system(*this, kv);
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return fnv1a64(out);
}

}  // namespace corra
