#include "osq/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <sstream>

namespace osq {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void bad_field(const std::string& key, const std::string& why) {
  throw Error(ErrorCode::config, key + ": " + why);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) bad_field(key, "trailing characters in number '" + value + "'");
    if (!std::isfinite(v)) bad_field(key, "value must be finite");
    return v;
  } catch (const Error&) {
    throw;
  } catch (...) {
    bad_field(key, "cannot parse number '" + value + "'");
  }
}

int parse_int(const std::string& key, const std::string& value) {
  const double v = parse_double(key, value);
  if (v != std::floor(v)) bad_field(key, "expected an integer");
  return static_cast<int>(v);
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "on" || value == "1") return true;
  if (value == "false" || value == "off" || value == "0") return false;
  bad_field(key, "expected true/false");
}

std::vector<double> parse_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::istringstream ss(value);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cell = trim(cell);
    if (!cell.empty()) out.push_back(parse_double(key, cell));
  }
  if (out.empty()) bad_field(key, "expected a comma-separated list");
  return out;
}

ProtocolKind parse_kind(const std::string& key, const std::string& value) {
  if (value == "constant") return ProtocolKind::constant;
  if (value == "linear") return ProtocolKind::linear;
  if (value == "delayed") return ProtocolKind::delayed;
  if (value == "file") return ProtocolKind::file;
  bad_field(key, "unknown protocol kind '" + value + "'");
}

/// Typed view over the raw map that tracks which keys were consumed.
class Fields {
 public:
  explicit Fields(const std::map<std::string, std::string>& raw) : raw_(raw) {}

  bool has(const std::string& key) const { return raw_.count(key) > 0; }

  std::string str(const std::string& key, const std::string& fallback) {
    auto it = raw_.find(key);
    if (it == raw_.end()) return fallback;
    used_.insert(key);
    return it->second;
  }
  double num(const std::string& key, double fallback) {
    auto it = raw_.find(key);
    if (it == raw_.end()) return fallback;
    used_.insert(key);
    return parse_double(key, it->second);
  }
  int integer(const std::string& key, int fallback) {
    auto it = raw_.find(key);
    if (it == raw_.end()) return fallback;
    used_.insert(key);
    return parse_int(key, it->second);
  }
  bool boolean(const std::string& key, bool fallback) {
    auto it = raw_.find(key);
    if (it == raw_.end()) return fallback;
    used_.insert(key);
    return parse_bool(key, it->second);
  }
  std::vector<double> list(const std::string& key, std::vector<double> fallback) {
    auto it = raw_.find(key);
    if (it == raw_.end()) return fallback;
    used_.insert(key);
    return parse_list(key, it->second);
  }

  void reject_unused() const {
    for (const auto& [key, value] : raw_) {
      (void)value;
      if (!used_.count(key)) bad_field(key, "unknown configuration key");
    }
  }
  void mark_used(const std::string& key) { used_.insert(key); }

 private:
  const std::map<std::string, std::string>& raw_;
  std::set<std::string> used_;
};

ProtocolSpec read_protocol(Fields& f, const std::string& prefix,
                           const ProtocolSpec& defaults, const std::string& label) {
  ProtocolSpec spec = defaults;
  spec.label = label;
  spec.kind = parse_kind(prefix + "kind", f.str(prefix + "kind", to_string(defaults.kind)));
  spec.g_minus = kTwoPi * f.num(prefix + "g_minus_hz", defaults.g_minus / kTwoPi);
  spec.ratio_final = f.num(prefix + "ratio_final", defaults.ratio_final);
  spec.g_plus_initial =
      kTwoPi * f.num(prefix + "g_plus_initial_hz", defaults.g_plus_initial / kTwoPi);
  if (f.has(prefix + "t_delay_s")) {
    spec.t_delay = f.num(prefix + "t_delay_s", 0.0);
  }
  spec.pulse_file = f.str(prefix + "pulse_file", defaults.pulse_file);
  return spec;
}

}  // namespace

std::string to_string(EngineKind e) {
  return e == EngineKind::fock ? "fock" : "moments";
}
std::string to_string(RotatingFrame f) {
  return f == RotatingFrame::rwa ? "rwa" : "full";
}
std::string to_string(ProtocolKind k) {
  switch (k) {
    case ProtocolKind::constant: return "constant";
    case ProtocolKind::linear: return "linear";
    case ProtocolKind::delayed: return "delayed";
    case ProtocolKind::file: return "file";
  }
  return "?";
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> raw;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line.resize(hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::config,
                  "line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw Error(ErrorCode::config,
                  "line " + std::to_string(lineno) + ": empty key or value");
    }
    if (raw.count(key)) {
      throw Error(ErrorCode::config, key + ": duplicate key");
    }
    raw[key] = value;
  }
  return raw;
}

std::string config_hash(const std::map<std::string, std::string>& raw) {
  uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
  };
  for (const auto& [key, value] : raw) {  // std::map iterates sorted
    mix(key);
    mix("=");
    mix(value);
    mix("\n");
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

TimeGrid RunConfig::make_grid(const SystemParams& p, RotatingFrame f, double max_amp) const {
  TimeGrid grid;
  grid.duration = duration;
  if (n_steps) {
    grid.n_steps = *n_steps;
  } else {
    const int base = required_steps(duration, p, max_amp, f);
    grid.n_steps = static_cast<int>(std::ceil(base * oversample));
  }
  grid.validate();
  return grid;
}

RunConfig resolve_config(const std::map<std::string, std::string>& raw,
                         const std::string& command) {
  Fields f(raw);
  RunConfig cfg;
  cfg.command = command;
  cfg.raw = raw;
  cfg.hash = config_hash(raw);

  cfg.params.omega_cav = kTwoPi * f.num("params.omega_cav_hz", 6.23e9);
  cfg.params.omega_mech = kTwoPi * f.num("params.omega_mech_hz", 3.6e6);
  cfg.params.g0 = kTwoPi * f.num("params.g0_hz", 36.0);
  cfg.params.kappa = kTwoPi * f.num("params.kappa_hz", 450e3);
  cfg.params.gamma = kTwoPi * f.num("params.gamma_hz", 3.0);
  cfg.params.n_th = f.num("params.n_th", 2.0);
  try {
    cfg.params.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::config, std::string("params: ") + e.what());
  }

  cfg.cutoffs.n_cav = f.integer("cutoffs.n_cav", 8);
  cfg.cutoffs.n_mech = f.integer("cutoffs.n_mech", 24);
  try {
    cfg.cutoffs.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::config, std::string("cutoffs: ") + e.what());
  }

  // Durations: seconds directly, or in units of the cavity decay time 2*pi/kappa.
  if (f.has("grid.T_s") && f.has("grid.T_kappa_units")) {
    bad_field("grid.T_s", "give either grid.T_s or grid.T_kappa_units, not both");
  }
  if (f.has("grid.T_s")) {
    cfg.duration = f.num("grid.T_s", 0.0);
  } else {
    cfg.duration = f.num("grid.T_kappa_units", 42.0) * kTwoPi / cfg.params.kappa;
  }
  if (!(cfg.duration > 0)) bad_field("grid.T_s", "duration must be positive");
  if (f.has("grid.n_steps")) cfg.n_steps = f.integer("grid.n_steps", 0);
  cfg.oversample = f.num("grid.oversample", 2.0);
  if (!(cfg.oversample >= 1.0)) bad_field("grid.oversample", "must be >= 1");

  const std::string engine = f.str("engine", "moments");
  if (engine == "fock") cfg.engine = EngineKind::fock;
  else if (engine == "moments") cfg.engine = EngineKind::moments;
  else bad_field("engine", "expected fock or moments");

  const std::string mode = f.str("mode", "full");
  if (mode == "rwa") cfg.frame = RotatingFrame::rwa;
  else if (mode == "full") cfg.frame = RotatingFrame::full;
  else bad_field("mode", "expected rwa or full");

  // Per-command guess defaults: the optimizer starts from the weak two-tone
  // guess, everything else from the long-protocol constant family.
  ProtocolSpec proto_defaults;
  proto_defaults.kind = ProtocolKind::constant;
  if (command == "optimize") {
    proto_defaults.g_minus = kTwoPi * 5.8e3;
    proto_defaults.ratio_final = 0.7;
  } else {
    proto_defaults.g_minus = kTwoPi * 70e3;
    proto_defaults.ratio_final = 0.86;
  }
  proto_defaults.g_plus_initial = kTwoPi * 25e3;
  cfg.protocol = read_protocol(f, "protocol.", proto_defaults, "protocol");

  if (f.has("compare.list")) {
    std::istringstream ss(f.str("compare.list", ""));
    std::string label;
    while (std::getline(ss, label, ',')) {
      label = trim(label);
      if (label.empty()) continue;
      cfg.compare_list.push_back(read_protocol(f, "protocol." + label + ".", cfg.protocol, label));
    }
    if (cfg.compare_list.size() < 2) {
      bad_field("compare.list", "compare needs at least 2 protocols");
    }
  }

  cfg.krotov.lambda_plus = f.num("krotov.lambda_plus", 0.0);
  cfg.krotov.lambda_minus = f.num("krotov.lambda_minus", 0.0);
  cfg.krotov.max_iters = f.integer("krotov.max_iters", 50);
  cfg.krotov.stop_delta_j = f.num("krotov.stop_delta_j", 1e-9);
  if (f.has("krotov.amplitude_cap_hz")) {
    cfg.krotov.amplitude_cap = kTwoPi * f.num("krotov.amplitude_cap_hz", 0.0);
    if (!(*cfg.krotov.amplitude_cap > 0)) bad_field("krotov.amplitude_cap_hz", "must be > 0");
  }
  const std::string kmode = f.str("krotov.mode", "rwa");
  if (kmode == "rwa") cfg.krotov.frame = RotatingFrame::rwa;
  else if (kmode == "full") cfg.krotov.frame = RotatingFrame::full;
  else bad_field("krotov.mode", "expected rwa or full");
  cfg.krotov.snapshot_every = f.integer("krotov.snapshot_every", 0);
  if (!(cfg.krotov.stop_delta_j > 0)) bad_field("krotov.stop_delta_j", "must be > 0");
  if (cfg.krotov.max_iters < 0) bad_field("krotov.max_iters", "must be >= 0");

  if (f.has("sweep.T_list_kappa_units") && f.has("sweep.T_list_s")) {
    bad_field("sweep.T_list_s", "give only one sweep duration list");
  }
  if (f.has("sweep.T_list_kappa_units")) {
    for (double u : f.list("sweep.T_list_kappa_units", {}))
      cfg.sweep.t_list.push_back(u * kTwoPi / cfg.params.kappa);
  } else if (f.has("sweep.T_list_s")) {
    cfg.sweep.t_list = f.list("sweep.T_list_s", {});
  } else {
    const double lo = f.num("sweep.T_log_min_s", 0.1e-6);
    const double hi = f.num("sweep.T_log_max_s", 150e-6);
    const int pts = f.integer("sweep.T_log_points", 12);
    if (!(lo > 0 && hi > lo && pts >= 2)) bad_field("sweep.T_log_min_s", "bad log range");
    for (int i = 0; i < pts; ++i) {
      cfg.sweep.t_list.push_back(lo * std::pow(hi / lo, double(i) / (pts - 1)));
    }
  }
  for (size_t i = 1; i < cfg.sweep.t_list.size(); ++i) {
    if (!(cfg.sweep.t_list[i] > cfg.sweep.t_list[i - 1])) {
      bad_field("sweep.T_list_s", "sweep durations must be strictly increasing");
    }
  }
  cfg.sweep.threshold_db = f.num("sweep.threshold_db", 3.0);
  if (f.has("sweep.protocols")) {
    cfg.sweep.families.clear();
    std::istringstream ss(f.str("sweep.protocols", ""));
    std::string name;
    while (std::getline(ss, name, ',')) {
      name = trim(name);
      if (!name.empty()) cfg.sweep.families.push_back(parse_kind("sweep.protocols", name));
    }
    if (cfg.sweep.families.empty()) bad_field("sweep.protocols", "empty family list");
  }
  const std::string policy = f.str("sweep.policy", "linesearch");
  if (policy == "linesearch") cfg.sweep.policy = SweepPolicy::linesearch;
  else if (policy == "krotov") cfg.sweep.policy = SweepPolicy::krotov;
  else bad_field("sweep.policy", "expected linesearch or krotov");
  cfg.sweep.g_minus = kTwoPi * f.num("sweep.g_minus_hz", cfg.protocol.g_minus / kTwoPi);
  cfg.sweep.g_plus_initial =
      kTwoPi * f.num("sweep.g_plus_initial_hz", cfg.protocol.g_plus_initial / kTwoPi);

  cfg.kappa_study.reductions = f.list("kappa_study.reductions", {1.0, 10.0, 100.0});
  for (double r : cfg.kappa_study.reductions) {
    if (!(r >= 1.0)) bad_field("kappa_study.reductions", "reductions must be >= 1");
  }
  cfg.kappa_study.settle_efolds = f.num("kappa_study.settle_efolds", 16.0);

  cfg.force.enabled = f.boolean("force.enabled", false);
  cfg.force.photon_number = f.num("force.photon_number", 0.0);

  cfg.stored_max = f.integer("output.stored_max", 2000);
  if (cfg.stored_max < 2) bad_field("output.stored_max", "must be >= 2");

  f.reject_unused();
  return cfg;
}

}  // namespace osq
