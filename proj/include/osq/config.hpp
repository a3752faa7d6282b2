#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "osq/krotov.hpp"
#include "osq/protocols.hpp"

namespace osq {

enum class EngineKind { fock, moments };

enum class SweepPolicy { linesearch, krotov };

struct SweepConfig {
  std::vector<double> t_list;  // seconds, strictly increasing
  double threshold_db = 3.0;
  std::vector<ProtocolKind> families{ProtocolKind::constant, ProtocolKind::delayed,
                                     ProtocolKind::linear};
  SweepPolicy policy = SweepPolicy::linesearch;
  double g_minus = 0.0;        // rad/s; 0 = inherit protocol.g_minus
  double g_plus_initial = 0.0; // rad/s; 0 = inherit protocol.g_plus_initial
};

struct KappaStudyConfig {
  std::vector<double> reductions{1.0, 10.0, 100.0};
  double settle_efolds = 16.0;
};

/// Fully resolved run description. Frequencies arrive in plain Hz in the
/// config text (keys suffixed _hz) and live here as angular rad/s.
struct RunConfig {
  SystemParams params;
  FockCutoffs cutoffs{8, 24};
  double duration = 0.0;  // seconds
  std::optional<int> n_steps;
  double oversample = 2.0;
  EngineKind engine = EngineKind::moments;
  RotatingFrame frame = RotatingFrame::full;
  ProtocolSpec protocol;
  std::vector<ProtocolSpec> compare_list;
  KrotovConfig krotov;
  SweepConfig sweep;
  KappaStudyConfig kappa_study;
  ForceSpec force;
  int stored_max = 2000;
  std::string command;
  std::string hash;
  std::map<std::string, std::string> raw;

  /// Resolve the time grid against the dt rule (explicit n_steps wins but is
  /// still checked downstream).
  TimeGrid make_grid(const SystemParams& p, RotatingFrame f, double max_amp) const;
};

/// Flat "key = value" text, '#' comments, dotted sections.
std::map<std::string, std::string> parse_config_text(const std::string& text);

/// FNV-1a 64 over the sorted canonical key=value lines, as 16 hex chars.
std::string config_hash(const std::map<std::string, std::string>& raw);

/// Apply defaults and validate; `command` picks per-command defaults
/// (e.g. the optimize guess amplitudes).
RunConfig resolve_config(const std::map<std::string, std::string>& raw,
                         const std::string& command);

std::string to_string(EngineKind e);
std::string to_string(RotatingFrame f);
std::string to_string(ProtocolKind k);

}  // namespace osq
