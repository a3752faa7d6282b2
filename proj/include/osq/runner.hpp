#pragma once

#include "osq/config.hpp"

namespace osq {

struct Artifact {
  std::string name;
  std::string content;
};

struct RunResult {
  std::vector<Artifact> artifacts;

  const Artifact* find(const std::string& name) const;
  const std::string& summary_json() const;  // the "summary.json" artifact
};

RunResult run_simulate(const RunConfig& cfg);
RunResult run_compare(const RunConfig& cfg);
RunResult run_optimize(const RunConfig& cfg);
RunResult run_qsl_sweep(const RunConfig& cfg);
RunResult run_kappa_study(const RunConfig& cfg);

/// command: simulate | optimize | compare | qsl-sweep | kappa-study
RunResult run_command(const RunConfig& cfg, const std::string& command);

void write_result(const RunResult& result, const std::string& out_dir);

}  // namespace osq
