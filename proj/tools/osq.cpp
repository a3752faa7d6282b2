// Batch front-end for the optosqueeze shared library. Parses a config file,
// runs one command and writes the deterministic artifacts to --out.
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "optosqueeze.h"

namespace {

struct ConfigHandle {
  osq_config* ptr = nullptr;
  ~ConfigHandle() { osq_config_free(ptr); }
};

struct ResultHandle {
  osq_result* ptr = nullptr;
  ~ResultHandle() { osq_result_free(ptr); }
};

int fail(const char* stage, osq_status status) {
  std::fprintf(stderr, "osq: %s failed (%d): %s\n", stage, static_cast<int>(status),
               osq_last_error());
  return static_cast<int>(status);
}

int run(const std::string& command, const std::string& config_path,
        const std::string& out_dir, const std::vector<std::string>& overrides) {
  ConfigHandle cfg;
  osq_status status = osq_config_load(config_path.c_str(), &cfg.ptr);
  if (status != OSQ_OK) return fail("config load", status);

  for (const std::string& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::fprintf(stderr, "osq: --set expects key=value, got '%s'\n", kv.c_str());
      return 2;
    }
    status = osq_config_set(cfg.ptr, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
    if (status != OSQ_OK) return fail("config set", status);
  }

  char hash[17];
  if (osq_config_hash(cfg.ptr, hash, sizeof hash) == OSQ_OK) {
    std::fprintf(stderr, "osq: %s config_hash=%s\n", command.c_str(), hash);
  }

  ResultHandle result;
  status = osq_run(cfg.ptr, command.c_str(), &result.ptr);
  if (status != OSQ_OK) return fail(command.c_str(), status);

  status = osq_result_write(result.ptr, out_dir.c_str());
  if (status != OSQ_OK) return fail("write", status);

  for (int i = 0; i < osq_result_count(result.ptr); ++i) {
    std::printf("wrote %s/%s\n", out_dir.c_str(), osq_result_name(result.ptr, i));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dissipative squeezing simulator and pulse optimizer"};
  app.set_version_flag("--version", std::string(osq_version()));
  app.require_subcommand(1);

  const std::vector<std::string> commands = {"simulate", "optimize", "compare",
                                             "qsl-sweep", "kappa-study"};
  std::string config_path, out_dir;
  std::vector<std::string> overrides;
  for (const std::string& name : commands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "config file (key = value lines)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory")->required();
    sub->add_option("--set", overrides, "override a config key (key=value)");
  }

  CLI11_PARSE(app, argc, argv);
  return run(app.get_subcommands().front()->get_name(), config_path, out_dir, overrides);
}
