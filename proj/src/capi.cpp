#include "optosqueeze.h"

#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>

#include "osq/runner.hpp"

struct osq_config {
  std::map<std::string, std::string> raw;
};

struct osq_result {
  osq::RunResult result;
};

namespace {

thread_local std::string g_last_error;

osq_status to_status(osq::ErrorCode code) {
  switch (code) {
    case osq::ErrorCode::invalid_argument: return OSQ_ERR_INVALID_ARGUMENT;
    case osq::ErrorCode::config: return OSQ_ERR_CONFIG;
    case osq::ErrorCode::numeric: return OSQ_ERR_NUMERIC;
    case osq::ErrorCode::io: return OSQ_ERR_IO;
    case osq::ErrorCode::unsupported: return OSQ_ERR_UNSUPPORTED;
    case osq::ErrorCode::internal: return OSQ_ERR_INTERNAL;
  }
  return OSQ_ERR_INTERNAL;
}

template <typename Fn>
osq_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const osq::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return OSQ_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return OSQ_ERR_INTERNAL;
  }
}

}  // namespace

extern "C" {

const char* osq_version(void) { return "0.1.0"; }

const char* osq_last_error(void) { return g_last_error.c_str(); }

osq_status osq_config_load(const char* path, osq_config** out) {
  return guarded([&]() -> osq_status {
    if (!path || !out) {
      g_last_error = "null argument";
      return OSQ_ERR_INVALID_ARGUMENT;
    }
    std::ifstream in(path);
    if (!in) {
      g_last_error = std::string("cannot open config file: ") + path;
      return OSQ_ERR_IO;
    }
    std::ostringstream text;
    text << in.rdbuf();
    auto cfg = std::make_unique<osq_config>();
    cfg->raw = osq::parse_config_text(text.str());
    *out = cfg.release();
    return OSQ_OK;
  });
}

osq_status osq_config_parse(const char* text, osq_config** out) {
  return guarded([&]() -> osq_status {
    if (!text || !out) {
      g_last_error = "null argument";
      return OSQ_ERR_INVALID_ARGUMENT;
    }
    auto cfg = std::make_unique<osq_config>();
    cfg->raw = osq::parse_config_text(text);
    *out = cfg.release();
    return OSQ_OK;
  });
}

osq_status osq_config_set(osq_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value || !*key) {
    g_last_error = "null or empty argument";
    return OSQ_ERR_INVALID_ARGUMENT;
  }
  cfg->raw[key] = value;
  return OSQ_OK;
}

osq_status osq_config_hash(const osq_config* cfg, char* buf, size_t buflen) {
  if (!cfg || !buf || buflen < 17) {
    g_last_error = "need a buffer of at least 17 bytes";
    return OSQ_ERR_INVALID_ARGUMENT;
  }
  const std::string h = osq::config_hash(cfg->raw);
  std::memcpy(buf, h.c_str(), h.size() + 1);
  return OSQ_OK;
}

void osq_config_free(osq_config* cfg) { delete cfg; }

osq_status osq_run(const osq_config* cfg, const char* command, osq_result** out) {
  return guarded([&]() -> osq_status {
    if (!cfg || !command || !out) {
      g_last_error = "null argument";
      return OSQ_ERR_INVALID_ARGUMENT;
    }
    const osq::RunConfig resolved = osq::resolve_config(cfg->raw, command);
    auto result = std::make_unique<osq_result>();
    result->result = osq::run_command(resolved, command);
    *out = result.release();
    return OSQ_OK;
  });
}

int osq_result_count(const osq_result* result) {
  return result ? static_cast<int>(result->result.artifacts.size()) : 0;
}

const char* osq_result_name(const osq_result* result, int index) {
  if (!result || index < 0 || index >= osq_result_count(result)) return nullptr;
  return result->result.artifacts[index].name.c_str();
}

const char* osq_result_data(const osq_result* result, int index) {
  if (!result || index < 0 || index >= osq_result_count(result)) return nullptr;
  return result->result.artifacts[index].content.c_str();
}

const char* osq_result_summary_json(const osq_result* result) {
  if (!result) return nullptr;
  const osq::Artifact* a = result->result.find("summary.json");
  return a ? a->content.c_str() : nullptr;
}

osq_status osq_result_write(const osq_result* result, const char* out_dir) {
  return guarded([&]() -> osq_status {
    if (!result || !out_dir) {
      g_last_error = "null argument";
      return OSQ_ERR_INVALID_ARGUMENT;
    }
    osq::write_result(result->result, out_dir);
    return OSQ_OK;
  });
}

void osq_result_free(osq_result* result) { delete result; }

}  // extern "C"
