#pragma once

// JSON problem configuration (see README for the schema).

#include <cstddef>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "iapi/policy_iteration.hpp"
#include "iapi/verify.hpp"

namespace iapi {

struct VerifyPlan {
  std::size_t admissible_samples = 720;
  std::size_t invariance_samples = 720;
  std::size_t value_probes = 20;
  std::size_t polyline_points = 720;
};

struct ProblemConfig {
  nlohmann::json document;
  std::string fingerprint;  // FNV-1a of the canonical document
  PIConfig pi;
  VerifySettings verify;
  VerifyPlan plan;
};

/// Parses and validates a config. `origin` names the source in messages.
/// Throws ConfigError.
ProblemConfig parse_config(const std::string& text, const std::string& origin = "<config>");
ProblemConfig load_config(const std::filesystem::path& path);

/// Region from a config object: {"box": {"lower": [...], "upper": [...]}} or
/// {"ball": {"radius": r, "norm": "inf" | "2"}}.
Region parse_region(const nlohmann::json& j, std::size_t n, const std::string& where);

std::string fnv1a_hex(const std::string& bytes);

}  // namespace iapi
