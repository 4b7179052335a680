#pragma once

// Serialization of run histories, check reports and plot data.

#include <string>
#include <vector>

#include <json.hpp>

#include "iapi/config.hpp"
#include "iapi/history.hpp"
#include "iapi/verify.hpp"

namespace iapi {

/// "%.17g".
std::string format_double(double v);

nlohmann::json history_to_json(const PIHistory& history, const ProblemConfig& config);

/// Rebuilds regions and value functions from a serialized history. Throws
/// HistoryError on malformed input, an empty history or a fingerprint that
/// does not match `config`.
PIHistory history_from_json(const nlohmann::json& j, const ProblemConfig& config);

/// Header "i,w1..wK,c_star,policy_distance,hjb_rms", one row per iteration.
std::string weights_csv(const PIHistory& history);

/// x1,x2 rows; polylines separated by a blank line.
std::string polylines_csv(const std::vector<std::vector<StateVector>>& polylines);

nlohmann::json report_to_json(const CheckReport& report);

std::string to_string(RegionMode mode);

}  // namespace iapi
