#include "iapi/history_io.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace iapi {

using nlohmann::json;

namespace {

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json region_json(const Region& r) {
  if (const Box* b = r.box()) return {{"kind", "box"}, {"lower", vector_json(b->lower)}, {"upper", vector_json(b->upper)}};
  if (const Ball* b = r.ball()) {
    return {{"kind", "ball"}, {"radius", b->radius}, {"norm", b->norm == Norm::kInfinity ? "inf" : "2"}};
  }
  return {{"kind", "sublevel"}, {"level", r.sublevel()->level}};
}

[[noreturn]] void bad(const std::string& what) { throw HistoryError("malformed history: " + what); }

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string to_string(RegionMode mode) {
  switch (mode) {
    case RegionMode::kStandard: return "standard";
    case RegionMode::kEnlarge: return "enlarge";
    case RegionMode::kFrozen: return "frozen";
  }
  return "unknown";
}

json history_to_json(const PIHistory& history, const ProblemConfig& config) {
  json basis = json::array();
  for (std::size_t j = 0; j < config.pi.basis->size(); ++j) basis.push_back(config.pi.basis->term_name(j));

  json iterations = json::array();
  for (const auto& rec : history.iterations) {
    json region = region_json(*rec.region);
    if (region["kind"] == "sublevel") {
      region["value_iteration"] = rec.index;
      region["parent"] = history.mode == RegionMode::kEnlarge ? "upsilon" : (rec.index == 0 ? "omega0" : "previous");
    } else {
      region["kind"] = "omega0";
    }
    iterations.push_back({
        {"index", rec.index},
        {"weights", vector_json(rec.value.weights())},
        {"radius", rec.radius ? json(*rec.radius) : json(nullptr)},
        {"region", region},
        {"policy_distance", finite_or_null(rec.policy_distance)},
        {"hjb_rms", finite_or_null(rec.hjb_rms)},
        {"lsq_rms", finite_or_null(rec.lsq_rms)},
        {"grid_points", rec.grid_points},
        {"next_grid_points", rec.next_grid_points},
        {"diagnostics",
         {{"positive_definite", rec.positive_definite},
          {"lyapunov_slack", finite_or_null(rec.lyapunov_slack)},
          {"monotone_slack", rec.monotone_slack ? finite_or_null(*rec.monotone_slack) : json(nullptr)},
          {"radius_monotone", rec.radius_monotone}}},
    });
  }
  return {
      {"format", "iapi-history/1"},
      {"config_fingerprint", config.fingerprint},
      {"mode", to_string(history.mode)},
      {"status", history.converged ? "converged" : "max_iterations"},
      {"converged", history.converged},
      {"basis", basis},
      {"omega0", region_json(*history.omega0)},
      {"iterations", iterations},
  };
}

PIHistory history_from_json(const json& j, const ProblemConfig& config) {
  try {
    if (!j.is_object() || j.value("format", "") != "iapi-history/1") bad("unknown format");
    if (j.at("config_fingerprint") != config.fingerprint) {
      throw HistoryError("history was produced by a different config (fingerprint " +
                         j.at("config_fingerprint").get<std::string>() + ", expected " + config.fingerprint + ")");
    }
    const json& its = j.at("iterations");
    if (!its.is_array() || its.empty()) throw HistoryError("history contains no iterations");

    PIHistory h;
    const std::string mode = j.at("mode");
    if (mode == "standard") {
      h.mode = RegionMode::kStandard;
    } else if (mode == "enlarge") {
      h.mode = RegionMode::kEnlarge;
    } else if (mode == "frozen") {
      h.mode = RegionMode::kFrozen;
    } else {
      bad("mode " + mode);
    }
    if (h.mode != config.pi.mode) throw HistoryError("history region mode differs from the config");
    h.converged = j.at("converged").get<bool>();
    h.omega0 = config.pi.omega0;

    std::shared_ptr<const Region> omega = config.pi.omega0;
    for (std::size_t i = 0; i < its.size(); ++i) {
      const json& r = its[i];
      if (r.at("index").get<std::size_t>() != i) bad("iteration indices out of order");
      const auto& wj = r.at("weights");
      if (!wj.is_array() || wj.size() != config.pi.basis->size()) bad("weight count");
      Eigen::VectorXd w(static_cast<Eigen::Index>(wj.size()));
      for (std::size_t k = 0; k < wj.size(); ++k) w[static_cast<Eigen::Index>(k)] = wj[k].get<double>();
      IterationRecord rec{.index = i, .value = ValueFunctionEstimate(config.pi.basis, w)};
      if (!r.at("radius").is_null()) rec.radius = r.at("radius").get<double>();

      const json& region = r.at("region");
      const std::string kind = region.at("kind");
      if (kind == "sublevel") {
        std::shared_ptr<const Region> parent = omega;
        if (h.mode == RegionMode::kEnlarge) {
          if (!config.pi.upsilon) bad("enlarge history without upsilon in the config");
          parent = config.pi.upsilon;
        }
        rec.region = std::make_shared<const Region>(SublevelSet{rec.value, region.at("level").get<double>(), parent});
      } else if (kind == "omega0") {
        rec.region = config.pi.omega0;
      } else {
        bad("region kind " + kind);
      }

      const auto num = [](const json& v) {
        return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
      };
      rec.policy_distance = num(r.at("policy_distance"));
      rec.hjb_rms = num(r.at("hjb_rms"));
      rec.lsq_rms = num(r.at("lsq_rms"));
      rec.grid_points = r.at("grid_points").get<std::size_t>();
      rec.next_grid_points = r.at("next_grid_points").get<std::size_t>();
      const json& d = r.at("diagnostics");
      rec.positive_definite = d.at("positive_definite").get<bool>();
      rec.lyapunov_slack = num(d.at("lyapunov_slack"));
      if (!d.at("monotone_slack").is_null()) rec.monotone_slack = d.at("monotone_slack").get<double>();
      rec.radius_monotone = d.at("radius_monotone").get<bool>();

      omega = rec.region;
      h.iterations.push_back(std::move(rec));
    }
    return h;
  } catch (const Error&) {
    throw;
  } catch (const json::exception& e) {
    bad(e.what());
  }
}

std::string weights_csv(const PIHistory& history) {
  std::ostringstream os;
  os << "i";
  const std::size_t k = history.iterations.empty() ? 0 : history.iterations.front().value.basis().size();
  for (std::size_t j = 0; j < k; ++j) os << ",w" << (j + 1);
  os << ",c_star,policy_distance,hjb_rms\n";
  for (const auto& rec : history.iterations) {
    os << rec.index;
    for (Eigen::Index j = 0; j < rec.value.weights().size(); ++j) os << "," << format_double(rec.value.weights()[j]);
    os << "," << (rec.radius ? format_double(*rec.radius) : std::string("nan"));
    os << "," << format_double(rec.policy_distance) << "," << format_double(rec.hjb_rms) << "\n";
  }
  return os.str();
}

std::string polylines_csv(const std::vector<std::vector<StateVector>>& polylines) {
  std::ostringstream os;
  os << "x1,x2\n";
  for (std::size_t p = 0; p < polylines.size(); ++p) {
    if (p > 0) os << "\n";
    for (const auto& x : polylines[p]) os << format_double(x[0]) << "," << format_double(x[1]) << "\n";
  }
  return os.str();
}

json report_to_json(const CheckReport& report) {
  return {
      {"name", report.name},
      {"passed", report.passed},
      {"tested", report.tested},
      {"failures", report.failures},
      {"worst",
       {{"state", vector_json(report.worst.state)},
        {"measured", finite_or_null(report.worst.measured)},
        {"threshold", report.worst.threshold},
        {"note", report.worst.note}}},
  };
}

}  // namespace iapi
