#include "iapi/cli.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "iapi/history_io.hpp"
#include "iapi/policy_iteration.hpp"
#include "iapi/region.hpp"
#include "iapi/verify.hpp"

namespace iapi::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kPaperExample = R"json({
  "description": "xdot1 = -x1 + x2, xdot2 = -(x1+x2)/2 + x2 sin(x1)^2/2 + sin(x1) u; r = x1^2 + x2^2 + u^2. Optimum V* = x1^2/2 + x2^2, mu* = -x2 sin(x1).",
  "state_dim": 2,
  "input_dim": 1,
  "f": ["-x1 + x2", "-(x1 + x2)/2 + x2*sin(x1)^2/2"],
  "g": [["0"], ["sin(x1)"]],
  "Q": "x1^2 + x2^2",
  "R": [[1]],
  "mu0": ["0"],
  "omega0": {"box": {"lower": [-1, -1], "upper": [1, 1]}},
  "basis": {"monomials": {"min_degree": 2, "max_degree": 2}},
  "pi": {"epsilon": 1e-6, "max_iterations": 10, "spacing": 0.01, "region_mode": "standard"},
  "integrator": {"h": 0.001, "t_max": 50, "delta_origin": 0.0001},
  "verify": {"admissible_samples": 720, "invariance_samples": 720, "value_probes": 20}
}
)json";

constexpr const char* kLqrScalar = R"json({
  "description": "Scalar LQR xdot = x + u, r = x^2 + u^2; Riccati root p = 1 + sqrt(2).",
  "state_dim": 1,
  "input_dim": 1,
  "f": ["x1"],
  "g": [["1"]],
  "Q": "x1^2",
  "R": [[1]],
  "mu0": ["-2*x1"],
  "omega0": {"box": {"lower": [-1], "upper": [1]}},
  "basis": {"monomials": {"min_degree": 2, "max_degree": 2}},
  "pi": {"epsilon": 1e-4, "max_iterations": 8, "spacing": 0.01, "region_mode": "standard"},
  "integrator": {"h": 0.001, "t_max": 50, "delta_origin": 0.0001},
  "verify": {"admissible_samples": 720, "invariance_samples": 720, "value_probes": 20}
}
)json";

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("IoError", "cannot write " + path.string());
  out << content;
  if (!out) throw Error("IoError", "failed writing " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("IoError", "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("IoError", "cannot create directory " + dir.string() + ": " + ec.message());
}

// Invariance needs a sublevel set of a positive definite V. When none can be
// formed (classic SAM can drive V indefinite) the check fails, with the
// boundary point of lowest V as witness.
CheckReport invariance_check(const ProblemConfig& cfg, const IterationRecord& last, const Policy& mu) {
  try {
    return check_invariance(*cfg.pi.model, mu, *invariance_region(*last.region, last.value, cfg.pi.boundary),
                            cfg.plan.invariance_samples, cfg.verify);
  } catch (const Error& e) {
    const auto boundary =
        boundary_samples(*last.region, boundary_count(*last.region, cfg.pi.boundary), cfg.pi.boundary).points;
    CheckReport report{.name = "invariance", .passed = false, .tested = boundary.size(), .failures = 0, .worst = {}};
    double lowest = std::numeric_limits<double>::infinity();
    for (const auto& x : boundary) {
      const double v = last.value(x);
      if (v <= 0.0) ++report.failures;
      if (v < lowest) {
        lowest = v;
        report.worst.state = x;
      }
    }
    report.failures = std::max<std::size_t>(report.failures, 1);
    report.worst.measured = std::numeric_limits<double>::infinity();
    report.worst.threshold = 1.0 + cfg.verify.tolerances.tau_inv;
    report.worst.note = "no invariant sublevel set (" + e.kind() + ": " + e.what() + "); V = " + format_double(lowest);
    return report;
  }
}

}  // namespace

const std::map<std::string, Demo>& demos() {
  static const std::map<std::string, Demo> table{
      {"paper-example", {"paper_example.json", kPaperExample}},
      {"lqr-scalar", {"lqr_scalar.json", kLqrScalar}},
  };
  return table;
}

std::vector<StateVector> probe_states(const Region& region, std::size_t count, const BoundarySettings& settings) {
  std::vector<StateVector> probes;
  if (count == 0) return probes;
  const auto fraction = [&](std::size_t k) {
    return count == 1 ? 0.6 : 0.3 + 0.6 * static_cast<double>(k) / static_cast<double>(count - 1);
  };
  if (region.dim() == 2) {
    for (std::size_t k = 0; k < count; ++k) {
      const double angle = 0.1 + 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(count);
      const StateVector dir = (StateVector(2) << std::cos(angle), std::sin(angle)).finished();
      probes.push_back(fraction(k) * ray_extent(region, dir, settings) * dir);
    }
    return probes;
  }
  BoundarySettings bs = settings;
  bs.rays = std::max<std::size_t>(count, 8);
  const auto boundary = boundary_samples(region, boundary_count(region, bs), bs).points;
  for (std::size_t k = 0; k < count; ++k) {
    probes.push_back(fraction(k) * boundary[(k * boundary.size() / count + k) % boundary.size()]);
  }
  return probes;
}

std::shared_ptr<const Region> invariance_region(const Region& final_region, const ValueFunctionEstimate& v,
                                                const BoundarySettings& settings) {
  if (final_region.sublevel()) return std::make_shared<const Region>(final_region);
  const auto boundary = boundary_samples(final_region, boundary_count(final_region, settings), settings);
  double level = 0.0;
  for (const auto& p : boundary.points) level = std::max(level, v(p));
  return std::make_shared<const Region>(SublevelSet{v, level, nullptr});
}

int cmd_run(const fs::path& config_path, const fs::path& out_dir, std::ostream& log, std::ostream& err) {
  try {
    const ProblemConfig cfg = load_config(config_path);
    ensure_dir(out_dir);
    const PIHistory history = run_pi(cfg.pi);

    for (const auto& rec : history.iterations) {
      log << "iteration " << rec.index << ": w = [" << rec.value.weights().transpose() << "]"
          << ", c* = " << (rec.radius ? format_double(*rec.radius) : std::string("-"))
          << ", distance = " << rec.policy_distance << ", hjb_rms = " << rec.hjb_rms << "\n";
    }

    write_file(out_dir / "history.json", history_to_json(history, cfg).dump(2) + "\n");
    write_file(out_dir / "weights.csv", weights_csv(history));
    if (cfg.pi.model->state_dim() == 2) {
      std::vector<std::vector<StateVector>> all;
      const auto emit = [&](std::size_t i, const Region& r) {
        auto line = boundary_polyline(r, r.box() ? cfg.plan.polyline_points / 4 : cfg.plan.polyline_points,
                                      cfg.pi.boundary);
        write_file(out_dir / ("region_" + std::to_string(i) + ".csv"), polylines_csv({line}));
        all.push_back(std::move(line));
      };
      emit(0, *history.omega0);
      for (const auto& rec : history.iterations) emit(rec.index + 1, *rec.region);
      write_file(out_dir / "regions.csv", polylines_csv(all));
    }

    if (history.converged) {
      log << "converged after " << history.iterations.size() << " iteration(s)\n";
      return 0;
    }
    log << "stopped at max_iterations = " << cfg.pi.max_iterations << " without convergence\n";
    return 2;
  } catch (const Error& e) {
    err << "error (" << e.kind() << "): " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_verify(const fs::path& config_path, const fs::path& history_path, const fs::path& out_dir,
               std::ostream& log, std::ostream& err) {
  try {
    const ProblemConfig cfg = load_config(config_path);
    json hj;
    try {
      hj = json::parse(read_file(history_path));
    } catch (const json::parse_error& e) {
      throw HistoryError(history_path.string() + ": invalid JSON (" + e.what() + ")");
    }
    const PIHistory history = history_from_json(hj, cfg);
    ensure_dir(out_dir);

    const DynamicsModel& model = *cfg.pi.model;
    const CostSpec& cost = *cfg.pi.cost;
    const IterationRecord& last = history.final();
    const Policy mu_next = improve_policy(cfg.pi.model, cost, last.value);
    const Policy mu_last = last.index == 0 ? *cfg.pi.mu0
                                           : improve_policy(cfg.pi.model, cost, history.iterations[last.index - 1].value);
    const SampleGrid grid = grid_sample(last.region, cfg.pi.spacing);

    std::vector<CheckReport> reports;
    reports.push_back(check_admissible(model, cost, mu_next, *last.region, cfg.plan.admissible_samples, cfg.verify));
    reports.push_back(invariance_check(cfg, last, mu_next));
    reports.push_back(check_lyapunov_decrease(model, cost, last.value, mu_next, grid, cfg.verify.tolerances));
    reports.push_back(check_monotone_values(history, grid, cfg.verify.tolerances));
    reports.push_back(check_monotone_radii(history));
    reports.push_back(check_value_against_cost(model, cost, last.value, mu_last,
                                               probe_states(*last.region, cfg.plan.value_probes, cfg.pi.boundary),
                                               cfg.verify));

    bool all = true;
    json checks = json::array();
    for (const auto& r : reports) {
      all = all && r.passed;
      checks.push_back(report_to_json(r));
      log << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.failures << "/" << r.tested
          << " failing, worst " << r.worst.measured << " vs " << r.worst.threshold;
      if (!r.passed) log << " at x = (" << r.worst.state.transpose() << ")" << (r.worst.note.empty() ? "" : ", " + r.worst.note);
      log << "\n";
    }
    const json doc{{"config_fingerprint", cfg.fingerprint}, {"passed", all}, {"checks", checks}};
    write_file(out_dir / "reports.json", doc.dump(2) + "\n");
    return all ? 0 : 2;
  } catch (const Error& e) {
    err << "error (" << e.kind() << "): " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

int cmd_demo(const std::string& name, const fs::path& work_dir, std::ostream& log, std::ostream& err) {
  const auto it = demos().find(name);
  if (it == demos().end()) {
    err << "unknown demo '" << name << "'; available:";
    for (const auto& [key, _] : demos()) err << " " << key;
    err << "\n";
    return 1;
  }
  try {
    ensure_dir(work_dir);
    const fs::path config = work_dir / it->second.file_name;
    write_file(config, it->second.config);
    const fs::path out = work_dir / (name + "-out");
    log << "demo " << name << ": config " << config.string() << ", outputs in " << out.string() << "\n";
    const int run = cmd_run(config, out, log, err);
    if (run != 0) return run;
    return cmd_verify(config, out / "history.json", out, log, err);
  } catch (const Error& e) {
    err << "error (" << e.kind() << "): " << e.what() << "\n";
    return 1;
  }
}

}  // namespace iapi::cli
