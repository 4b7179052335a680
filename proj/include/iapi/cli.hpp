#pragma once

#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "iapi/config.hpp"
#include "iapi/history.hpp"

namespace iapi::cli {

struct Demo {
  std::string file_name;
  std::string config;
};

/// Bundled demo configs by name ("paper-example", "lqr-scalar").
const std::map<std::string, Demo>& demos();

/// Runs policy iteration and writes history.json, weights.csv and region
/// polylines to `out_dir`. Returns 0 on convergence, 2 when max_iterations
/// was reached, 1 on error.
int cmd_run(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
            std::ostream& log, std::ostream& err);

/// Re-checks a recorded run and writes reports.json. Returns 0 iff every
/// check passes, 2 if any fails, 1 on error.
int cmd_verify(const std::filesystem::path& config_path, const std::filesystem::path& history_path,
               const std::filesystem::path& out_dir, std::ostream& log, std::ostream& err);

/// Writes the named demo config into `work_dir`, then runs and verifies it
/// with outputs in `work_dir/<name>-out`.
int cmd_demo(const std::string& name, const std::filesystem::path& work_dir, std::ostream& log,
             std::ostream& err);

/// Probe states inside `region`, spread over directions and radii.
std::vector<StateVector> probe_states(const Region& region, std::size_t count,
                                      const BoundarySettings& settings = {});

/// Region used for the invariance check: the final region when it is a
/// sublevel set, otherwise the smallest sublevel set of `v` enclosing it.
std::shared_ptr<const Region> invariance_region(const Region& final_region, const ValueFunctionEstimate& v,
                                                const BoundarySettings& settings = {});

}  // namespace iapi::cli
