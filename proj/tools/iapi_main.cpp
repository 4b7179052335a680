#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "iapi/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Invariantly admissible policy iteration for input-affine optimal control"};
  app.require_subcommand(1);

  std::string config, history, out = "out", demo_name, work_dir = ".";

  auto* run = app.add_subcommand("run", "Run policy iteration on a config");
  run->add_option("config", config, "Problem config (JSON)")->required();
  run->add_option("--out", out, "Output directory");

  auto* verify = app.add_subcommand("verify", "Verify a recorded run");
  verify->add_option("config", config, "Problem config (JSON)")->required();
  verify->add_option("history", history, "history.json from `run`")->required();
  verify->add_option("--out", out, "Output directory");

  auto* demo = app.add_subcommand("demo", "Write a bundled config, then run and verify it");
  demo->add_option("name", demo_name, "paper-example | lqr-scalar")->required();
  demo->add_option("--dir", work_dir, "Working directory");

  CLI11_PARSE(app, argc, argv);

  if (*run) return iapi::cli::cmd_run(config, out, std::cout, std::cerr);
  if (*verify) return iapi::cli::cmd_verify(config, history, out, std::cout, std::cerr);
  return iapi::cli::cmd_demo(demo_name, work_dir, std::cout, std::cerr);
}
