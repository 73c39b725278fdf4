#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "alignahead/entry.hpp"

namespace {

// The config may name a precision; the command line wins.
std::string config_precision(const std::string& path) {
  std::ifstream in(path);
  if (!in) return "f64";
  const auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_object() && j.contains("precision") && j["precision"].is_string()) {
    return j["precision"].get<std::string>();
  }
  return "f64";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online distillation for graph neural networks"};
  app.require_subcommand(1);

  alignahead::CommandLine cmd;
  std::string out;
  std::string precision;
  app.add_option("--out", out, "Output directory (overrides the config)");
  app.add_option("--seeds", cmd.seeds, "Seeds (overrides the config)")->delimiter(',');
  app.add_option("--precision", precision, "Floating-point precision")
      ->check(CLI::IsMember({"f32", "f64"}));
  app.add_flag("--quiet", cmd.quiet, "No per-seed progress on stderr");

  auto* run = app.add_subcommand("run", "Train students for every seed of a config");
  run->add_option("--config", cmd.config, "Run config (JSON)")->required()->check(CLI::ExistingFile);

  auto* sweep = app.add_subcommand("sweep", "Repeat a run over values of one axis");
  sweep->add_option("--config", cmd.config, "Run config (JSON)")->required()->check(CLI::ExistingFile);
  sweep->add_option("--axis", cmd.axis, "depth, beta, lambda, students or beta_lambda")
      ->required()
      ->check(CLI::IsMember({"depth", "beta", "lambda", "students", "beta_lambda"}));
  sweep->add_option("--values", cmd.values, "Comma-separated values")->required()->delimiter(',');

  auto* trace = app.add_subcommand("trace", "Print the layer information-flow table");
  trace->add_option("--depth", cmd.depth, "Layers per student")->check(CLI::PositiveNumber);
  trace->add_option("--students", cmd.students, "Number of students")->check(CLI::PositiveNumber);
  trace->add_option("--matching", cmd.matching, "alignahead or one-to-one")
      ->check(CLI::IsMember({"alignahead", "one-to-one"}));
  trace->add_option("--iters", cmd.iters, "Iterations");

  // Options may appear before or after the subcommand.
  for (auto* sub : {run, sweep, trace}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : alignahead::kExitConfig;
  }

  cmd.command = app.get_subcommands().front()->get_name();
  if (!out.empty()) cmd.out = out;
  if (precision.empty()) precision = cmd.config.empty() ? "f64" : config_precision(cmd.config);
  if (precision == "f32") return alignahead::f32::run_command(cmd);
  if (precision != "f64") {
    std::cerr << "invalid configuration: precision must be f32 or f64\n";
    return alignahead::kExitConfig;
  }
  return alignahead::f64::run_command(cmd);
}
