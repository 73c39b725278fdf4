#include "alignahead/harness.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "alignahead/checkpoint.hpp"
#include "alignahead/errors.hpp"
#include "alignahead/flow.hpp"

ALIGNAHEAD_NAMESPACE_BEGIN

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string format(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void finish_summary(RunSummary& s) {
  const std::size_t n = s.runs.size();
  if (n == 0) return;
  double sum = 0, smooth = 0;
  for (const auto& r : s.runs) {
    sum += r.result.headline;
    smooth += r.result.students[r.result.best_student].smoothness_at_best;
  }
  s.mean = sum / static_cast<double>(n);
  s.mean_smoothness = smooth / static_cast<double>(n);
  double ss = 0;
  for (const auto& r : s.runs) ss += (r.result.headline - s.mean) * (r.result.headline - s.mean);
  s.std = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DatasetError("cannot write " + path.string());
  out << text;
}

}  // namespace

CsrGraph load_dataset(const DatasetConfig& cfg) {
  CsrGraph graph;
  switch (cfg.kind) {
    case DatasetKind::Sbm: graph = generate_sbm(cfg.sbm); break;
    case DatasetKind::ContentCites: graph = load_content_cites(cfg.content, cfg.cites).graph; break;
    case DatasetKind::Bundle: graph = load_bundle(cfg.path); break;
  }
  if (cfg.split) {
    graph = planetoid_split(graph, cfg.split->per_class, cfg.split->val, cfg.split->test,
                            cfg.split->seed);
  }
  graph.require_trainable();
  return graph;
}

std::vector<StudentModel> build_students(const RunConfig& cfg, const CsrGraph& graph,
                                         std::uint64_t seed) {
  std::vector<StudentModel> out;
  const std::optional<AuxSpec> aux = cfg.uses_aux() ? std::optional<AuxSpec>(cfg.aux) : std::nullopt;
  for (std::size_t k = 0; k < cfg.num_students(); ++k) {
    const auto specs = backbone_specs(cfg.students[k], graph.num_features(), graph.num_classes());
    out.push_back(build_student(specs, aux, student_seed(seed, k)));
  }
  return out;
}

RunSummary execute_run(const RunConfig& cfg, const CsrGraph& graph,
                       const std::optional<fs::path>& out_dir, std::ostream* progress) {
  RunSummary summary;
  for (std::uint64_t seed : cfg.seeds) {
    TrainConfig train = cfg.train;
    train.seed = seed;
    Trainer trainer(build_students(cfg, graph, seed), graph, train);
    SeedOutcome outcome{seed, trainer.run()};
    if (out_dir) {
      const fs::path dir = *out_dir / ("seed_" + std::to_string(seed));
      fs::create_directories(dir);
      outcome.result.log.write_csv(dir / "metrics.csv");
      for (std::size_t k = 0; k < trainer.students().size(); ++k) {
        save_checkpoint(trainer.students()[k], dir / ("checkpoint.student" + std::to_string(k + 1) + ".bin"));
      }
    }
    if (progress) {
      *progress << to_string(cfg.method) << " seed " << seed << ": " << format(outcome.result.headline)
                << " (student " << outcome.result.best_student + 1 << ", epoch "
                << outcome.result.students[outcome.result.best_student].best_epoch << ")\n";
    }
    summary.runs.push_back(std::move(outcome));
  }
  finish_summary(summary);
  if (out_dir) {
    fs::create_directories(*out_dir);
    write_text(*out_dir / "summary.json", summary_to_json(cfg, graph, summary) + "\n");
  }
  return summary;
}

std::string summary_to_json(const RunConfig& cfg, const CsrGraph& graph, const RunSummary& summary) {
  json j;
  j["config"] = json::parse(run_config_to_json(cfg));
  j["precision"] = kPrecisionName;
  j["metric"] = graph.task() == TaskKind::MultiLabel ? "micro_f1" : "accuracy";
  j["dataset"] = {{"nodes", graph.num_nodes()},
                  {"undirected_edges", graph.num_undirected_edges()},
                  {"features", graph.num_features()},
                  {"classes", graph.num_classes()},
                  {"train", graph.nodes_in(NodeSplit::Train).size()},
                  {"val", graph.nodes_in(NodeSplit::Val).size()},
                  {"test", graph.nodes_in(NodeSplit::Test).size()}};
  json students = json::array();
  for (const auto& m : cfg.students) {
    const auto specs = backbone_specs(m, graph.num_features(), graph.num_classes());
    json widths = json::array();
    for (const auto& s : specs) widths.push_back(s.output_dim());
    students.push_back({{"kind", to_string(m.kind)}, {"layers", m.layers}, {"layer_widths", widths}});
  }
  j["students"] = students;
  json runs = json::array();
  for (const auto& r : summary.runs) {
    json per = json::array();
    for (const auto& s : r.result.students) {
      per.push_back({{"best_val", s.best_val},
                     {"test_at_best", s.test_at_best},
                     {"best_epoch", s.best_epoch},
                     {"smoothness_at_best", s.smoothness_at_best},
                     {"final_test", s.final_test},
                     {"final_smoothness", s.final_smoothness}});
    }
    runs.push_back({{"seed", r.seed},
                    {"headline", r.result.headline},
                    {"best_student", r.result.best_student + 1},
                    {"students", per}});
  }
  j["runs"] = runs;
  j["mean"] = summary.mean;
  j["std"] = summary.std;
  j["mean_smoothness"] = summary.mean_smoothness;
  return j.dump(2);
}

SweepAxis parse_sweep_axis(std::string_view name) {
  for (SweepAxis a : {SweepAxis::Depth, SweepAxis::Beta, SweepAxis::Lambda, SweepAxis::Students,
                      SweepAxis::BetaLambda}) {
    if (name == to_string(a)) return a;
  }
  throw ConfigError("unknown sweep axis '" + std::string(name) +
                    "' (expected depth, beta, lambda, students or beta_lambda)");
}

const char* to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::Depth: return "depth";
    case SweepAxis::Beta: return "beta";
    case SweepAxis::Lambda: return "lambda";
    case SweepAxis::Students: return "students";
    case SweepAxis::BetaLambda: return "beta_lambda";
  }
  return "?";
}

namespace {

double parse_number(std::string_view text) {
  double v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("sweep value '" + std::string(text) + "' is not a number");
  }
  return v;
}

std::size_t parse_count(std::string_view text) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || v == 0) {
    throw ConfigError("sweep value '" + std::string(text) + "' is not a positive integer");
  }
  return v;
}

}  // namespace

RunConfig apply_sweep_value(RunConfig cfg, SweepAxis axis, std::string_view value) {
  switch (axis) {
    case SweepAxis::Depth: {
      const std::size_t h = parse_count(value);
      for (auto& s : cfg.students) s.layers = h;
      break;
    }
    case SweepAxis::Beta: cfg.train.distill.beta = static_cast<Real>(parse_number(value)); break;
    case SweepAxis::Lambda: cfg.train.distill.lambda = static_cast<Real>(parse_number(value)); break;
    case SweepAxis::Students: {
      const std::size_t m = parse_count(value);
      const ModelSpec first = cfg.students.at(0);
      cfg.students.assign(m, first);
      break;
    }
    case SweepAxis::BetaLambda:
      throw ConfigError("beta_lambda values are applied as (beta, lambda) pairs");
  }
  return normalize_run_config(std::move(cfg));
}

std::vector<SweepRow> execute_sweep(const RunConfig& cfg, SweepAxis axis,
                                    const std::vector<std::string>& values,
                                    const std::optional<fs::path>& out_dir, std::ostream* progress) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  std::vector<std::vector<std::string>> points;
  if (axis == SweepAxis::BetaLambda) {
    for (const auto& b : values) {
      for (const auto& l : values) points.push_back({b, l});
    }
  } else {
    for (const auto& v : values) points.push_back({v});
  }
  // Validate every point before spending time on training.
  std::vector<RunConfig> configs;
  for (const auto& p : points) {
    if (axis == SweepAxis::BetaLambda) {
      RunConfig c = apply_sweep_value(cfg, SweepAxis::Beta, p[0]);
      configs.push_back(apply_sweep_value(c, SweepAxis::Lambda, p[1]));
    } else {
      configs.push_back(apply_sweep_value(cfg, axis, p[0]));
    }
  }
  const CsrGraph graph = load_dataset(cfg.dataset);
  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::string name = std::string(to_string(axis)) + "_" + points[i][0];
    if (points[i].size() > 1) name += "_" + points[i][1];
    std::optional<fs::path> dir;
    if (out_dir) dir = *out_dir / name;
    if (progress) *progress << "[" << name << "]\n";
    rows.push_back(SweepRow{points[i], execute_run(configs[i], graph, dir, progress)});
  }
  if (out_dir) {
    std::string csv = axis == SweepAxis::BetaLambda ? "beta,lambda" : "value";
    csv += ",mean,std,num_runs,mean_smoothness\n";
    for (const auto& r : rows) {
      for (const auto& v : r.values) csv += v + ",";
      csv += format(r.summary.mean) + "," + format(r.summary.std) + "," +
             std::to_string(r.summary.runs.size()) + "," + format(r.summary.mean_smoothness) + "\n";
    }
    fs::create_directories(*out_dir);
    write_text(*out_dir / "sweep.csv", csv);
  }
  return rows;
}

int run_command(const CommandLine& cmd) {
  try {
    if (cmd.command == "trace") {
      const auto history =
          trace_information_flow(cmd.depth, cmd.students, parse_matching(cmd.matching), cmd.iters);
      std::cout << render_flow_table(history);
      return kExitOk;
    }
    RunConfig cfg = load_run_config(cmd.config);
    if (cmd.out) cfg.output = *cmd.out;
    if (!cmd.seeds.empty()) cfg.seeds = cmd.seeds;
    cfg.precision = kPrecisionName;
    cfg = normalize_run_config(std::move(cfg));
    std::ostream* progress = cmd.quiet ? nullptr : &std::cerr;
    if (cmd.command == "run") {
      const CsrGraph graph = load_dataset(cfg.dataset);
      const RunSummary s = execute_run(cfg, graph, fs::path(cfg.output), progress);
      std::cout << "mean " << format(s.mean) << " std " << format(s.std) << " over "
                << s.runs.size() << " seed(s); wrote " << cfg.output << "\n";
      return kExitOk;
    }
    if (cmd.command == "sweep") {
      const auto rows = execute_sweep(cfg, parse_sweep_axis(cmd.axis), cmd.values,
                                      fs::path(cfg.output), progress);
      for (const auto& r : rows) {
        for (const auto& v : r.values) std::cout << v << " ";
        std::cout << "mean " << format(r.summary.mean) << " std " << format(r.summary.std) << "\n";
      }
      return kExitOk;
    }
    std::cerr << "unknown command '" << cmd.command << "'\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return kExitConfig;
  } catch (const TrainingDiverged& e) {
    std::cerr << "training diverged: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

ALIGNAHEAD_NAMESPACE_END
