#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "alignahead/datasets.hpp"
#include "alignahead/student.hpp"
#include "alignahead/trainer.hpp"

ALIGNAHEAD_NAMESPACE_BEGIN

enum class Method { Baseline, Oc, Alignahead, AlignaheadPlusPlus };
const char* to_string(Method method);
Method parse_method(std::string_view name);

enum class DatasetKind { Sbm, ContentCites, Bundle };
const char* to_string(DatasetKind kind);

struct SplitConfig {
  std::size_t per_class = 20;
  std::size_t val = 500;
  std::size_t test = 1000;
  std::uint64_t seed = 0;
  friend bool operator==(const SplitConfig&, const SplitConfig&) = default;
};

struct DatasetConfig {
  DatasetKind kind = DatasetKind::Sbm;
  std::string content;  // content_cites
  std::string cites;    // content_cites
  std::string path;     // bundle directory
  SbmParams sbm;
  /// Planetoid-style split; required for sbm and content_cites, optional for
  /// bundles (which carry their own split).
  std::optional<SplitConfig> split;
};

struct RunConfig {
  DatasetConfig dataset;
  std::vector<ModelSpec> students;  // one per student
  Method method = Method::AlignaheadPlusPlus;
  TrainConfig train;
  AuxSpec aux;
  std::vector<std::uint64_t> seeds{0};
  std::string output = "runs/out";
  std::string precision = "f64";

  std::size_t num_students() const noexcept { return students.size(); }
  std::size_t depth() const { return students.at(0).layers; }
  /// Aux classifiers are attached only for alignahead++.
  bool uses_aux() const noexcept { return method == Method::AlignaheadPlusPlus; }
};

/// Parses a JSON run config; unknown keys and out-of-range values throw
/// ConfigError. The result is normalized (see normalize_run_config).
RunConfig parse_run_config(std::string_view json_text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Applies the method's forced settings: baseline keeps one student and
/// zeroes alpha and beta; oc and alignahead zero beta (structure loss only)
/// with one-to-one and alignahead matching respectively. Validates it all.
RunConfig normalize_run_config(RunConfig cfg);

/// Complete JSON echo; parse_run_config(run_config_to_json(c)) == c.
std::string run_config_to_json(const RunConfig& cfg, int indent = 2);

bool operator==(const RunConfig& a, const RunConfig& b);

ALIGNAHEAD_NAMESPACE_END
