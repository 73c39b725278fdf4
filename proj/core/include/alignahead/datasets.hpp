#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "alignahead/graph.hpp"

ALIGNAHEAD_NAMESPACE_BEGIN

struct ContentCitesLoad {
  CsrGraph graph;
  std::size_t citation_rows = 0;      // non-blank rows in the cites file
  std::size_t dropped_unknown = 0;    // rows naming an id absent from the content file
  std::size_t dropped_self_loops = 0;
  std::vector<std::string> node_ids;  // dense id -> original id
  std::vector<std::string> class_names;
};

/// Cora / CiteSeer distribution files. Content rows are
/// `id f_1 ... f_F label`; cites rows are `cited citing`. Node ids are
/// remapped to [0, N) in file order and labels to class ids by first
/// appearance. The returned graph has no split assigned.
ContentCitesLoad load_content_cites(const std::filesystem::path& content,
                                    const std::filesystem::path& cites);

/// Bundle directory: edges.tsv, features.csv, labels.csv, splits.csv, meta.json.
CsrGraph load_bundle(const std::filesystem::path& dir);
void save_bundle(const CsrGraph& graph, const std::filesystem::path& dir);

/// Per-class training nodes, then validation and test nodes drawn from the
/// remainder. Deterministic in `seed`. Single-label graphs only.
CsrGraph planetoid_split(const CsrGraph& graph, std::size_t per_class_train,
                         std::size_t num_val, std::size_t num_test, std::uint64_t seed);

struct SbmParams {
  std::size_t blocks = 4;
  std::size_t nodes_per_block = 25;
  double p_in = 0.3;
  double p_out = 0.02;
  std::size_t feature_dim = 8;
  double noise = 0.5;
  std::uint64_t seed = 0;
};

/// Stochastic block model; label = block id, features = one-hot(block)
/// padded to feature_dim plus N(0, noise^2) noise. No split assigned.
CsrGraph generate_sbm(const SbmParams& params);

ALIGNAHEAD_NAMESPACE_END
