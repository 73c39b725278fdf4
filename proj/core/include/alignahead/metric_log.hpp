#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "alignahead/graph.hpp"

ALIGNAHEAD_NAMESPACE_BEGIN

struct MetricRow {
  std::size_t epoch = 0;
  std::size_t student = 0;  // 0-based
  NodeSplit split = NodeSplit::Train;
  double loss_ce = 0;
  double loss_ds = 0;
  double loss_fea = 0;
  double loss_str = 0;
  double loss_total = 0;
  double metric = 0;
  double smoothness = 0;

  friend bool operator==(const MetricRow&, const MetricRow&) = default;
};

/// Rows in (epoch, student) order, one per evaluated split.
class MetricLog {
 public:
  static constexpr const char* kCsvHeader =
      "epoch,student,split,loss_ce,loss_ds,loss_fea,loss_str,loss_total,metric,smoothness";

  /// Throws std::invalid_argument when the row would break (epoch, student) order.
  void add(const MetricRow& row);
  const std::vector<MetricRow>& rows() const noexcept { return rows_; }
  std::size_t size() const noexcept { return rows_.size(); }

  /// Values printed with round-trip precision; students 1-based.
  void write_csv(std::ostream& out) const;
  void write_csv(const std::filesystem::path& path) const;

  friend bool operator==(const MetricLog&, const MetricLog&) = default;

 private:
  std::vector<MetricRow> rows_;
};

ALIGNAHEAD_NAMESPACE_END
