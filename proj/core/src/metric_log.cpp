#include "alignahead/metric_log.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>

#include "alignahead/errors.hpp"

ALIGNAHEAD_NAMESPACE_BEGIN

namespace {

std::string format(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

void MetricLog::add(const MetricRow& row) {
  if (!rows_.empty()) {
    const MetricRow& last = rows_.back();
    if (row.epoch < last.epoch || (row.epoch == last.epoch && row.student < last.student)) {
      throw std::invalid_argument("MetricLog rows must be added in (epoch, student) order");
    }
    if (row.epoch == last.epoch && row.student == last.student && row.split <= last.split) {
      throw std::invalid_argument("MetricLog already has a row for split " +
                                  std::string(to_string(row.split)) + " at this epoch and student");
    }
  }
  rows_.push_back(row);
}

void MetricLog::write_csv(std::ostream& out) const {
  out << kCsvHeader << '\n';
  for (const auto& r : rows_) {
    out << r.epoch << ',' << r.student + 1 << ',' << to_string(r.split) << ',' << format(r.loss_ce)
        << ',' << format(r.loss_ds) << ',' << format(r.loss_fea) << ',' << format(r.loss_str) << ','
        << format(r.loss_total) << ',' << format(r.metric) << ',' << format(r.smoothness) << '\n';
  }
}

void MetricLog::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DatasetError("cannot write " + path.string());
  write_csv(out);
}

ALIGNAHEAD_NAMESPACE_END
