#pragma once

// Shared reporting and fixtures for the acceptance binaries.

#include <cstdint>
#include <string>
#include <vector>

#include "alignahead/harness.hpp"

namespace acceptance {

using namespace alignahead;

/// Collects one PASS/FAIL line per criterion.
class Report {
 public:
  void note(const std::string& text);
  void criterion(const std::string& id, const std::string& title, bool pass, const std::string& detail);
  int exit_code() const { return failures_ == 0 ? 0 : 1; }
  int failures() const { return failures_; }

 private:
  int failures_ = 0;
};

std::string fmt(double v, int digits = 4);

/// Run config around a dataset JSON object and extra top-level keys.
RunConfig make_config(const std::string& dataset_json, const std::string& extra_json);

}  // namespace acceptance
