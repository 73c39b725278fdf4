#pragma once

// Precision-neutral entry point shared by both builds of the core, so one
// executable can link the f64 and f32 libraries side by side.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace alignahead {

struct CommandLine {
  std::string command;  // run | sweep | trace
  std::string config;
  std::optional<std::string> out;
  std::vector<std::uint64_t> seeds;
  std::string axis;
  std::vector<std::string> values;
  std::size_t depth = 3;
  std::size_t students = 2;
  std::string matching = "alignahead";
  std::size_t iters = 6;
  bool quiet = false;
};

/// Exit codes: 0 success, 1 other failure, 2 invalid configuration,
/// 3 training diverged.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDiverged = 3;

inline namespace f64 {
int run_command(const CommandLine& cmd);
}
inline namespace f32 {
int run_command(const CommandLine& cmd);
}

}  // namespace alignahead
