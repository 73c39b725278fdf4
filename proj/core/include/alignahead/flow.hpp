#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "alignahead/losses.hpp"

ALIGNAHEAD_NAMESPACE_BEGIN

/// Symbolic marker for "structure information of layer `layer` of student
/// `student`" (both 0-based).
struct FlowToken {
  std::size_t student = 0;
  std::size_t layer = 0;
  friend bool operator==(const FlowToken&, const FlowToken&) = default;
  auto operator<=>(const FlowToken&) const = default;
};

/// Rendered as l_<layer>^<student>, 1-based.
std::string to_string(const FlowToken& token);

/// slots[s][i]: token currently held by layer i of student s.
using FlowState = std::vector<std::vector<FlowToken>>;

struct FlowStage {
  std::size_t iteration = 0;                     // 0 for the initial state
  std::optional<std::size_t> trained_student;  // empty for the initial state
  FlowState state;
};

struct FlowHistory {
  std::size_t depth = 0;
  std::size_t students = 0;
  Matching matching = Matching::Alignahead;
  /// Initial state, then one stage per half-iteration (M per iteration).
  std::vector<FlowStage> stages;

  std::size_t iterations() const;
  /// State at the end of iteration t (t = 0 is the initial state).
  const FlowState& after_iteration(std::size_t t) const;
};

/// Within an iteration every student s, in index order, replaces slot (s, i)
/// with the token that peer (s + 1) mod M held in slot target(i) at the
/// start of the iteration.
FlowHistory trace_information_flow(std::size_t depth, std::size_t students, Matching matching,
                                   std::size_t iterations);

/// Distinct tokens slot (s, i) held over all stages of `history`.
std::vector<FlowToken> tokens_seen(const FlowHistory& history, std::size_t student,
                                   std::size_t layer);

/// Fixed-width grid: one column per stage, one row per (student, layer).
std::string render_flow_table(const FlowHistory& history);

ALIGNAHEAD_NAMESPACE_END
