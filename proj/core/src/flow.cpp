#include "alignahead/flow.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "alignahead/errors.hpp"

ALIGNAHEAD_NAMESPACE_BEGIN

std::string to_string(const FlowToken& token) {
  return "l_" + std::to_string(token.layer + 1) + "^" + std::to_string(token.student + 1);
}

std::size_t FlowHistory::iterations() const {
  return stages.empty() || students == 0 ? 0 : (stages.size() - 1) / students;
}

const FlowState& FlowHistory::after_iteration(std::size_t t) const {
  if (t > iterations()) throw std::out_of_range("after_iteration: beyond traced iterations");
  return stages.at(t * students).state;
}

FlowHistory trace_information_flow(std::size_t depth, std::size_t students, Matching matching,
                                   std::size_t iterations) {
  if (depth == 0) throw ConfigError("flow trace needs depth >= 1");
  if (students == 0) throw ConfigError("flow trace needs at least one student");
  FlowHistory h;
  h.depth = depth;
  h.students = students;
  h.matching = matching;
  FlowState state(students, std::vector<FlowToken>(depth));
  for (std::size_t s = 0; s < students; ++s) {
    for (std::size_t i = 0; i < depth; ++i) state[s][i] = FlowToken{s, i};
  }
  h.stages.push_back(FlowStage{0, std::nullopt, state});
  for (std::size_t t = 1; t <= iterations; ++t) {
    const FlowState start = state;
    for (std::size_t s = 0; s < students; ++s) {
      const std::size_t peer = (s + 1) % students;
      for (std::size_t i = 0; i < depth; ++i) {
        state[s][i] = start[peer][align_target_index(i, depth, matching)];
      }
      h.stages.push_back(FlowStage{t, s, state});
    }
  }
  return h;
}

std::vector<FlowToken> tokens_seen(const FlowHistory& history, std::size_t student,
                                   std::size_t layer) {
  std::set<FlowToken> seen;
  for (const auto& stage : history.stages) seen.insert(stage.state.at(student).at(layer));
  return {seen.begin(), seen.end()};
}

std::string render_flow_table(const FlowHistory& history) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> iter_row{"Iteration", ""};
  std::vector<std::string> stage_row{"Stage", ""};
  for (const auto& stage : history.stages) {
    iter_row.push_back(std::to_string(stage.iteration));
    stage_row.push_back(stage.trained_student ? "S" + std::to_string(*stage.trained_student + 1)
                                              : "Initial");
  }
  rows.push_back(iter_row);
  rows.push_back(stage_row);
  for (std::size_t s = 0; s < history.students; ++s) {
    for (std::size_t i = 0; i < history.depth; ++i) {
      std::vector<std::string> row{i == 0 ? "Student-" + std::to_string(s + 1) : "",
                                   "Layer-" + std::to_string(i + 1)};
      for (const auto& stage : history.stages) row.push_back(to_string(stage.state[s][i]));
      rows.push_back(std::move(row));
    }
  }
  std::vector<std::size_t> width(rows.front().size(), 0);
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  }
  std::ostringstream out;
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t c = 0; c < r.size(); ++c) {
      line += r[c];
      if (c + 1 < r.size()) line += std::string(width[c] - r[c].size() + 2, ' ');
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << '\n';
  }
  return out.str();
}

ALIGNAHEAD_NAMESPACE_END
