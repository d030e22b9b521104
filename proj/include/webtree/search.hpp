#pragma once

// Best-first search over web states: expansion, class-aware selection,
// backtracking to other branches, and re-rooting after destructive steps.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "webtree/backtrack.hpp"
#include "webtree/frontier.hpp"
#include "webtree/generator.hpp"
#include "webtree/mockweb.hpp"
#include "webtree/reward.hpp"
#include "webtree/trace.hpp"
#include "webtree/tree.hpp"

namespace webtree {

enum class BacktrackMode { speculative, disabled, naive };

struct SearchConfig {
  int step_budget = 20;
  std::size_t frontier_budget = 4;
  int branching = 3;
  int max_depth = 5;
  int k_t = 2;
  int k_d = 1;
  std::size_t min_queue = 2;
  int max_retry = 5;
  std::uint64_t seed = 0;
  BacktrackMode backtrack = BacktrackMode::speculative;
  /// Store full AX text next to digests in execute events.
  bool trace_full = false;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

void validate_config(const SearchConfig& config);

enum class FailureReason { none, budget_exhausted, frontier_empty, wrong_answer };

std::string_view failure_reason_name(FailureReason r);

struct SearchResult {
  bool success = false;
  std::vector<WebAction> trajectory;
  std::optional<std::string> answer;
  int steps = 0;
  int backtracks_attempted = 0;
  int backtracks_committed = 0;
  int backtracks_aborted = 0;
  int destructive_executions = 0;
  int terminating_count = 0;
  /// Executed actions the pre-execution heuristic flagged, and how many of
  /// those issued a mutating request.
  int preflagged_executed = 0;
  int preflagged_confirmed = 0;
  FailureReason failure = FailureReason::none;
};

class TreeSearch {
 public:
  TreeSearch(Environment& env, SearchConfig config, GenProvider& policy, const RewardProvider& reward,
             Trace* trace = nullptr);

  SearchResult run();

  /// Generates, scores, classifies and merges candidates for `id` and pushes
  /// them onto the frontier. Returns the pushed entries.
  std::vector<FrontierEntry> expand(NodeId id);
  /// Probes the live node's url in a fork; sets and returns the flag.
  bool mark_checkpoint(NodeId id);
  void handle_destructive(NodeId id);

  const SearchTree& tree() const noexcept { return tree_; }
  const std::vector<FrontierEntry>& frontier() const noexcept { return frontier_; }
  std::size_t budget() const noexcept { return budget_; }
  int destruction_count() const noexcept { return destruction_count_; }
  int terminating_count() const noexcept { return terminating_count_; }
  NodeId current() const noexcept { return current_; }

 private:
  bool reachable(NodeId id) const;
  void emit(std::string_view kind, const TraceJson& payload);
  void finish(SearchResult& result);

  Environment& env_;
  SearchConfig config_;
  GenProvider& policy_;
  const RewardProvider& reward_;
  Trace* trace_;

  SearchTree tree_;
  std::vector<FrontierEntry> frontier_;
  NodeId current_ = 0;
  std::size_t budget_;
  int terminating_count_ = 0;
  int destruction_count_ = 0;
  std::uint64_t next_seq_ = 0;
  bool started_ = false;
};

SearchResult run_search(Environment& env, const SearchConfig& config, GenProvider& policy,
                        const RewardProvider& reward, Trace* trace = nullptr);

}  // namespace webtree
