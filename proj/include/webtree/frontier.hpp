#pragma once

// Frontier of unexecuted candidate actions: class-aware selection and
// budget pruning.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "webtree/actions.hpp"
#include "webtree/tree.hpp"

namespace webtree {

struct FrontierEntry {
  NodeId origin = 0;
  WebAction action;
  double reward = 0.0;
  ActionClass cls = ActionClass::safe;
  std::uint64_t seq = 0;

  friend bool operator==(const FrontierEntry&, const FrontierEntry&) = default;
};

/// Higher reward first; equal rewards in insertion order.
bool ranks_before(const FrontierEntry& a, const FrontierEntry& b);
void sort_frontier(std::vector<FrontierEntry>& frontier);

struct SelectionParams {
  int terminating_count = 0;
  int destruction_count = 0;
  std::size_t budget = 4;
  int k_t = 2;
  int k_d = 1;
};

/// Removes and returns the entry to execute next. Entries popped and
/// deferred along the way are put back. The frontier stays sorted.
std::optional<FrontierEntry> select_action(std::vector<FrontierEntry>& frontier, const SelectionParams& p);

/// Drops entries whose origin cannot be reached again, then, if still over
/// budget, keeps only the best terminating and the best destructive entry
/// and removes the lowest-ranked entries until the budget holds.
void prune_queue(std::vector<FrontierEntry>& frontier, std::size_t budget,
                 const std::function<bool(NodeId)>& reachable);

}  // namespace webtree
