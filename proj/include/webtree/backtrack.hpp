#pragma once

// Returning the live environment to an earlier tree node: jump to the
// nearest checkpoint in fork tabs, replay the stored edge actions while
// checking each stored snapshot, then commit or abort the fork.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "webtree/actions.hpp"
#include "webtree/mockweb.hpp"
#include "webtree/tree.hpp"

namespace webtree {

struct BacktrackPlan {
  NodeId rollback = 0;
  NodeId target = 0;
  /// rollback, ..., target
  std::vector<NodeId> nodes;
  /// Edge actions between consecutive entries of `nodes`.
  std::vector<WebAction> replay;
};

std::optional<BacktrackPlan> find_path(const SearchTree& tree, NodeId target);

/// tab_focus(i) becomes tab_focus(i + offset); other actions are unchanged.
WebAction remap_tab_action(const WebAction& action, std::size_t offset);

struct BacktrackResult {
  bool committed = false;
  std::optional<NodeId> rollback;
  std::size_t replay_length = 0;
  /// Index into the plan's nodes where validation or replay failed.
  std::optional<std::size_t> mismatch_step;
  std::string reason;
  /// Tab states restored into the fork, for trace replay.
  std::vector<TabState> fork_tabs;
  std::size_t fork_active = 0;
};

/// `pending_bid` anchors the comparison at the target node; without it the
/// whole tree is compared.
BacktrackResult backtrack(Environment& env, const SearchTree& tree, NodeId target,
                          std::optional<std::string_view> pending_bid);

/// Reference strategy: restore the root's tabs and replay the whole path
/// from the root with no snapshot checks.
BacktrackResult naive_backtrack(Environment& env, const SearchTree& tree, NodeId target);

/// Pivot used when checking a snapshot before `next` runs.
std::optional<std::string_view> pivot_for(const WebAction& next);

}  // namespace webtree
