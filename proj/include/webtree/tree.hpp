#pragma once

// Search tree over visited states. Nodes are never removed; re-rooting only
// flips validity flags and re-bases depth.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "webtree/actions.hpp"
#include "webtree/axtree.hpp"
#include "webtree/generator.hpp"
#include "webtree/mockweb.hpp"

namespace webtree {

using NodeId = std::size_t;

struct SearchNode {
  NodeId id = 0;
  AXTree observation;
  std::string url;
  std::vector<TabState> tabs;
  std::size_t active_tab = 0;
  bool page_long = false;
  std::optional<NodeId> parent;
  std::optional<WebAction> incoming;
  int depth = 0;
  bool checkpoint = false;
  bool valid = true;
  bool expanded = false;
  std::string digest;
  /// Every action executed on the main environment to get here.
  std::vector<WebAction> trajectory;
  std::vector<HistoryStep> history;
};

class SearchTree {
 public:
  /// Snapshot of the environment's current state.
  NodeId add_root(const Environment& env);
  NodeId add_child(NodeId parent, const WebAction& action, const Environment& env, std::string thought = {});

  const SearchNode& node(NodeId id) const { return nodes_.at(id); }
  SearchNode& node(NodeId id) { return nodes_.at(id); }
  std::size_t size() const noexcept { return nodes_.size(); }
  NodeId root() const noexcept { return root_; }

  /// Parent within the current rooted tree; the root has none.
  std::optional<NodeId> tree_parent(NodeId id) const;
  /// Nearest checkpoint among id and its tree ancestors.
  std::optional<NodeId> checkpoint_ancestor(NodeId id) const;
  /// Edge actions from the root down to id.
  std::vector<WebAction> path_actions(NodeId id) const;

  /// Makes `id` the root at depth 0 and invalidates every other node.
  void reroot(NodeId id);

 private:
  std::vector<SearchNode> nodes_;
  NodeId root_ = 0;
};

}  // namespace webtree
