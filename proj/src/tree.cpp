#include "webtree/tree.hpp"

#include <algorithm>

#include "webtree/digest.hpp"

namespace webtree {

namespace {

void snapshot(SearchNode& n, const Environment& env) {
  n.observation = env.observation();
  n.url = env.url();
  n.tabs = env.tab_states();
  n.active_tab = env.active_tab();
  n.page_long = env.page_long();
  n.digest = digest_text(serialize_axtree(n.observation));
}

}  // namespace

NodeId SearchTree::add_root(const Environment& env) {
  SearchNode n;
  n.id = nodes_.size();
  snapshot(n, env);
  nodes_.push_back(std::move(n));
  root_ = nodes_.back().id;
  return root_;
}

NodeId SearchTree::add_child(NodeId parent, const WebAction& action, const Environment& env, std::string thought) {
  SearchNode n;
  n.id = nodes_.size();
  snapshot(n, env);
  const SearchNode& p = nodes_.at(parent);
  n.parent = parent;
  n.incoming = action;
  n.depth = p.depth + 1;
  n.trajectory = p.trajectory;
  n.trajectory.push_back(action);
  n.history = p.history;
  n.history.push_back({summarize_observation(p.observation, p.url), std::move(thought), action.to_string()});
  nodes_.push_back(std::move(n));
  return nodes_.back().id;
}

std::optional<NodeId> SearchTree::tree_parent(NodeId id) const {
  if (id == root_) return std::nullopt;
  return nodes_.at(id).parent;
}

std::optional<NodeId> SearchTree::checkpoint_ancestor(NodeId id) const {
  std::optional<NodeId> cur = id;
  while (cur) {
    const SearchNode& n = nodes_.at(*cur);
    if (!n.valid) return std::nullopt;
    if (n.checkpoint) return cur;
    cur = tree_parent(*cur);
  }
  return std::nullopt;
}

std::vector<WebAction> SearchTree::path_actions(NodeId id) const {
  std::vector<WebAction> out;
  for (std::optional<NodeId> cur = id; cur && *cur != root_; cur = tree_parent(*cur)) {
    out.push_back(*nodes_.at(*cur).incoming);
  }
  std::reverse(out.begin(), out.end());
  return out;
}

void SearchTree::reroot(NodeId id) {
  for (auto& n : nodes_) {
    if (n.id != id) n.valid = false;
  }
  root_ = id;
  nodes_.at(id).depth = 0;
}

}  // namespace webtree
