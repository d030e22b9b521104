#include "webtree/backtrack.hpp"

#include <algorithm>

namespace webtree {

std::optional<BacktrackPlan> find_path(const SearchTree& tree, NodeId target) {
  if (!tree.node(target).valid) return std::nullopt;
  std::optional<NodeId> rollback = tree.checkpoint_ancestor(target);
  if (!rollback) return std::nullopt;
  BacktrackPlan plan;
  plan.rollback = *rollback;
  plan.target = target;
  for (NodeId cur = target; cur != *rollback; cur = *tree.tree_parent(cur)) {
    plan.nodes.push_back(cur);
    plan.replay.push_back(*tree.node(cur).incoming);
  }
  plan.nodes.push_back(*rollback);
  std::reverse(plan.nodes.begin(), plan.nodes.end());
  std::reverse(plan.replay.begin(), plan.replay.end());
  return plan;
}

WebAction remap_tab_action(const WebAction& action, std::size_t offset) {
  if (action.kind != ActionKind::tab_focus) return action;
  return WebAction::tab_focus(action.index + static_cast<int>(offset));
}

std::optional<std::string_view> pivot_for(const WebAction& next) { return next.target_bid(); }

namespace {

bool snapshot_matches(const AXTree& expected, const AXTree& actual, std::optional<std::string_view> pivot) {
  if (pivot && expected.find(*pivot) == nullptr) pivot.reset();
  return compare_observation(expected, actual, pivot);
}

}  // namespace

BacktrackResult backtrack(Environment& env, const SearchTree& tree, NodeId target,
                          std::optional<std::string_view> pending_bid) {
  BacktrackResult result;
  std::optional<BacktrackPlan> plan = find_path(tree, target);
  if (!plan) {
    result.reason = "no checkpoint ancestor";
    return result;
  }
  const SearchNode& rollback = tree.node(plan->rollback);
  result.rollback = plan->rollback;
  result.replay_length = plan->replay.size();
  result.fork_tabs = rollback.tabs;
  result.fork_active = rollback.active_tab;

  SpecContext ctx;
  try {
    ctx = env.fork_tabs(rollback.tabs, rollback.active_tab);
  } catch (const ExecutionError& e) {
    result.reason = std::string("fork failed: ") + e.what();
    result.mismatch_step = 0;
    return result;
  }
  auto fail = [&](std::size_t step, std::string why) {
    env.abort_fork(ctx);
    result.mismatch_step = step;
    result.reason = std::move(why);
    return result;
  };

  const bool authenticated = env.scenario().authenticated;
  for (std::size_t i = 0; i < plan->replay.size(); ++i) {
    const WebAction& action = plan->replay[i];
    if (!snapshot_matches(tree.node(plan->nodes[i]).observation, env.observation(), pivot_for(action))) {
      return fail(i, "snapshot mismatch");
    }
    if (is_destructive_pre(action, env.observation(), authenticated)) {
      return fail(i, "replay action flagged destructive");
    }
    try {
      StepOutcome out = env.execute(remap_tab_action(action, ctx.first_tab));
      if (is_destructive_post(out.network)) return fail(i, "replay issued a mutating request");
    } catch (const ExecutionError& e) {
      return fail(i, std::string("replay failed: ") + e.what());
    }
  }
  if (!snapshot_matches(tree.node(target).observation, env.observation(), pending_bid)) {
    return fail(plan->replay.size(), "snapshot mismatch");
  }
  env.commit_fork(ctx);
  result.committed = true;
  return result;
}

BacktrackResult naive_backtrack(Environment& env, const SearchTree& tree, NodeId target) {
  BacktrackResult result;
  const SearchNode& root = tree.node(tree.root());
  std::vector<WebAction> replay = tree.path_actions(target);
  result.rollback = root.id;
  result.replay_length = replay.size();
  result.fork_tabs = root.tabs;
  result.fork_active = root.active_tab;
  SpecContext ctx = env.fork_tabs(root.tabs, root.active_tab);
  for (std::size_t i = 0; i < replay.size(); ++i) {
    try {
      env.execute(remap_tab_action(replay[i], ctx.first_tab));
    } catch (const ExecutionError& e) {
      env.abort_fork(ctx);
      result.mismatch_step = i;
      result.reason = std::string("replay failed: ") + e.what();
      return result;
    }
  }
  env.commit_fork(ctx);
  result.committed = true;
  return result;
}

}  // namespace webtree
