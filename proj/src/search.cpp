#include "webtree/search.hpp"

#include <algorithm>

#include "webtree/digest.hpp"

namespace webtree {

void validate_config(const SearchConfig& c) {
  if (c.step_budget < 1) throw ConfigError("step budget must be positive");
  if (c.frontier_budget < 1) throw ConfigError("frontier budget must be positive");
  if (c.branching < 1) throw ConfigError("branching must be positive");
  if (c.max_depth < 1) throw ConfigError("max depth must be positive");
  if (c.k_t < 1 || c.k_d < 1) throw ConfigError("K_T and K_D must be positive");
  if (c.min_queue < 1) throw ConfigError("minimum queue size must be positive");
  if (c.min_queue > c.frontier_budget) throw ConfigError("minimum queue size exceeds the frontier budget");
  if (c.max_retry < 1) throw ConfigError("max retry must be positive");
}

std::string_view failure_reason_name(FailureReason r) {
  switch (r) {
    case FailureReason::none: return "none";
    case FailureReason::budget_exhausted: return "budget_exhausted";
    case FailureReason::frontier_empty: return "frontier_empty";
    case FailureReason::wrong_answer: return "wrong_answer";
  }
  return "?";
}

TreeSearch::TreeSearch(Environment& env, SearchConfig config, GenProvider& policy, const RewardProvider& reward,
                       Trace* trace)
    : env_(env), config_(config), policy_(policy), reward_(reward), trace_(trace), budget_(config.frontier_budget) {
  validate_config(config_);
  current_ = tree_.add_root(env_);
  mark_checkpoint(current_);
}

void TreeSearch::emit(std::string_view kind, const TraceJson& payload) {
  if (trace_ != nullptr) trace_->emit(kind, payload);
}

bool TreeSearch::reachable(NodeId id) const {
  return tree_.node(id).valid && tree_.checkpoint_ancestor(id).has_value();
}

bool TreeSearch::mark_checkpoint(NodeId id) {
  SearchNode& node = tree_.node(id);
  bool stable = false;
  std::string urls[] = {node.url};
  try {
    SpecContext ctx = env_.fork_urls(urls);
    std::string first = serialize_axtree(env_.observation());
    std::string second = serialize_axtree(env_.refresh());
    env_.abort_fork(ctx);
    stable = first == second && first == serialize_axtree(node.observation);
  } catch (const ExecutionError&) {
    stable = false;
  }
  std::optional<NodeId> parent = tree_.tree_parent(id);
  node.checkpoint = stable && (!parent || tree_.node(*parent).url != node.url);
  return node.checkpoint;
}

std::vector<FrontierEntry> TreeSearch::expand(NodeId id) {
  SearchNode& node = tree_.node(id);
  const TaskSpec& task = env_.task();

  SpaceInputs space_in;
  space_in.observation = &node.observation;
  space_in.page_long = node.page_long;
  space_in.tab_count = static_cast<int>(node.tabs.size());
  space_in.history_nonempty = !node.tabs.at(node.active_tab).back.empty();
  space_in.last_action = node.incoming;

  GenInputs in;
  in.goal = task.goal;
  in.rephrased_goal = task.rephrased_goal;
  in.history = node.history;
  in.examples = task.examples;
  in.observation = &node.observation;
  in.url = node.url;
  in.space = dynamic_action_space(space_in);

  const Environment& env = env_;
  UrlOracle oracle = [&env](std::string_view url) { return env.url_exists(url); };
  Generation gen = generate_candidates(policy_, in, config_.branching, config_.max_retry, oracle);
  std::vector<double> rewards =
      score_candidates(reward_, task.goal, node.trajectory, node.observation, node.url, gen.actions);

  std::vector<Candidate> scored;
  for (std::size_t i = 0; i < gen.actions.size(); ++i) {
    scored.push_back({gen.actions[i], rewards[i],
                      classify_action(gen.actions[i], node.observation, env_.scenario().authenticated)});
  }
  std::vector<Candidate> merged = merge_actions(scored);
  node.expanded = true;
  bool any_stop = std::any_of(merged.begin(), merged.end(),
                              [](const Candidate& c) { return c.cls == ActionClass::terminating; });
  if (any_stop) ++terminating_count_;

  std::vector<WebAction> ancestry = tree_.path_actions(id);
  TraceJson variations = TraceJson::array();
  for (const auto& v : gen.log) {
    TraceJson vj;
    vj["variation"] = v.variation;
    vj["attempts"] = v.attempts;
    vj["rejected"] = v.rejected;
    vj["accepted"] = v.accepted ? TraceJson(v.accepted->to_string()) : TraceJson(nullptr);
    variations.push_back(std::move(vj));
  }
  emit("expand", {{"node", id},
                  {"depth", node.depth},
                  {"url", node.url},
                  {"obs_digest", node.digest},
                  {"checkpoint", node.checkpoint},
                  {"variations", std::move(variations)},
                  {"terminating_count", terminating_count_}});

  std::vector<FrontierEntry> pushed;
  TraceJson listing = TraceJson::array();
  for (const auto& c : merged) {
    FrontierEntry e{id, c.action, c.reward, c.cls, next_seq_++};
    bool repetitive = std::find(ancestry.begin(), ancestry.end(), c.action) != ancestry.end();
    TraceJson cj{{"action", c.action.to_string()},
                 {"reward", c.reward},
                 {"class", action_class_name(c.cls)},
                 {"entry", e.seq}};
    if (repetitive) cj["repetitive"] = true;
    listing.push_back(std::move(cj));
    frontier_.push_back(e);
    pushed.push_back(std::move(e));
  }
  sort_frontier(frontier_);
  emit("candidates", {{"node", id}, {"candidates", std::move(listing)}});
  return pushed;
}

void TreeSearch::handle_destructive(NodeId id) {
  frontier_.clear();
  tree_.reroot(id);
  ++destruction_count_;
  budget_ = std::max(budget_ > 0 ? budget_ - 1 : 0, config_.min_queue);
  mark_checkpoint(id);
  std::size_t invalid = 0;
  for (NodeId n = 0; n < tree_.size(); ++n) invalid += tree_.node(n).valid ? 0 : 1;
  emit("destructive_reroot", {{"node", id},
                              {"budget", budget_},
                              {"destruction_count", destruction_count_},
                              {"invalidated", invalid},
                              {"frontier_size", frontier_.size()},
                              {"checkpoint", tree_.node(id).checkpoint}});
}

void TreeSearch::finish(SearchResult& result) {
  result.terminating_count = terminating_count_;
  result.trajectory = tree_.node(current_).trajectory;
  emit("result", {{"task", env_.task().id},
                  {"seed", env_.seed()},
                  {"success", result.success},
                  {"failure", failure_reason_name(result.failure)},
                  {"answer", result.answer ? TraceJson(*result.answer) : TraceJson(nullptr)},
                  {"steps", result.steps},
                  {"backtracks_attempted", result.backtracks_attempted},
                  {"backtracks_committed", result.backtracks_committed},
                  {"backtracks_aborted", result.backtracks_aborted},
                  {"destructive_executions", result.destructive_executions},
                  {"preflagged_executed", result.preflagged_executed},
                  {"preflagged_confirmed", result.preflagged_confirmed},
                  {"terminating_count", terminating_count_}});
}

SearchResult TreeSearch::run() {
  if (started_) throw std::logic_error("a search instance runs once");
  started_ = true;
  SearchResult result;

  while (result.steps < config_.step_budget) {
    {
      const SearchNode& node = tree_.node(current_);
      if (!node.expanded && node.depth < config_.max_depth) expand(current_);
    }

    std::optional<FrontierEntry> chosen;
    while (!chosen) {
      SelectionParams params{terminating_count_, destruction_count_, budget_, config_.k_t, config_.k_d};
      std::optional<FrontierEntry> sel = select_action(frontier_, params);
      if (!sel) break;
      emit("select", {{"origin", sel->origin},
                      {"action", sel->action.to_string()},
                      {"reward", sel->reward},
                      {"class", action_class_name(sel->cls)},
                      {"entry", sel->seq},
                      {"frontier_size", frontier_.size()}});
      if (sel->origin == current_) {
        chosen = std::move(sel);
        break;
      }
      if (config_.backtrack == BacktrackMode::disabled) {
        emit("backtrack", {{"target", sel->origin}, {"mode", "disabled"}, {"outcome", "skipped"}});
        continue;
      }
      ++result.backtracks_attempted;
      BacktrackResult bt = config_.backtrack == BacktrackMode::naive
                               ? naive_backtrack(env_, tree_, sel->origin)
                               : backtrack(env_, tree_, sel->origin, pivot_for(sel->action));
      std::vector<WebAction> replay = config_.backtrack == BacktrackMode::naive
                                          ? tree_.path_actions(sel->origin)
                                          : (bt.rollback ? find_path(tree_, sel->origin)->replay
                                                         : std::vector<WebAction>{});
      TraceJson payload{{"target", sel->origin},
                        {"mode", config_.backtrack == BacktrackMode::naive ? "naive" : "speculative"},
                        {"outcome", bt.committed ? "committed" : "aborted"},
                        {"rollback", bt.rollback ? TraceJson(*bt.rollback) : TraceJson(nullptr)},
                        {"replay_length", bt.replay_length}};
      if (bt.committed) {
        TraceJson tabs = TraceJson::array();
        for (const auto& t : bt.fork_tabs) tabs.push_back(tab_state_json(t));
        TraceJson actions = TraceJson::array();
        for (const auto& a : replay) actions.push_back(a.to_string());
        payload["tabs"] = std::move(tabs);
        payload["active"] = bt.fork_active;
        payload["replay"] = std::move(actions);
        payload["obs_digest"] = digest_text(serialize_axtree(env_.observation()));
        ++result.backtracks_committed;
        current_ = sel->origin;
        chosen = std::move(sel);
      } else {
        payload["mismatch_step"] = bt.mismatch_step ? TraceJson(*bt.mismatch_step) : TraceJson(nullptr);
        payload["reason"] = bt.reason;
        ++result.backtracks_aborted;
      }
      emit("backtrack", payload);
    }
    if (!chosen) {
      result.failure = FailureReason::frontier_empty;
      finish(result);
      return result;
    }

    std::size_t before = frontier_.size();
    prune_queue(frontier_, budget_, [this](NodeId id) { return reachable(id); });
    if (frontier_.size() != before) {
      emit("prune", {{"budget", budget_}, {"removed", before - frontier_.size()}, {"kept", frontier_.size()}});
    }

    const WebAction& action = chosen->action;
    bool preflagged = chosen->cls == ActionClass::destructive;
    ++result.steps;
    StepOutcome outcome;
    try {
      outcome = env_.execute(action);
    } catch (const ExecutionError& e) {
      emit("execute", {{"node", current_},
                       {"action", action.to_string()},
                       {"status", "error"},
                       {"error", e.what()},
                       {"obs_digest", digest_text(serialize_axtree(env_.observation()))}});
      continue;
    }
    NodeId parent = current_;
    current_ = tree_.add_child(parent, action, env_);
    mark_checkpoint(current_);
    const SearchNode& child = tree_.node(current_);
    TraceJson exec{{"node", parent},
                   {"child", current_},
                   {"action", action.to_string()},
                   {"status", "ok"},
                   {"network", network_json(outcome.network)},
                   {"url", child.url},
                   {"obs_digest", child.digest},
                   {"checkpoint", child.checkpoint}};
    if (config_.trace_full) exec["obs"] = serialize_axtree(child.observation);
    emit("execute", exec);

    bool confirmed = is_destructive_post(outcome.network);
    if (preflagged) {
      ++result.preflagged_executed;
      if (confirmed) ++result.preflagged_confirmed;
    }

    if (action.kind == ActionKind::stop) {
      result.answer = action.text;
      result.success = evaluate_task(env_, env_.task(), result.answer);
      if (!result.success) result.failure = FailureReason::wrong_answer;
      emit("terminate", {{"node", current_}, {"answer", action.text}, {"success", result.success}});
      finish(result);
      return result;
    }
    if (confirmed) {
      ++result.destructive_executions;
      handle_destructive(current_);
    }
  }
  result.failure = FailureReason::budget_exhausted;
  finish(result);
  return result;
}

SearchResult run_search(Environment& env, const SearchConfig& config, GenProvider& policy,
                        const RewardProvider& reward, Trace* trace) {
  TreeSearch search(env, config, policy, reward, trace);
  return search.run();
}

}  // namespace webtree
