#include "webtree/frontier.hpp"

#include <algorithm>
#include <deque>

namespace webtree {

namespace {

bool has_class(const std::deque<FrontierEntry>& q, ActionClass c) {
  return std::any_of(q.begin(), q.end(), [c](const FrontierEntry& e) { return e.cls == c; });
}

FrontierEntry take_best(std::deque<FrontierEntry>& q, ActionClass c) {
  auto best = q.end();
  for (auto it = q.begin(); it != q.end(); ++it) {
    if (it->cls == c && (best == q.end() || ranks_before(*it, *best))) best = it;
  }
  FrontierEntry e = *best;
  q.erase(best);
  return e;
}

FrontierEntry pop_front(std::deque<FrontierEntry>& q) {
  FrontierEntry e = q.front();
  q.pop_front();
  return e;
}

}  // namespace

bool ranks_before(const FrontierEntry& a, const FrontierEntry& b) {
  if (a.reward != b.reward) return a.reward > b.reward;
  return a.seq < b.seq;
}

void sort_frontier(std::vector<FrontierEntry>& frontier) {
  std::sort(frontier.begin(), frontier.end(), ranks_before);
}

std::optional<FrontierEntry> select_action(std::vector<FrontierEntry>& frontier, const SelectionParams& p) {
  sort_frontier(frontier);
  std::deque<FrontierEntry> q(frontier.begin(), frontier.end());
  std::deque<FrontierEntry> deferred;
  auto finish = [&](std::optional<FrontierEntry> chosen) {
    q.insert(q.end(), deferred.begin(), deferred.end());
    frontier.assign(q.begin(), q.end());
    sort_frontier(frontier);
    return chosen;
  };
  const bool terminating_ready = p.terminating_count >= p.k_t;
  const bool destruction_high = p.destruction_count >= p.k_d;

  auto destructive = std::count_if(q.begin(), q.end(),
                                   [](const FrontierEntry& e) { return e.cls == ActionClass::destructive; });
  if (q.size() > p.budget || destructive > 1) {
    while (!q.empty()) {
      FrontierEntry e = pop_front(q);
      if (e.cls == ActionClass::terminating && !terminating_ready) {
        deferred.push_back(std::move(e));
      } else if (e.cls == ActionClass::destructive) {
        q.insert(q.end(), deferred.begin(), deferred.end());
        deferred.clear();
        if (destruction_high && has_class(q, ActionClass::terminating)) {
          return finish(take_best(q, ActionClass::terminating));
        }
        return finish(std::move(e));
      } else {
        return finish(std::move(e));
      }
    }
  }

  while (!q.empty()) {
    FrontierEntry e = pop_front(q);
    if (e.cls == ActionClass::safe || (e.cls == ActionClass::terminating && terminating_ready)) {
      return finish(std::move(e));
    }
    deferred.push_back(std::move(e));
  }
  if (deferred.empty()) return finish(std::nullopt);

  q.swap(deferred);
  std::sort(q.begin(), q.end(), ranks_before);
  if (destruction_high && has_class(q, ActionClass::terminating)) {
    return finish(take_best(q, ActionClass::terminating));
  }
  if (has_class(q, ActionClass::destructive)) return finish(take_best(q, ActionClass::destructive));
  return finish(pop_front(q));
}

void prune_queue(std::vector<FrontierEntry>& frontier, std::size_t budget,
                 const std::function<bool(NodeId)>& reachable) {
  std::erase_if(frontier, [&](const FrontierEntry& e) { return !reachable(e.origin); });
  sort_frontier(frontier);
  if (frontier.size() <= budget) return;
  for (ActionClass c : {ActionClass::terminating, ActionClass::destructive}) {
    bool kept = false;
    std::erase_if(frontier, [&](const FrontierEntry& e) {
      if (e.cls != c) return false;
      if (!kept) {
        kept = true;
        return false;
      }
      return true;
    });
  }
  while (frontier.size() > budget) frontier.pop_back();
}

}  // namespace webtree
