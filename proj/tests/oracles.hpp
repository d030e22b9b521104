#pragma once

// Reference implementations used only by tests. Written as a literal
// step-by-step transcription; they share no code with src/.

#include <algorithm>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "webtree/axtree.hpp"
#include "webtree/frontier.hpp"

namespace oracle {

using webtree::ActionClass;
using webtree::FrontierEntry;

// Priority queue order: highest reward first, then lowest sequence number.
struct ByPriority {
  bool operator()(const FrontierEntry& a, const FrontierEntry& b) const {
    if (a.reward != b.reward) return a.reward > b.reward;
    return a.seq < b.seq;
  }
};

using Queue = std::multiset<FrontierEntry, ByPriority>;

struct Selection {
  std::optional<FrontierEntry> chosen;
  std::vector<FrontierEntry> rest;  // in priority order
};

inline FrontierEntry pop(Queue& q) {
  FrontierEntry e = *q.begin();
  q.erase(q.begin());
  return e;
}

inline void push_all(Queue& q, std::vector<FrontierEntry>& items) {
  q.insert(items.begin(), items.end());
  items.clear();
}

// argmax over entries of class c; first in queue order on ties.
inline std::optional<FrontierEntry> best_of(const Queue& q, ActionClass c) {
  for (const auto& e : q) {
    if (e.cls == c) return e;
  }
  return std::nullopt;
}

inline Selection select(const std::vector<FrontierEntry>& frontier, int terminating_count, int destruction_count,
                        std::size_t budget, int k_t, int k_d) {
  Queue q(frontier.begin(), frontier.end());
  std::vector<FrontierEntry> deferred;
  // The operation contract puts popped-and-deferred entries back, wherever it returns.
  auto done = [&](const FrontierEntry& e) {
    push_all(q, deferred);
    return Selection{e, std::vector<FrontierEntry>(q.begin(), q.end())};
  };

  std::size_t destructive = 0;
  for (const auto& e : q) destructive += e.cls == ActionClass::destructive ? 1 : 0;

  if (q.size() > budget || destructive > 1) {
    while (!q.empty()) {
      FrontierEntry e = pop(q);
      if (e.cls == ActionClass::terminating && terminating_count < k_t) {
        deferred.push_back(e);
      } else if (e.cls == ActionClass::destructive) {
        push_all(q, deferred);
        auto t = best_of(q, ActionClass::terminating);
        if (t && destruction_count >= k_d) {
          q.erase(q.find(*t));
          return done(*t);
        }
        return done(e);
      } else {
        push_all(q, deferred);
        return done(e);
      }
    }
  }

  while (!q.empty()) {
    FrontierEntry e = pop(q);
    if (e.cls == ActionClass::safe) return done(e);
    if (e.cls == ActionClass::terminating && terminating_count >= k_t) return done(e);
    deferred.push_back(e);
  }
  if (deferred.empty()) return Selection{std::nullopt, {}};

  q = Queue(deferred.begin(), deferred.end());
  deferred.clear();
  if (auto t = best_of(q, ActionClass::terminating); t && destruction_count >= k_d) {
    q.erase(q.find(*t));
    return done(*t);
  }
  if (auto d = best_of(q, ActionClass::destructive)) {
    q.erase(q.find(*d));
    return done(*d);
  }
  return done(pop(q));
}

// Step 0 (unreachable origins) precedes the size check; the rest follows
// the routine step by step.
inline std::vector<FrontierEntry> prune(const std::vector<FrontierEntry>& frontier, std::size_t budget,
                                        const std::function<bool(webtree::NodeId)>& reachable) {
  std::vector<FrontierEntry> q;
  for (const auto& e : frontier) {
    if (reachable(e.origin)) q.push_back(e);
  }
  auto sorted = [](std::vector<FrontierEntry> v) {
    std::sort(v.begin(), v.end(), ByPriority{});
    return v;
  };
  if (q.size() <= budget) return sorted(q);

  for (ActionClass c : {ActionClass::terminating, ActionClass::destructive}) {
    const FrontierEntry* best = nullptr;
    for (const auto& e : q) {
      if (e.cls == c && (best == nullptr || ByPriority{}(e, *best))) best = &e;
    }
    if (best == nullptr) continue;
    FrontierEntry keep = *best;
    std::erase_if(q, [&](const FrontierEntry& e) { return e.cls == c && !(e == keep); });
  }
  while (q.size() > budget) {
    // smallest reward; among equals the latest inserted
    auto worst = q.begin();
    for (auto it = q.begin(); it != q.end(); ++it) {
      if (ByPriority{}(*worst, *it)) worst = it;
    }
    q.erase(worst);
  }
  return sorted(q);
}

inline bool is_prefix(const webtree::NodePath& a, const webtree::NodePath& b) {
  return a.size() <= b.size() && std::equal(a.begin(), a.end(), b.begin());
}

inline void all_paths(const webtree::AXNode& n, webtree::NodePath& cur, std::vector<webtree::NodePath>& out) {
  out.push_back(cur);
  for (std::size_t i = 0; i < n.children.size(); ++i) {
    cur.push_back(i);
    all_paths(n.children[i], cur, out);
    cur.pop_back();
  }
}

// Every node tested against the three membership rules directly.
inline std::vector<webtree::NodePath> neighborhood(const webtree::AXTree& tree, const webtree::NodePath& pivot) {
  std::vector<webtree::NodePath> every;
  webtree::NodePath cur;
  all_paths(tree.root(), cur, every);
  std::vector<webtree::NodePath> out;
  for (const auto& p : every) {
    bool ancestor = is_prefix(p, pivot);
    bool descendant = is_prefix(pivot, p);
    bool child_of_ancestor = !p.empty() && is_prefix(webtree::NodePath(p.begin(), p.end() - 1), pivot);
    if (ancestor || descendant || child_of_ancestor) out.push_back(p);
  }
  return out;
}

// Up to `max_size` entries with mixed classes; rewards are drawn from a coarse
// grid half of the time so equal rewards (and the FIFO tie-break) show up.
template <typename Rng>
std::vector<FrontierEntry> random_frontier(Rng& rng, std::size_t max_size = 10) {
  std::vector<FrontierEntry> out;
  std::size_t n = rng() % (max_size + 1);
  bool coarse = rng() % 2 == 0;
  for (std::size_t i = 0; i < n; ++i) {
    FrontierEntry e;
    e.origin = rng() % 6;
    e.seq = i * 3 + rng() % 3;
    e.reward = coarse ? static_cast<double>(rng() % 5) / 4.0 : static_cast<double>(rng() % 1000001) / 1e6;
    e.cls = static_cast<ActionClass>(1 + rng() % 3);
    e.action = webtree::WebAction::click(std::to_string(i));
    out.push_back(e);
  }
  for (std::size_t i = out.size(); i > 1; --i) std::swap(out[i - 1], out[rng() % i]);
  return out;
}

}  // namespace oracle
