// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "scenario_gen.hpp"
#include "webtree/frontier.hpp"
#include "webtree/reward.hpp"
#include "webtree/search.hpp"
#include "webtree/suite.hpp"

using namespace webtree;

namespace {

// Tolerances and thresholds.
constexpr double kRewardTol = 1e-9;
constexpr double kSelectSeconds = 10.0;
constexpr double kDeskSeconds = 60.0;
constexpr int kDeskMinSolved = 11;
constexpr int kGreedyMaxSolved = 6;
constexpr double kPrecision = 0.375;
constexpr double kPrecisionTol = 1e-9;
constexpr int kFrontierSamples = 1000;
constexpr int kDeterministicSites = 50;
constexpr int kDriftSites = 10;

const std::filesystem::path kData(WEBTREE_DATA_DIR);

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
  std::printf("%s  %2d  %-34s %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
  if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

FrontierEntry entry(ActionClass cls, double reward, std::uint64_t seq) {
  FrontierEntry e;
  e.cls = cls;
  e.reward = reward;
  e.seq = seq;
  e.action = WebAction::click(std::to_string(seq));
  return e;
}

void selection() {
  auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1);
  int mismatches = 0;
  for (int i = 0; i < kFrontierSamples; ++i) {
    auto f = oracle::random_frontier(rng);
    int t = static_cast<int>(rng() % 4);
    int d = static_cast<int>(rng() % 3);
    std::size_t b = 1 + rng() % 6;
    int kt = static_cast<int>(1 + rng() % 3);
    int kd = static_cast<int>(1 + rng() % 2);
    auto want = oracle::select(f, t, d, b, kt, kd);
    auto got = select_action(f, SelectionParams{t, d, b, kt, kd});
    if (got.has_value() != want.chosen.has_value() || (got && !(*got == *want.chosen)) || f != want.rest) ++mismatches;
  }
  double secs = seconds_since(t0);
  report(1, "selection matches reference", mismatches == 0 && secs < kSelectSeconds,
         std::to_string(mismatches) + " mismatches, " + std::to_string(secs) + " s");
}

void pruning() {
  std::mt19937_64 rng(2);
  int mismatches = 0;
  for (int i = 0; i < kFrontierSamples; ++i) {
    auto f = oracle::random_frontier(rng);
    std::size_t b = 1 + rng() % 6;
    auto want = oracle::prune(f, b, [](NodeId) { return true; });
    prune_queue(f, b, [](NodeId) { return true; });
    if (f != want || f.size() > b) ++mismatches;
  }
  std::vector<FrontierEntry> ex{entry(ActionClass::safe, 0.7, 0), entry(ActionClass::safe, 0.3, 1),
                                entry(ActionClass::destructive, 0.5, 2), entry(ActionClass::destructive, 0.6, 3),
                                entry(ActionClass::terminating, 0.4, 4)};
  prune_queue(ex, 2, [](NodeId) { return true; });
  bool example = ex.size() == 2 && ex[0].cls == ActionClass::safe && ex[0].reward == 0.7 &&
                 ex[1].cls == ActionClass::destructive && ex[1].reward == 0.6;
  report(2, "pruning matches reference", mismatches == 0 && example,
         std::to_string(mismatches) + " mismatches, worked example " + (example ? "ok" : "wrong"));
}

void merging() {
  std::vector<Candidate> in{{WebAction::click("5"), 0.4, ActionClass::safe},
                            {WebAction::stop("x"), 0.5, ActionClass::terminating},
                            {WebAction::click("5"), 0.4, ActionClass::safe}};
  auto out = merge_actions(in);
  bool example = out.size() == 2 && out[0].action == WebAction::click("5") &&
                 std::abs(out[0].reward - 0.8) < kRewardTol && out[1].reward == 0.5;

  std::mt19937_64 rng(3);
  int bad = 0;
  for (int i = 0; i < kFrontierSamples; ++i) {
    std::vector<Candidate> c;
    std::size_t n = rng() % 9;
    for (std::size_t k = 0; k < n; ++k) {
      double r = static_cast<double>(rng() % 1025) / 1024.0;
      if (rng() % 2) {
        c.push_back({WebAction::click(std::to_string(rng() % 3)), r, ActionClass::safe});
      } else {
        c.push_back({WebAction::stop(std::to_string(rng() % 3)), r, ActionClass::terminating});
      }
    }
    auto m = merge_actions(c);
    double a = 0.0, b = 0.0;
    for (const auto& x : c) a += x.reward;
    for (const auto& x : m) b += x.reward;
    auto again = merge_actions(m);
    bool same = again.size() == m.size();
    for (std::size_t k = 0; same && k < m.size(); ++k) {
      same = again[k].action == m[k].action && again[k].reward == m[k].reward;
    }
    if (a != b || !same) ++bad;
  }
  report(3, "candidate merging", example && bad == 0,
         std::string("example ") + (example ? "ok" : "wrong") + ", " + std::to_string(bad) + " property failures");
}

void checklist() {
  ChecklistProbs a{{1, 0}, {0, 1}, {0, 0}};
  ChecklistProbs b{{0.6, 0.2}, {0.4, 0.4}};
  double ra = combine_checklist(a);
  double rb = combine_checklist(b);
  bool hand = std::abs(ra - 0.5) < kRewardTol && std::abs(rb - 0.65) < kRewardTol;

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int bad = 0;
  for (int i = 0; i < kFrontierSamples; ++i) {
    ChecklistProbs p;
    std::size_t k = 1 + rng() % 6;
    for (std::size_t j = 0; j < k; ++j) {
      double yes = u(rng);
      p.push_back({yes, u(rng) * (1.0 - yes)});
    }
    double r = combine_checklist(p);
    ChecklistProbs q = p;
    auto& item = q[rng() % q.size()];
    item.first += u(rng) * (1.0 - item.first - item.second);
    if (r < 0.0 || r > 1.0 || combine_checklist(q) < r) ++bad;
  }
  report(4, "checklist reward", hand && bad == 0,
         "0.5 -> " + std::to_string(ra) + ", 0.65 -> " + std::to_string(rb) + ", " + std::to_string(bad) +
             " property failures");
}

void backtracking() {
  int attempts = 0, commits = 0, violations = 0;
  for (int s = 0; s < kDeterministicSites; ++s) {
    gen::Soundness r = gen::walk_and_backtrack(static_cast<std::uint64_t>(s), false);
    attempts += r.attempts;
    commits += r.commits;
    violations += static_cast<int>(r.violations.size());
  }
  int drift_attempts = 0, drift_aborts = 0;
  for (int s = 0; s < kDriftSites; ++s) {
    gen::Soundness r = gen::walk_and_backtrack(static_cast<std::uint64_t>(100 + s), true);
    drift_attempts += r.attempts;
    drift_aborts += r.aborts;
    violations += static_cast<int>(r.violations.size());
  }
  bool ok = attempts > 0 && commits == attempts && drift_attempts > 0 && drift_aborts == drift_attempts &&
            violations == 0;
  report(5, "backtracking soundness", ok,
         std::to_string(commits) + "/" + std::to_string(attempts) + " committed, " + std::to_string(drift_aborts) +
             "/" + std::to_string(drift_attempts) + " drift aborted, " + std::to_string(violations) + " violations");
}

void rerooting() {
  const auto desk = kData / "desk";
  auto scenario = std::make_shared<const Scenario>(load_scenario(desk / "d10.scenario.json"));
  auto policy = make_scripted_policy(desk / "d10.policy.json");
  auto reward = make_scripted_provider(desk / "d10.reward.json");
  Environment env = reset(scenario, scenario->tasks.front().id, 0).first;
  Trace trace;
  TreeSearch search(env, SearchConfig{}, *policy, *reward, &trace);
  SearchResult res = search.run();

  bool ok = res.success && search.budget() == 3 && search.destruction_count() == 1;
  std::size_t node = 0;
  bool seen = false;
  for (const auto& e : trace.events()) {
    if (e["kind"] == "destructive_reroot") {
      seen = true;
      node = e["node"].get<std::size_t>();
      ok = ok && e["frontier_size"] == 0 && e["budget"] == 3;
    } else if (seen && e["kind"] == "select") {
      ok = ok && e["origin"].get<std::size_t>() >= node;
    }
  }
  ok = ok && seen;
  for (NodeId n = 0; seen && n < node; ++n) ok = ok && !search.tree().node(n).valid;

  SearchConfig floor;
  floor.frontier_budget = 2;
  Environment env2 = reset(scenario, scenario->tasks.front().id, 0).first;
  auto policy2 = make_scripted_policy(desk / "d10.policy.json");
  TreeSearch clamped(env2, floor, *policy2, *reward);
  clamped.run();
  ok = ok && clamped.budget() == 2;
  report(6, "re-rooting after destruction", ok,
         "budget " + std::to_string(search.budget()) + ", floor " + std::to_string(clamped.budget()));
}

Suite desk_suite() { return load_suite(kData / "desk"); }

void desk() {
  Suite suite = desk_suite();
  auto t0 = std::chrono::steady_clock::now();
  SuiteReport full = evaluate_suite(suite, SearchConfig{});
  double secs = seconds_since(t0);
  SearchConfig greedy;
  greedy.frontier_budget = 1;
  greedy.min_queue = 1;
  greedy.backtrack = BacktrackMode::disabled;
  SuiteReport g = evaluate_suite(suite, greedy);

  // suite composition: tasks that commit a backtrack, execute a destructive
  // action, or see a rejected proposal
  int backtracked = 0, destructive = 0, retried = 0;
  for (const auto& t : full.tasks) {
    if (t.result.backtracks_committed > 0) ++backtracked;
    if (t.result.destructive_executions > 0) ++destructive;
    bool rejected = false;
    std::istringstream lines(t.trace);
    for (std::string line; std::getline(lines, line);) {
      TraceJson e = TraceJson::parse(line);
      if (e["kind"] != "expand") continue;
      for (const auto& v : e["variations"]) rejected = rejected || !v["rejected"].empty();
    }
    if (rejected) ++retried;
  }
  bool mix = backtracked >= 4 && destructive >= 2 && retried >= 2;
  bool ok = mix && full.solved >= kDeskMinSolved && secs < kDeskSeconds && g.solved <= kGreedyMaxSolved;
  report(7, "desk suite", ok,
         std::to_string(full.solved) + "/" + std::to_string(suite.tasks.size()) + " in " + std::to_string(secs) +
             " s, greedy " + std::to_string(g.solved) + ", mix " + std::to_string(backtracked) + "/" +
             std::to_string(destructive) + "/" + std::to_string(retried));
}

void precision() {
  SuiteReport r = evaluate_suite(load_suite(kData / "precision"), SearchConfig{});
  bool ok = r.preflagged > 0 && std::abs(r.precision - kPrecision) < kPrecisionTol;
  report(8, "destructive pre-check precision", ok,
         std::to_string(r.confirmed) + "/" + std::to_string(r.preflagged) + " = " + std::to_string(r.precision));
}

void sweep() {
  SuiteReport r = evaluate_suite(desk_suite(), SearchConfig{}, 1, true);
  bool ok = r.sweep.size() == 4;
  int prev = -1;
  std::string detail;
  for (const auto& [budget, solved] : r.sweep) {
    ok = ok && solved >= prev;
    prev = solved;
    detail += std::to_string(budget) + ":" + std::to_string(solved) + " ";
  }
  report(9, "step budget sweep", ok, detail);
}

void determinism() {
  Suite suite = desk_suite();
  int differ = 0, unreplayable = 0;
  for (const auto& task : suite.tasks) {
    TaskOutcome a = run_suite_task(suite, task, SearchConfig{});
    TaskOutcome b = run_suite_task(suite, task, SearchConfig{});
    if (a.trace != b.trace) ++differ;
    auto scenario = std::make_shared<const Scenario>(load_scenario(suite.dir / task.scenario));
    if (replay_trace(a.trace, scenario).status != ReplayStatus::match) ++unreplayable;
  }
  report(10, "deterministic traces and replay", differ == 0 && unreplayable == 0,
         std::to_string(differ) + " differing, " + std::to_string(unreplayable) + " not replayable");
}

}  // namespace

int main() {
  selection();
  pruning();
  merging();
  checklist();
  backtracking();
  rerooting();
  desk();
  precision();
  sweep();
  determinism();
  return failures == 0 ? 0 : 1;
}
