#include "webtree/suite.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

namespace webtree {

std::unique_ptr<GenProvider> make_policy(std::string_view spec, const std::filesystem::path& base,
                                         std::uint64_t seed) {
  if (spec == "random") return make_random_policy(seed);
  if (spec.substr(0, 9) == "scripted:") return make_scripted_policy(base / std::string(spec.substr(9)));
  throw SuiteError("unknown policy '" + std::string(spec) + "'");
}

std::unique_ptr<RewardProvider> make_reward(std::string_view spec, const std::filesystem::path& base) {
  if (spec.substr(0, 9) == "scripted:") return make_scripted_provider(base / std::string(spec.substr(9)));
  throw SuiteError("unknown reward provider '" + std::string(spec) + "'");
}

Suite load_suite(const std::filesystem::path& path) {
  std::filesystem::path file = std::filesystem::is_directory(path) ? path / "suite.json" : path;
  std::ifstream in(file);
  if (!in) throw SuiteError("cannot read " + file.string());
  TraceJson root;
  try {
    root = TraceJson::parse(in);
  } catch (const TraceJson::exception& e) {
    throw SuiteError(file.string() + ": " + e.what());
  }
  Suite suite;
  suite.dir = file.parent_path();
  try {
    for (const auto& t : root.at("tasks")) {
      SuiteTask task;
      task.id = t.at("id").get<std::string>();
      task.scenario = t.at("scenario").get<std::string>();
      task.task = t.at("task").get<std::string>();
      task.policy = t.at("policy").get<std::string>();
      task.reward = t.at("reward").get<std::string>();
      suite.tasks.push_back(std::move(task));
    }
  } catch (const TraceJson::exception& e) {
    throw SuiteError(file.string() + ": " + e.what());
  }
  if (suite.tasks.empty()) throw SuiteError(file.string() + ": no tasks");
  return suite;
}

TaskOutcome run_suite_task(const Suite& suite, const SuiteTask& task, const SearchConfig& config) {
  auto scenario = std::make_shared<const Scenario>(load_scenario(suite.dir / task.scenario));
  auto policy = make_policy(task.policy, suite.dir, config.seed);
  auto reward = make_reward(task.reward, suite.dir);
  auto [env, obs] = reset(scenario, task.task, config.seed);
  Trace trace;
  TaskOutcome out;
  out.id = task.id;
  out.result = run_search(env, config, *policy, *reward, &trace);
  out.trace = trace.jsonl();
  return out;
}

namespace {

std::vector<TaskOutcome> run_all(const Suite& suite, const SearchConfig& config, unsigned jobs) {
  std::vector<TaskOutcome> out(suite.tasks.size());
  std::vector<std::string> errors(suite.tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < suite.tasks.size(); i = next++) {
      try {
        out[i] = run_suite_task(suite, suite.tasks[i], config);
      } catch (const std::exception& e) {
        errors[i] = suite.tasks[i].id + ": " + e.what();
      }
    }
  };
  unsigned n = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(suite.tasks.size())));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (!e.empty()) throw SuiteError(e);
  }
  std::sort(out.begin(), out.end(), [](const TaskOutcome& a, const TaskOutcome& b) { return a.id < b.id; });
  return out;
}

}  // namespace

SuiteReport evaluate_suite(const Suite& suite, const SearchConfig& config, unsigned jobs, bool sweep) {
  SuiteReport report;
  report.tasks = run_all(suite, config, jobs);
  for (const auto& t : report.tasks) {
    const SearchResult& r = t.result;
    if (r.success) ++report.solved;
    std::size_t bucket = std::min<std::size_t>(static_cast<std::size_t>(r.backtracks_committed),
                                               kHistogramBuckets - 1);
    ++report.backtrack_histogram[bucket];
    report.preflagged += r.preflagged_executed;
    report.confirmed += r.preflagged_confirmed;
  }
  report.success_rate = static_cast<double>(report.solved) / static_cast<double>(report.tasks.size());
  report.precision = report.preflagged == 0 ? 0.0 : static_cast<double>(report.confirmed) / report.preflagged;
  if (sweep) {
    for (int budget : kSweepBudgets) {
      SearchConfig c = config;
      c.step_budget = budget;
      int solved = 0;
      for (const auto& t : run_all(suite, c, jobs)) solved += t.result.success ? 1 : 0;
      report.sweep[budget] = solved;
    }
  }
  return report;
}

TraceJson report_json(const SuiteReport& report) {
  TraceJson j;
  TraceJson tasks = TraceJson::array();
  for (const auto& t : report.tasks) {
    const SearchResult& r = t.result;
    tasks.push_back({{"id", t.id},
                     {"success", r.success},
                     {"failure", failure_reason_name(r.failure)},
                     {"steps", r.steps},
                     {"backtracks_attempted", r.backtracks_attempted},
                     {"backtracks_committed", r.backtracks_committed},
                     {"destructive_executions", r.destructive_executions},
                     {"preflagged_executed", r.preflagged_executed},
                     {"preflagged_confirmed", r.preflagged_confirmed}});
  }
  j["tasks"] = std::move(tasks);
  j["solved"] = report.solved;
  j["total"] = report.tasks.size();
  j["success_rate"] = report.success_rate;
  j["backtrack_histogram"] = {{"0", report.backtrack_histogram[0]}, {"1", report.backtrack_histogram[1]},
                              {"2", report.backtrack_histogram[2]}, {"3", report.backtrack_histogram[3]},
                              {"4", report.backtrack_histogram[4]}, {"5+", report.backtrack_histogram[5]}};
  j["destructive"] = {{"preflagged", report.preflagged},
                      {"confirmed", report.confirmed},
                      {"ratio", report.precision}};
  if (!report.sweep.empty()) {
    TraceJson s = TraceJson::object();
    for (const auto& [budget, solved] : report.sweep) s[std::to_string(budget)] = solved;
    j["sweep"] = std::move(s);
  }
  return j;
}

std::string report_table(const SuiteReport& report) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-12s %-8s %-17s %5s %10s %11s\n", "task", "result", "failure", "steps",
                "backtracks", "destructive");
  out << line;
  for (const auto& t : report.tasks) {
    const SearchResult& r = t.result;
    std::snprintf(line, sizeof line, "%-12s %-8s %-17s %5d %4d/%-5d %11d\n", t.id.c_str(),
                  r.success ? "solved" : "failed", std::string(failure_reason_name(r.failure)).c_str(), r.steps,
                  r.backtracks_committed, r.backtracks_attempted, r.destructive_executions);
    out << line;
  }
  std::snprintf(line, sizeof line, "solved %d/%zu (%.1f%%)\n", report.solved, report.tasks.size(),
                100.0 * report.success_rate);
  out << line;
  out << "backtracks per task:";
  const char* labels[] = {"0", "1", "2", "3", "4", "5+"};
  for (std::size_t i = 0; i < kHistogramBuckets; ++i) out << ' ' << labels[i] << '=' << report.backtrack_histogram[i];
  out << '\n';
  std::snprintf(line, sizeof line, "destructive: %d pre-flagged, %d confirmed, ratio %.3f\n", report.preflagged,
                report.confirmed, report.precision);
  out << line;
  if (!report.sweep.empty()) {
    out << "sweep:";
    for (const auto& [budget, solved] : report.sweep) out << " budget " << budget << " -> " << solved;
    out << '\n';
  }
  return out.str();
}

}  // namespace webtree
