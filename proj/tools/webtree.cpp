// webtree: run a search on one task, replay a trace, or evaluate a suite.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "webtree/search.hpp"
#include "webtree/suite.hpp"
#include "webtree/trace.hpp"

namespace fs = std::filesystem;
using namespace webtree;

namespace {

struct SearchFlags {
  SearchConfig config;
  bool no_backtrack = false;
  bool naive_backtrack = false;
  CLI::Option* min_queue = nullptr;
};

void add_search_flags(CLI::App* cmd, SearchFlags& f) {
  cmd->add_option("--step-budget", f.config.step_budget, "actions executed per task")->capture_default_str();
  cmd->add_option("--frontier-budget", f.config.frontier_budget, "frontier size bound")->capture_default_str();
  cmd->add_option("--branching", f.config.branching, "context variations per expansion")->capture_default_str();
  cmd->add_option("--max-depth", f.config.max_depth, "deepest expandable node")->capture_default_str();
  cmd->add_option("--kt", f.config.k_t, "terminating expansions before eager stop")->capture_default_str();
  cmd->add_option("--kd", f.config.k_d, "destructions before the terminating fallback")->capture_default_str();
  f.min_queue = cmd->add_option("--min-queue", f.config.min_queue, "frontier budget floor")->capture_default_str();
  cmd->add_option("--max-retry", f.config.max_retry, "attempts per variation")->capture_default_str();
  cmd->add_option("--seed", f.config.seed, "environment and policy seed")->capture_default_str();
  cmd->add_flag("--no-backtrack", f.no_backtrack, "never leave the current branch");
  cmd->add_flag("--naive-backtrack", f.naive_backtrack, "restore the root and replay without checks");
  cmd->add_flag("--trace-full", f.config.trace_full, "store AX text in execute events");
}

SearchConfig finalize(SearchFlags& f) {
  SearchConfig c = f.config;
  if (f.no_backtrack && f.naive_backtrack) throw ConfigError("--no-backtrack and --naive-backtrack conflict");
  if (f.no_backtrack) c.backtrack = BacktrackMode::disabled;
  if (f.naive_backtrack) c.backtrack = BacktrackMode::naive;
  if (f.min_queue->count() == 0 && c.min_queue > c.frontier_budget) c.min_queue = c.frontier_budget;
  validate_config(c);
  return c;
}

fs::path under(const fs::path& workdir, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() || workdir.empty() ? path : workdir / path;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Spec strings keep their "scripted:" prefix; the path part is resolved
// against the working directory.
std::string resolve_spec(const fs::path& workdir, const std::string& spec) {
  if (spec.rfind("scripted:", 0) == 0) return "scripted:" + under(workdir, spec.substr(9)).string();
  return spec;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Best-first web agent search over simulated sites"};
  app.require_subcommand(1);
  std::string workdir;
  app.add_option("--workdir", workdir, "base directory for relative paths");

  auto* run = app.add_subcommand("run", "search one task");
  SearchFlags run_flags;
  std::string scenario_path, task_id, policy_spec = "random", reward_spec, trace_path;
  run->add_option("--scenario", scenario_path, "scenario JSON")->required();
  run->add_option("--task", task_id, "task id")->required();
  run->add_option("--policy", policy_spec, "scripted:PATH or random")->capture_default_str();
  run->add_option("--reward", reward_spec, "scripted:PATH")->required();
  run->add_option("--trace", trace_path, "write the JSONL trace here");
  add_search_flags(run, run_flags);

  auto* replay = app.add_subcommand("replay", "verify a trace against a scenario");
  std::string replay_trace_path, replay_scenario;
  replay->add_option("trace", replay_trace_path, "trace JSONL")->required();
  replay->add_option("--scenario", replay_scenario, "scenario JSON")->required();

  auto* eval = app.add_subcommand("eval", "run a task suite");
  SearchFlags eval_flags;
  std::string suite_path, report_path, trace_dir;
  bool sweep = false;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  eval->add_option("suite", suite_path, "suite directory or suite.json")->required();
  eval->add_option("--report", report_path, "write the JSON report here");
  eval->add_option("--trace", trace_dir, "write one trace per task into this directory");
  eval->add_option("--jobs", jobs, "parallel tasks");
  eval->add_flag("--sweep", sweep, "also solve with step budgets 5, 10, 15, 20");
  add_search_flags(eval, eval_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  fs::path base(workdir);

  if (*run) {
    SearchResult result;
    try {
      SearchConfig config = finalize(run_flags);
      auto scenario = std::make_shared<const Scenario>(load_scenario(under(base, scenario_path)));
      auto policy = make_policy(resolve_spec(base, policy_spec), {}, config.seed);
      auto reward = make_reward(resolve_spec(base, reward_spec), {});
      auto [env, obs] = reset(scenario, task_id, config.seed);
      Trace trace;
      result = run_search(env, config, *policy, *reward, &trace);
      if (!trace_path.empty()) trace.write(under(base, trace_path));
    } catch (const std::exception& e) {
      std::cerr << "webtree run: " << e.what() << '\n';
      return 2;
    }
    std::printf("task %s: %s steps=%d backtracks=%d/%d destructive=%d%s%s\n", task_id.c_str(),
                result.success ? "solved" : "failed", result.steps, result.backtracks_committed,
                result.backtracks_attempted, result.destructive_executions, result.success ? "" : " reason=",
                result.success ? "" : std::string(failure_reason_name(result.failure)).c_str());
    return result.success ? 0 : 1;
  }

  if (*replay) {
    ReplayReport report;
    try {
      auto scenario = std::make_shared<const Scenario>(load_scenario(under(base, replay_scenario)));
      report = replay_trace(read_file(under(base, replay_trace_path)), scenario);
    } catch (const std::exception& e) {
      std::cerr << "webtree replay: " << e.what() << '\n';
      return 2;
    }
    switch (report.status) {
      case ReplayStatus::match:
        std::printf("replay ok: %zu execute events verified\n", report.executes);
        return 0;
      case ReplayStatus::divergence:
        std::printf("replay diverged at seq %lld: %s\n", static_cast<long long>(report.seq), report.message.c_str());
        return 1;
      case ReplayStatus::malformed:
        std::printf("replay rejected trace: %s\n", report.message.c_str());
        return 2;
    }
  }

  if (*eval) {
    try {
      SearchConfig config = finalize(eval_flags);
      Suite suite = load_suite(under(base, suite_path));
      SuiteReport report = evaluate_suite(suite, config, jobs, sweep);
      std::cout << report_table(report);
      if (!report_path.empty()) {
        std::ofstream out(under(base, report_path));
        out << report_json(report).dump(2) << '\n';
      }
      if (!trace_dir.empty()) {
        fs::path dir = under(base, trace_dir);
        fs::create_directories(dir);
        for (const auto& t : report.tasks) std::ofstream(dir / (t.id + ".jsonl"), std::ios::binary) << t.trace;
      }
    } catch (const std::exception& e) {
      std::cerr << "webtree eval: " << e.what() << '\n';
      return 2;
    }
    return 0;
  }
  return 2;
}
