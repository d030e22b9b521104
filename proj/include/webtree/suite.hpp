#pragma once

// Task suites: loading, running each task with its own environment, and
// the aggregate report.

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "webtree/generator.hpp"
#include "webtree/reward.hpp"
#include "webtree/search.hpp"
#include "webtree/trace.hpp"

namespace webtree {

class SuiteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// "scripted:PATH" or "random"; PATH is relative to `base`.
std::unique_ptr<GenProvider> make_policy(std::string_view spec, const std::filesystem::path& base,
                                         std::uint64_t seed);
/// "scripted:PATH"
std::unique_ptr<RewardProvider> make_reward(std::string_view spec, const std::filesystem::path& base);

struct SuiteTask {
  std::string id;
  std::filesystem::path scenario;
  std::string task;
  std::string policy;
  std::string reward;
};

struct Suite {
  std::filesystem::path dir;
  std::vector<SuiteTask> tasks;
};

/// Reads `suite.json` from a directory (or the given file).
Suite load_suite(const std::filesystem::path& path);

struct TaskOutcome {
  std::string id;
  SearchResult result;
  std::string trace;  // JSONL
};

TaskOutcome run_suite_task(const Suite& suite, const SuiteTask& task, const SearchConfig& config);

inline constexpr std::size_t kHistogramBuckets = 6;  // 0..4, 5+
inline constexpr int kSweepBudgets[] = {5, 10, 15, 20};

struct SuiteReport {
  std::vector<TaskOutcome> tasks;  // sorted by id
  int solved = 0;
  double success_rate = 0.0;
  std::vector<int> backtrack_histogram = std::vector<int>(kHistogramBuckets, 0);
  int preflagged = 0;
  int confirmed = 0;
  double precision = 0.0;
  std::map<int, int> sweep;  // step budget -> solved
};

SuiteReport evaluate_suite(const Suite& suite, const SearchConfig& config, unsigned jobs = 1, bool sweep = false);

TraceJson report_json(const SuiteReport& report);
std::string report_table(const SuiteReport& report);

}  // namespace webtree
