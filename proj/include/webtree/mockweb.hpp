#pragma once

// Deterministic simulated web environment. Persistent state is the scenario
// store; temporary state lives per tab (url, scroll window, attribute
// overrides, alerts, history). Observations are rendered from page templates.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "webtree/actions.hpp"
#include "webtree/axtree.hpp"

namespace webtree {

/// Root-level children visible at once on long pages, and the scroll stride.
inline constexpr std::size_t kViewportWindow = 8;
inline constexpr std::size_t kScrollStride = 4;

enum class EffectKind { navigate, store_set, temp_set, alert, open_tab, close_tab, request, error };

std::string_view effect_kind_name(EffectKind kind);

struct Effect {
  EffectKind kind = EffectKind::navigate;
  std::string url;      // navigate, open_tab, request
  std::string key;      // store_set
  std::string value;    // store_set (may contain {{input}}, {{field.BID}}), temp_set
  std::string bid;      // temp_set
  AttrKey attr = AttrKey::value;  // temp_set
  std::string message;  // alert, error
  HttpMethod method = HttpMethod::GET;  // request
};

/// Per element, effect lists keyed by trigger: click, fill, submit, select_option.
using ElementEffects = std::map<std::string, std::map<std::string, std::vector<Effect>>>;

struct PageSpec {
  std::string url;
  std::string axtree_template;
  bool long_page = false;
  ElementEffects elements;

  /// Pages drawing a {{nonce}} are not refresh-stable.
  bool is_volatile() const;
};

struct SuccessCriterion {
  enum class Kind { store_equals, answer_equals, url_is };
  Kind kind = Kind::answer_equals;
  std::string key;
  std::string value;
};

struct ExampleStep {
  std::string goal;
  std::string thought;
  std::string action;
};

struct TaskSpec {
  std::string id;
  std::string goal;
  std::optional<std::string> rephrased_goal;
  std::vector<ExampleStep> examples;
  SuccessCriterion success;
};

struct Scenario {
  std::string name;
  std::string start_url;
  bool authenticated = true;
  std::vector<PageSpec> pages;
  std::map<std::string, std::string> store;
  std::vector<TaskSpec> tasks;
  std::set<std::string> external_urls;
  std::map<std::string, std::size_t, std::less<>> url_index;

  const PageSpec* page(std::string_view url) const;
  const TaskSpec* task(std::string_view id) const;
};

enum class ScenarioErrc { ParseError, MissingStartUrl, DuplicatePageUrl, DanglingBid, DanglingUrl };

class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(ScenarioErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ScenarioErrc code() const noexcept { return code_; }

 private:
  ScenarioErrc code_;
};

class NoSuchTask : public std::runtime_error {
 public:
  explicit NoSuchTask(const std::string& id) : std::runtime_error("no such task '" + id + "'") {}
};

/// Raised for actions the environment cannot perform. The message is the
/// recovery feedback shown to action generators.
class ExecutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ForkInForkError : public std::logic_error {
 public:
  ForkInForkError() : std::logic_error("speculative forks cannot be nested") {}
};

Scenario parse_scenario(std::string_view json_text);
Scenario load_scenario(const std::filesystem::path& path);

/// Restorable temporary state of one tab.
struct TabState {
  std::string url;
  std::size_t window = 0;
  std::map<std::string, std::map<AttrKey, AttrValue>> overrides;
  std::vector<std::string> alerts;
  std::vector<std::string> back;
  std::vector<std::string> forward;

  friend bool operator==(const TabState&, const TabState&) = default;
};

struct StepOutcome {
  AXTree observation;
  std::vector<NetworkRequest> network;
};

/// Handle for an open speculative fork. Owned by the caller until passed to
/// commit_fork or abort_fork.
struct SpecContext {
  std::size_t first_tab = 0;
  std::size_t original_active = 0;
  std::mt19937_64 rng_at_fork;
  bool open = false;
};

class Environment {
 public:
  Environment(std::shared_ptr<const Scenario> scenario, const TaskSpec& task, std::uint64_t seed);

  const Scenario& scenario() const noexcept { return *scenario_; }
  const TaskSpec& task() const noexcept { return task_; }
  std::uint64_t seed() const noexcept { return seed_; }

  const AXTree& observation() const { return tabs_[active_].render; }
  const std::string& url() const { return tabs_[active_].state.url; }
  const std::map<std::string, std::string>& store() const noexcept { return store_; }
  std::size_t tab_count() const noexcept { return tabs_.size(); }
  std::size_t active_tab() const noexcept { return active_; }
  std::vector<TabState> tab_states() const;
  bool page_long() const;
  bool can_go_back() const { return !tabs_[active_].state.back.empty(); }
  bool url_exists(std::string_view url) const { return scenario_->page(url) != nullptr; }
  /// Network log of the most recent execute (or reset).
  const std::vector<NetworkRequest>& last_network() const noexcept { return last_network_; }

  StepOutcome execute(const WebAction& action);
  /// Reloads the active tab from (url, store): temporary state is dropped and
  /// volatile pages draw a fresh nonce.
  AXTree refresh();

  /// Opens one fork tab per entry after the existing tabs, restores the given
  /// temporary state into each, and focuses fork tab `active`.
  SpecContext fork_tabs(std::span<const TabState> tabs, std::size_t active = 0);
  SpecContext fork_urls(std::span<const std::string> urls);
  /// Closes the pre-fork tabs; fork tabs become 0..N-1.
  void commit_fork(SpecContext& ctx);
  /// Closes the fork tabs and restores the original active tab and the
  /// nonce stream. Persistent mutations made inside the fork are kept.
  void abort_fork(SpecContext& ctx);
  bool in_fork() const noexcept { return fork_.has_value(); }
  /// Non-GET requests issued while a fork was open.
  std::size_t fork_mutating_requests() const noexcept { return fork_mutating_requests_; }

 private:
  struct Tab {
    TabState state;
    AXTree render;
  };

  AXTree render(const TabState& tab);
  void navigate(Tab& tab, const std::string& url);
  void open_tab(const std::string& url);
  void close_active_tab();
  std::size_t lowest_tab() const;
  void fire(const std::vector<Effect>& effects, const std::string& input, bool& dirty);
  const std::vector<Effect>* effects_for(const std::string& bid, const std::string& trigger) const;
  const AXNode& require_element(std::string_view bid) const;
  std::string field_value(const std::string& bid) const;
  void log(HttpMethod method, std::string url);

  std::shared_ptr<const Scenario> scenario_;
  TaskSpec task_;
  std::uint64_t seed_;
  std::map<std::string, std::string> store_;
  std::vector<Tab> tabs_;
  std::size_t active_ = 0;
  std::mt19937_64 rng_;
  std::vector<NetworkRequest> last_network_;
  std::optional<std::size_t> fork_;  // first fork tab while a fork is open
  std::size_t fork_mutating_requests_ = 0;
};

std::pair<Environment, AXTree> reset(std::shared_ptr<const Scenario> scenario, std::string_view task_id,
                                     std::uint64_t seed);

bool evaluate_task(const Environment& env, const TaskSpec& task, const std::optional<std::string>& stop_answer);

}  // namespace webtree
