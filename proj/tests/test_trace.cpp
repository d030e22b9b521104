#include <sstream>

#include "doctest.h"
#include "webtree/suite.hpp"
#include "webtree/trace.hpp"

using namespace webtree;

namespace {

const std::filesystem::path kData(WEBTREE_DATA_DIR);

std::shared_ptr<const Scenario> scenario_for(const Suite& suite, const SuiteTask& task) {
  return std::make_shared<const Scenario>(load_scenario(suite.dir / task.scenario));
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::string join(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

}  // namespace

TEST_SUITE("trace") {

TEST_CASE("reserved payload keys are rejected") {
  Trace t;
  t.emit("start", {{"task", "x"}});
  CHECK_THROWS(t.emit("bad", {{"seq", 4}}));
  CHECK_THROWS(t.emit("bad", {{"kind", "x"}}));
  REQUIRE(t.events().size() == 1);
  CHECK(t.events()[0]["seq"] == 0);
  CHECK(t.events()[0]["kind"] == "start");
  CHECK(t.jsonl() == "{\"seq\":0,\"kind\":\"start\",\"task\":\"x\"}\n");
}

TEST_CASE("tab state round trip") {
  TabState tab;
  tab.url = "/list";
  tab.window = 2;
  tab.overrides["5"][AttrKey::expanded] = true;
  tab.overrides["4"][AttrKey::value] = std::string("hi");
  tab.alerts = {"Saved"};
  tab.back = {"/home", "/a"};
  tab.forward = {"/b"};
  CHECK(tab_state_from_json(tab_state_json(tab)) == tab);
  CHECK(tab_state_from_json(tab_state_json(TabState{})) == TabState{});
}

TEST_CASE("runs are byte-identical") {
  Suite suite = load_suite(kData / "desk");
  for (const auto& task : suite.tasks) {
    CAPTURE(task.id);
    TaskOutcome a = run_suite_task(suite, task, SearchConfig{});
    TaskOutcome b = run_suite_task(suite, task, SearchConfig{});
    CHECK(a.trace == b.trace);
  }
}

TEST_CASE("every desk trace replays") {
  Suite suite = load_suite(kData / "desk");
  for (const auto& task : suite.tasks) {
    CAPTURE(task.id);
    TaskOutcome out = run_suite_task(suite, task, SearchConfig{});
    ReplayReport r = replay_trace(out.trace, scenario_for(suite, task));
    CHECK(r.status == ReplayStatus::match);
    CHECK(static_cast<int>(r.executes) == out.result.steps);
  }
}

TEST_CASE("edited and truncated traces are caught") {
  Suite suite = load_suite(kData / "desk");
  const SuiteTask& task = suite.tasks.at(4);
  TaskOutcome out = run_suite_task(suite, task, SearchConfig{});
  auto scenario = scenario_for(suite, task);

  auto lines = lines_of(out.trace);
  std::size_t at = 0;
  for (; at < lines.size(); ++at) {
    if (TraceJson::parse(lines[at])["kind"] == "execute") break;
  }
  REQUIRE(at < lines.size());
  TraceJson ev = TraceJson::parse(lines[at]);
  ev["obs_digest"] = "0000000000000000";
  auto edited = lines;
  edited[at] = ev.dump();
  ReplayReport r = replay_trace(join(edited), scenario);
  CHECK(r.status == ReplayStatus::divergence);
  CHECK(r.seq == static_cast<std::int64_t>(at));

  std::string cut = out.trace.substr(0, out.trace.size() / 2);
  CHECK(replay_trace(cut, scenario).status == ReplayStatus::malformed);
  CHECK(replay_trace("not json\n", scenario).status == ReplayStatus::malformed);
  CHECK(replay_trace("", scenario).status == ReplayStatus::malformed);
}

TEST_CASE("suite report") {
  Suite suite = load_suite(kData / "desk");
  SuiteReport rep = evaluate_suite(suite, SearchConfig{}, 2, false);
  CHECK(rep.tasks.size() == suite.tasks.size());
  int total = 0;
  for (int c : rep.backtrack_histogram) total += c;
  CHECK(total == static_cast<int>(suite.tasks.size()));
  CHECK(rep.success_rate == doctest::Approx(static_cast<double>(rep.solved) / suite.tasks.size()));
  CHECK(std::is_sorted(rep.tasks.begin(), rep.tasks.end(),
                       [](const TaskOutcome& a, const TaskOutcome& b) { return a.id < b.id; }));
  TraceJson j = report_json(rep);
  CHECK(j["solved"] == rep.solved);
  CHECK_FALSE(report_table(rep).empty());

  SuiteReport serial = evaluate_suite(suite, SearchConfig{}, 1, false);
  for (std::size_t i = 0; i < rep.tasks.size(); ++i) CHECK(serial.tasks[i].trace == rep.tasks[i].trace);
}

}  // TEST_SUITE
