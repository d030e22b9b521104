#include <random>

#include "doctest.h"
#include "webtree/reward.hpp"

using namespace webtree;

namespace {

RewardErrc reward_code(std::string_view table) {
  try {
    parse_scripted_provider(table);
  } catch (const RewardError& e) {
    return e.code();
  }
  FAIL("table accepted");
  return RewardErrc::ParseError;
}

ChecklistProbs random_probs(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ChecklistProbs p;
  std::size_t k = 1 + rng() % 6;
  for (std::size_t i = 0; i < k; ++i) {
    double yes = u(rng);
    double progress = u(rng) * (1.0 - yes);
    p.push_back({yes, progress});
  }
  return p;
}

}  // namespace

TEST_SUITE("reward") {

TEST_CASE("checklist combination by hand") {
  ChecklistProbs a{{1, 0}, {0, 1}, {0, 0}};
  CHECK(combine_checklist(a) == doctest::Approx(0.5).epsilon(1e-9));
  ChecklistProbs b{{1, 0}};
  CHECK(combine_checklist(b) == 1.0);
  ChecklistProbs c{{0.6, 0.2}, {0.4, 0.4}};
  CHECK(std::abs(combine_checklist(c) - 0.65) < 1e-9);
}

TEST_CASE("checklist errors") {
  ChecklistProbs empty;
  CHECK_THROWS_AS(combine_checklist(empty), RewardError);
  ChecklistProbs over{{0.8, 0.4}};
  CHECK_THROWS_AS(combine_checklist(over), RewardError);
  ChecklistProbs negative{{-0.1, 0.4}};
  CHECK_THROWS_AS(combine_checklist(negative), RewardError);
}

TEST_CASE("checklist properties") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    ChecklistProbs p = random_probs(rng);
    double r = combine_checklist(p);
    CHECK(r >= 0.0);
    CHECK(r <= 1.0);

    // raise one p_yes within the item's remaining mass
    ChecklistProbs q = p;
    auto& item = q[rng() % q.size()];
    item.first += u(rng) * (1.0 - item.first - item.second);
    CHECK(combine_checklist(q) >= r);

    ChecklistProbs doubled = p;
    doubled.insert(doubled.end(), p.begin(), p.end());
    CHECK(combine_checklist(doubled) == doctest::Approx(r).epsilon(1e-12));
  }
  ChecklistProbs all_yes{{1, 0}, {1, 0}};
  CHECK(combine_checklist(all_yes) == 1.0);
  ChecklistProbs almost{{1, 0}, {0.999, 0.001}};
  CHECK(combine_checklist(almost) < 1.0);
}

TEST_CASE("scripted provider lookups") {
  AXTree obs = parse_axtree("RootWebArea 'Shop'\n    [5] searchbox 'Search'\n    [6] button 'Go'\n");
  std::vector<WebAction> none;
  WebAction click = WebAction::click("5");
  std::string key = trajectory_digest("find it", none, obs) + " " + click.to_string();
  std::string table = R"({"default": [[0, 1]], ")" + key + R"js(": [[1, 0]],
    "rules": [{"url": "/shop", "contains": "'Go'", "action": "fill('5', 'blue kettle')", "probs": [[0.5, 0.5]]},
              {"url": "/shop", "lacks": "'Go'", "probs": [[0, 0]]}]})js";
  auto provider = parse_scripted_provider(table);
  std::vector<WebAction> candidates{click, WebAction::click("6"), WebAction::fill("5", "blue kettle")};
  auto rewards = score_candidates(*provider, "find it", none, obs, "/shop", candidates);
  REQUIRE(rewards.size() == 3);
  CHECK(rewards[0] == 1.0);
  CHECK(rewards[1] == 0.5);
  CHECK(rewards[2] == 0.75);
  CHECK(score_candidates(*provider, "find it", none, obs, "/shop", candidates) == rewards);

  AXTree bare = parse_axtree("RootWebArea 'Shop'\n");
  auto lacking = score_candidates(*provider, "find it", none, bare, "/shop", std::span(candidates).subspan(1, 1));
  CHECK(lacking[0] == 0.0);
}

TEST_CASE("trajectory digest depends on every input") {
  AXTree a = parse_axtree("RootWebArea 'A'\n");
  AXTree b = parse_axtree("RootWebArea 'B'\n");
  std::vector<WebAction> none;
  std::vector<WebAction> one{WebAction::click("1")};
  std::string base = trajectory_digest("g", none, a);
  CHECK(base.size() == 16);
  CHECK(trajectory_digest("g", none, a) == base);
  CHECK(trajectory_digest("h", none, a) != base);
  CHECK(trajectory_digest("g", one, a) != base);
  CHECK(trajectory_digest("g", none, b) != base);
}

TEST_CASE("table errors") {
  CHECK(reward_code(R"({"x": [[1, 0]]})") == RewardErrc::MissingDefault);
  CHECK(reward_code("not json") == RewardErrc::ParseError);
  CHECK(reward_code(R"({"default": []})") == RewardErrc::ParseError);
  CHECK(reward_code(R"({"default": [[0.9, 0.9]]})") == RewardErrc::BadProbability);
  CHECK(reward_code(R"({"default": [[1, 0]], "rules": [{"url": "/a"}]})") == RewardErrc::ParseError);
  CHECK(reward_code(R"({"default": [[1, 0]], "rules": [{"action": "click(", "probs": [[1, 0]]}]})") ==
        RewardErrc::ParseError);
  CHECK_THROWS_AS(make_scripted_provider("/nonexistent/reward.json"), RewardError);
}

}  // TEST_SUITE
