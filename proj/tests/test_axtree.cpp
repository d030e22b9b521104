#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "webtree/axtree.hpp"

using namespace webtree;

namespace {

const char* kRoles[] = {"button", "link", "textbox", "group", "StaticText", "listitem"};

AXTree random_tree(std::mt19937_64& rng, std::size_t max_nodes) {
  AXNode root;
  root.role = "RootWebArea";
  root.name = "Page";
  std::vector<NodePath> paths{{}};
  std::size_t n = 1 + rng() % max_nodes;
  for (std::size_t i = 1; i < n; ++i) {
    NodePath parent_path = paths[rng() % paths.size()];
    AXNode* parent = &root;
    for (auto step : parent_path) parent = &parent->children[step];
    AXNode child;
    child.role = kRoles[rng() % 6];
    child.name = "n" + std::to_string(i);
    if (rng() % 2) child.bid = std::to_string(100 + i);
    if (rng() % 4 == 0) child.attrs[AttrKey::disabled] = true;
    if (rng() % 5 == 0) child.attrs[AttrKey::value] = std::string("v'") + std::to_string(i);
    if (rng() % 6 == 0) child.attrs[AttrKey::url] = "/u" + std::to_string(i);
    parent->children.push_back(std::move(child));
    NodePath p = parent_path;
    p.push_back(parent->children.size() - 1);
    paths.push_back(p);
  }
  return AXTree(std::move(root));
}

AXNode& node_at(AXNode& root, const NodePath& path) {
  AXNode* n = &root;
  for (auto step : path) n = &n->children[step];
  return *n;
}

const char* kNineNodes =
    "RootWebArea 'Top'\n"
    "    [1] navigation 'Nav'\n"
    "        [2] link 'A'\n"
    "        [3] link 'B'\n"
    "    [4] main 'Main'\n"
    "        [5] form 'F'\n"
    "            [6] textbox 'Name'\n"
    "                StaticText 'hint'\n"
    "        [7] button 'Save'\n";

}  // namespace

TEST_SUITE("axtree") {

TEST_CASE("parse a two-node tree") {
  AXTree t = parse_axtree("RootWebArea 'Home'\n    [1] link 'About' url='http://s/a'\n");
  CHECK(t.root().name == "Home");
  REQUIRE(t.root().children.size() == 1);
  const AXNode& link = t.root().children[0];
  CHECK(link.bid == std::optional<std::string>("1"));
  CHECK(link.role == "link");
  CHECK(link.text_attr(AttrKey::url) == "http://s/a");
  CHECK(t.bid_index().size() == 1);
}

TEST_CASE("parse errors carry codes") {
  auto code_of = [](const char* text) {
    try {
      parse_axtree(text);
    } catch (const AxParseError& e) {
      return e.code();
    }
    FAIL("no error");
    return AxErrc::NoRoot;
  };
  CHECK(code_of("RootWebArea 'X'\n    [1] button 'Go'\n    [1] link 'Go'\n") == AxErrc::DuplicateBid);
  CHECK(code_of("RootWebArea 'X'\n        [1] button 'Go'\n") == AxErrc::BadIndent);
  CHECK(code_of("RootWebArea 'X'\n  [1] button 'Go'\n") == AxErrc::BadIndent);
  CHECK(code_of("button 'Go'\n") == AxErrc::NoRoot);
  CHECK(code_of("") == AxErrc::NoRoot);
  CHECK(code_of("RootWebArea 'X'\n    [1] button\n") == AxErrc::MalformedLine);
}

TEST_CASE("serialization is canonical") {
  AXTree single = parse_axtree("RootWebArea 'Home'");
  CHECK(serialize_axtree(single) == "RootWebArea 'Home'\n");

  AXNode root;
  root.role = "RootWebArea";
  root.name = "R";
  AXNode b;
  b.bid = "9";
  b.role = "button";
  b.name = "Go";
  b.attrs[AttrKey::disabled] = true;
  b.attrs[AttrKey::url] = "/x";
  root.children.push_back(b);
  CHECK(serialize_axtree(AXTree(root)) == "RootWebArea 'R'\n    [9] button 'Go' url='/x' disabled=True\n");
}

TEST_CASE("round trip on random trees") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 300; ++i) {
    AXTree t = random_tree(rng, 30);
    std::string text = serialize_axtree(t);
    AXTree back = parse_axtree(text);
    CHECK(back == t);
    CHECK(serialize_axtree(back) == text);
  }
}

TEST_CASE("find_node") {
  AXTree t = parse_axtree(kNineNodes);
  CHECK(find_node(t, "7")->name == "Save");
  CHECK_FALSE(find_node(t, "99"));
  AXTree listing = parse_axtree(
      "RootWebArea 'Projects \xc2\xb7 Dashboard'\n"
      "    [200] banner ''\n"
      "        [201] link 'Byte Blaze'\n");
  REQUIRE(find_node(listing, "201"));
  CHECK(find_node(listing, "201")->role == "link");
  CHECK(find_node(listing, "201")->name == "Byte Blaze");
}

TEST_CASE("node equivalence") {
  AXTree t = parse_axtree("RootWebArea 'R'\n    [1] button 'Submit'\n    [2] button 'Send'\n    [3] button 'Submit' disabled=True\n    [4] button ' Submit ' url='/z'\n    [5] button 'Submit' disabled=False\n");
  const auto& c = t.root().children;
  CHECK(node_equivalent(c[0], c[0]));
  CHECK_FALSE(node_equivalent(c[0], c[1]));
  CHECK_FALSE(node_equivalent(c[0], c[2]));
  CHECK(node_equivalent(c[0], c[3]));
  CHECK(node_equivalent(c[0], c[4]));
}

TEST_CASE("neighborhood of a leaf under the root") {
  AXTree t = parse_axtree("RootWebArea 'R'\n    [1] link 'a'\n        StaticText 'x'\n    [2] link 'b'\n    [3] link 'c'\n");
  Neighborhood h = neighborhood(t, "2");
  std::vector<NodePath> want{{}, {0}, {1}, {2}};
  CHECK(h.members == want);
  CHECK_THROWS_AS(neighborhood(t, "99"), NoSuchBid);
}

TEST_CASE("neighborhood on the nine-node fixture") {
  AXTree t = parse_axtree(kNineNodes);
  Neighborhood h = neighborhood(t, "6");
  // root, Nav, Main, F, Name, hint, Save; the links under Nav are cousins' children
  std::vector<NodePath> want{{}, {0}, {1}, {1, 0}, {1, 0, 0}, {1, 0, 0, 0}, {1, 1}};
  CHECK(h.members == want);
  CHECK_FALSE(h.contains({0, 0}));
  CHECK(neighborhood(t, "1").members.size() == 5);
}

TEST_CASE("neighborhood matches brute-force enumeration") {
  std::mt19937_64 rng(5);
  int checked = 0;
  for (int i = 0; i < 400; ++i) {
    AXTree t = random_tree(rng, 30);
    for (const auto& [bid, path] : t.bid_index()) {
      CHECK(neighborhood(t, bid).members == oracle::neighborhood(t, path));
      ++checked;
    }
  }
  CHECK(checked > 1000);
}

TEST_CASE("compare_observation examples") {
  AXTree t = parse_axtree(kNineNodes);
  CHECK(compare_observation(t, t, std::string_view("6")));
  CHECK(compare_observation(t, t, std::nullopt));

  AXTree missing = parse_axtree("RootWebArea 'Top'\n    [1] navigation 'Nav'\n");
  CHECK_FALSE(compare_observation(t, missing, std::string_view("6")));
  CHECK_THROWS_AS(compare_observation(missing, t, std::string_view("6")), NoSuchBid);

  AXNode root = t.root();
  node_at(root, {0, 0}).name = "renamed";  // child of a cousin
  CHECK(compare_observation(t, AXTree(root), std::string_view("6")));
  CHECK_FALSE(compare_observation(t, AXTree(root), std::nullopt));

  root = t.root();
  node_at(root, {1, 1}).name = "Store";  // sibling of the pivot's parent
  CHECK_FALSE(compare_observation(t, AXTree(root), std::string_view("6")));

  root = t.root();
  node_at(root, {1, 0, 0}).bid = "60";  // pivot bid drifted
  CHECK_FALSE(compare_observation(t, AXTree(root), std::string_view("6")));
}

TEST_CASE("compare_observation is reflexive and ignores mutations outside the neighborhood") {
  std::mt19937_64 rng(23);
  int outside = 0;
  int inside = 0;
  for (int i = 0; i < 300; ++i) {
    AXTree t = random_tree(rng, 30);
    for (const auto& [bid, path] : t.bid_index()) {
      CHECK(compare_observation(t, t, std::string_view(bid)));
      auto members = oracle::neighborhood(t, path);
      std::vector<NodePath> every;
      NodePath cur;
      oracle::all_paths(t.root(), cur, every);
      NodePath victim = every[rng() % every.size()];
      AXNode root = t.root();
      node_at(root, victim).name += " changed";
      bool in = std::find(members.begin(), members.end(), victim) != members.end();
      CHECK(compare_observation(t, AXTree(root), std::string_view(bid)) == !in);
      (in ? inside : outside)++;
    }
  }
  CHECK(outside > 50);
  CHECK(inside > 50);
}

}  // TEST_SUITE
