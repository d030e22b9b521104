#include "webtree/axtree.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>
#include <utility>

namespace webtree {

namespace {

constexpr std::array<std::pair<AttrKey, std::string_view>, 9> kAttrNames{{
    {AttrKey::url, "url"},
    {AttrKey::value, "value"},
    {AttrKey::expanded, "expanded"},
    {AttrKey::disabled, "disabled"},
    {AttrKey::readonly, "readonly"},
    {AttrKey::checked, "checked"},
    {AttrKey::focused, "focused"},
    {AttrKey::hasPopup, "hasPopup"},
    {AttrKey::pressed, "pressed"},
}};

constexpr std::size_t kIndent = 4;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '-';
}

class LineParser {
 public:
  LineParser(std::string_view text, std::size_t line_no) : s_(text), line_(line_no) {}

  AXNode parse() {
    AXNode node;
    if (peek() == '[') {
      ++pos_;
      std::size_t start = pos_;
      while (pos_ < s_.size() && s_[pos_] != ']') {
        if (!std::isalnum(static_cast<unsigned char>(s_[pos_]))) fail("bid must be alphanumeric");
        ++pos_;
      }
      if (pos_ >= s_.size() || pos_ == start) fail("unterminated or empty bid");
      node.bid = std::string(s_.substr(start, pos_ - start));
      ++pos_;
      if (peek() != ' ') fail("expected space after bid");
      skip_spaces();
    }
    if (!is_ident_start(peek())) fail("expected role");
    node.role = ident();

    if (peek() != ' ') fail("expected name after role");
    skip_spaces();
    if (peek() != '\'' && peek() != '"') fail("expected quoted name");
    node.name = quoted();
    while (true) {
      bool had_sep = skip_separators();
      if (at_end()) break;
      if (!had_sep) fail("expected separator");
      parse_attr(node);
    }
    return node;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw AxParseError(AxErrc::MalformedLine, line_, why);
  }

  bool at_end() const { return pos_ >= s_.size(); }
  char peek() const { return at_end() ? '\0' : s_[pos_]; }

  void skip_spaces() {
    while (!at_end() && s_[pos_] == ' ') ++pos_;
  }

  bool skip_separators() {
    std::size_t start = pos_;
    while (!at_end() && (s_[pos_] == ' ' || s_[pos_] == ',')) ++pos_;
    return pos_ != start;
  }

  std::string ident() {
    std::size_t start = pos_;
    while (!at_end() && is_ident_char(s_[pos_])) ++pos_;
    return std::string(s_.substr(start, pos_ - start));
  }

  std::string quoted() {
    char q = s_[pos_++];
    std::string out;
    while (true) {
      if (at_end()) fail("unterminated quoted text");
      char c = s_[pos_++];
      if (c == q) break;
      if (c == '\\') {
        if (at_end()) fail("dangling escape");
        char e = s_[pos_++];
        out.push_back(e == 'n' ? '\n' : e);
      } else {
        out.push_back(c);
      }
    }
    return out;
  }

  void parse_attr(AXNode& node) {
    if (!is_ident_start(peek())) fail("expected attribute");
    std::string name = ident();
    auto key = attr_key_from_name(name);
    if (!key) fail("unknown attribute '" + name + "'");
    AttrValue value = true;
    if (peek() == '=') {
      ++pos_;
      char c = peek();
      if (c == '\'' || c == '"') {
        value = quoted();
      } else {
        std::string lit = ident();
        if (lit == "True") value = true;
        else if (lit == "False") value = false;
        else fail("bad literal for attribute '" + name + "'");
      }
    }
    if (node.attrs.count(*key) != 0) fail("repeated attribute '" + name + "'");
    node.attrs.emplace(*key, std::move(value));
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  std::size_t line_;
};

void serialize_node(const AXNode& node, std::size_t depth, std::string& out) {
  out.append(depth * kIndent, ' ');
  if (node.bid) {
    out += '[';
    out += *node.bid;
    out += "] ";
  }
  out += node.role;
  out += ' ';
  out += quote_ax_text(node.name);
  for (const auto& [key, value] : node.attrs) {
    out += ' ';
    out += attr_key_name(key);
    out += '=';
    if (const bool* b = std::get_if<bool>(&value)) {
      out += *b ? "True" : "False";
    } else {
      out += quote_ax_text(std::get<std::string>(value));
    }
  }
  out += '\n';
  for (const auto& child : node.children) serialize_node(child, depth + 1, out);
}

void index_node(const AXNode& node, NodePath& path, std::map<std::string, NodePath, std::less<>>& index) {
  if (node.bid) {
    if (!index.emplace(*node.bid, path).second) {
      throw AxParseError(AxErrc::DuplicateBid, 0, "duplicate bid '" + *node.bid + "'");
    }
  }
  for (std::size_t i = 0; i < node.children.size(); ++i) {
    path.push_back(i);
    index_node(node.children[i], path, index);
    path.pop_back();
  }
}

std::size_t count_nodes(const AXNode& node) {
  std::size_t n = 1;
  for (const auto& c : node.children) n += count_nodes(c);
  return n;
}

void collect_subtree(const AXNode& node, NodePath& path, std::vector<NodePath>& out) {
  out.push_back(path);
  for (std::size_t i = 0; i < node.children.size(); ++i) {
    path.push_back(i);
    collect_subtree(node.children[i], path, out);
    path.pop_back();
  }
}

// Every node of `expected` must have a positional counterpart in `actual`.
bool subtree_equivalent(const AXNode& expected, const AXNode& actual) {
  if (!node_equivalent(expected, actual)) return false;
  if (actual.children.size() < expected.children.size()) return false;
  for (std::size_t i = 0; i < expected.children.size(); ++i) {
    if (!subtree_equivalent(expected.children[i], actual.children[i])) return false;
  }
  return true;
}

}  // namespace

std::string_view attr_key_name(AttrKey key) {
  for (const auto& [k, name] : kAttrNames) {
    if (k == key) return name;
  }
  return "?";
}

std::optional<AttrKey> attr_key_from_name(std::string_view name) {
  for (const auto& [k, n] : kAttrNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

const AttrValue* AXNode::attr(AttrKey key) const {
  auto it = attrs.find(key);
  return it == attrs.end() ? nullptr : &it->second;
}

bool AXNode::flag(AttrKey key) const {
  const AttrValue* v = attr(key);
  if (v == nullptr) return false;
  if (const bool* b = std::get_if<bool>(v)) return *b;
  const auto& s = std::get<std::string>(*v);
  return !s.empty() && s != "false" && s != "False";
}

std::string AXNode::text_attr(AttrKey key) const {
  const AttrValue* v = attr(key);
  if (v == nullptr) return {};
  if (const bool* b = std::get_if<bool>(v)) return *b ? "True" : "False";
  return std::get<std::string>(*v);
}

AxParseError::AxParseError(AxErrc code, std::size_t line, const std::string& what)
    : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
      code_(code),
      line_(line) {}

AXTree::AXTree() { root_.role = "RootWebArea"; }

AXTree::AXTree(AXNode root) : root_(std::move(root)) {
  if (root_.role != "RootWebArea") {
    throw AxParseError(AxErrc::NoRoot, 0, "root role must be RootWebArea, got '" + root_.role + "'");
  }
  NodePath path;
  index_node(root_, path, index_);
}

const AXNode* AXTree::find(std::string_view bid) const {
  const NodePath* p = path_of(bid);
  return p == nullptr ? nullptr : &at(*p);
}

const NodePath* AXTree::path_of(std::string_view bid) const {
  auto it = index_.find(bid);
  return it == index_.end() ? nullptr : &it->second;
}

const AXNode& AXTree::at(const NodePath& path) const {
  const AXNode* node = &root_;
  for (std::size_t i : path) node = &node->children.at(i);
  return *node;
}

std::size_t AXTree::node_count() const { return count_nodes(root_); }

std::string quote_ax_text(std::string_view text) {
  std::string out;
  out.reserve(text.size() + 2);
  out += '\'';
  for (char c : text) {
    if (c == '\\' || c == '\'') {
      out += '\\';
      out += c;
    } else if (c == '\n') {
      out += "\\n";
    } else {
      out += c;
    }
  }
  out += '\'';
  return out;
}

AXTree parse_axtree(std::string_view text) {
  AXNode root;
  bool have_root = false;
  std::vector<AXNode*> stack;  // stack[d] is the open node at depth d
  std::set<std::string, std::less<>> bids;
  std::size_t line_no = 0;

  while (!text.empty()) {
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) continue;

    std::size_t spaces = 0;
    while (spaces < line.size() && line[spaces] == ' ') ++spaces;
    if (spaces < line.size() && line[spaces] == '\t') {
      throw AxParseError(AxErrc::BadIndent, line_no, "tab indentation");
    }
    if (spaces % kIndent != 0) {
      throw AxParseError(AxErrc::BadIndent, line_no, "indent is not a multiple of 4");
    }
    std::size_t depth = spaces / kIndent;
    AXNode node = LineParser(line.substr(spaces), line_no).parse();

    if (!have_root) {
      if (depth != 0 || node.role != "RootWebArea") {
        throw AxParseError(AxErrc::NoRoot, line_no, "first node must be a top-level RootWebArea");
      }
    } else if (depth == 0) {
      throw AxParseError(AxErrc::BadIndent, line_no, "second top-level node");
    } else if (depth > stack.size()) {
      throw AxParseError(AxErrc::BadIndent, line_no, "depth jumps by more than one level");
    }
    if (node.bid && !bids.insert(*node.bid).second) {
      throw AxParseError(AxErrc::DuplicateBid, line_no, "duplicate bid '" + *node.bid + "'");
    }

    if (!have_root) {
      root = std::move(node);
      stack.push_back(&root);
      have_root = true;
      continue;
    }
    stack.resize(depth);
    AXNode* parent = stack.back();
    parent->children.push_back(std::move(node));
    stack.push_back(&parent->children.back());
  }
  if (!have_root) throw AxParseError(AxErrc::NoRoot, 0, "empty accessibility tree");
  return AXTree(std::move(root));
}

std::string serialize_axtree(const AXTree& tree) {
  std::string out;
  serialize_node(tree.root(), 0, out);
  return out;
}

std::optional<AXNode> find_node(const AXTree& tree, std::string_view bid) {
  const AXNode* n = tree.find(bid);
  if (n == nullptr) return std::nullopt;
  return *n;
}

bool node_equivalent(const AXNode& a, const AXNode& b) {
  if (a.role != b.role) return false;
  if (trim(a.name) != trim(b.name)) return false;
  if (a.text_attr(AttrKey::value) != b.text_attr(AttrKey::value)) return false;
  for (AttrKey k : {AttrKey::disabled, AttrKey::checked, AttrKey::readonly, AttrKey::expanded,
                    AttrKey::pressed}) {
    if (a.flag(k) != b.flag(k)) return false;
  }
  return true;
}

bool Neighborhood::contains(const NodePath& path) const {
  return std::binary_search(members.begin(), members.end(), path);
}

Neighborhood neighborhood(const AXTree& tree, std::string_view pivotal_bid) {
  const NodePath* pivotal = tree.path_of(pivotal_bid);
  if (pivotal == nullptr) throw NoSuchBid(std::string(pivotal_bid));

  Neighborhood hood;
  hood.pivotal = *pivotal;
  NodePath path;
  const AXNode* node = &tree.root();
  for (std::size_t step : *pivotal) {
    hood.members.push_back(path);
    for (std::size_t i = 0; i < node->children.size(); ++i) {
      if (i == step) continue;
      path.push_back(i);
      hood.members.push_back(path);
      path.pop_back();
    }
    path.push_back(step);
    node = &node->children[step];
  }
  collect_subtree(*node, path, hood.members);
  std::sort(hood.members.begin(), hood.members.end());
  return hood;
}

bool compare_observation(const AXTree& expected, const AXTree& actual,
                         std::optional<std::string_view> pivotal_bid) {
  if (!pivotal_bid) return subtree_equivalent(expected.root(), actual.root());

  const NodePath* expected_path = expected.path_of(*pivotal_bid);
  if (expected_path == nullptr) throw NoSuchBid(std::string(*pivotal_bid));
  const NodePath* actual_path = actual.path_of(*pivotal_bid);
  if (actual_path == nullptr) return false;
  if (!node_equivalent(expected.at(*expected_path), actual.at(*actual_path))) return false;
  // Positional correspondence requires the pivotal node to sit at the same
  // place once ancestors are aligned top-down.
  if (*expected_path != *actual_path) return false;

  const AXNode* e = &expected.root();
  const AXNode* a = &actual.root();
  for (std::size_t step : *expected_path) {
    if (!node_equivalent(*e, *a)) return false;
    if (a->children.size() < e->children.size()) return false;
    for (std::size_t i = 0; i < e->children.size(); ++i) {
      if (i != step && !node_equivalent(e->children[i], a->children[i])) return false;
    }
    e = &e->children[step];
    a = &a->children[step];
  }
  return subtree_equivalent(*e, *a);
}

}  // namespace webtree
