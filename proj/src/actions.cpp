#include "webtree/actions.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <numeric>
#include <variant>

namespace webtree {

namespace {

constexpr std::array<std::pair<ActionKind, std::string_view>, 13> kKindNames{{
    {ActionKind::click, "click"},
    {ActionKind::fill, "fill"},
    {ActionKind::select_option, "select_option"},
    {ActionKind::scroll, "scroll"},
    {ActionKind::goto_url, "goto"},
    {ActionKind::new_tab, "new_tab"},
    {ActionKind::tab_focus, "tab_focus"},
    {ActionKind::tab_close, "tab_close"},
    {ActionKind::go_back, "go_back"},
    {ActionKind::go_forward, "go_forward"},
    {ActionKind::press, "press"},
    {ActionKind::stop, "stop"},
    {ActionKind::noop, "noop"},
}};

// Button labels that indicate navigation or a transient view change.
constexpr std::array<std::string_view, 4> kTransientLabels{"back", "search", "refresh", "export"};

bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_'; }

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string quote(std::string_view s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\\' || c == '\'') out += '\\';
    out += c;
  }
  out += '\'';
  return out;
}

struct Literal {
  std::variant<std::string, long long, bool> value;
};

class CallParser {
 public:
  explicit CallParser(std::string_view s) : s_(s) {}

  std::pair<std::string, std::vector<Literal>> parse() {
    skip_ws();
    std::size_t start = pos_;
    while (!at_end() && is_ident_char(s_[pos_])) ++pos_;
    if (pos_ == start) throw ActionParseError(ActionErrc::Syntax, "expected action name");
    std::string name(s_.substr(start, pos_ - start));
    skip_ws();
    if (peek() != '(') throw ActionParseError(ActionErrc::Syntax, "expected '(' after " + name);
    ++pos_;
    std::vector<Literal> args;
    skip_ws();
    if (peek() == ')') {
      ++pos_;
    } else {
      while (true) {
        skip_ws();
        args.push_back(literal());
        skip_ws();
        if (peek() == ',') {
          ++pos_;
          continue;
        }
        if (peek() == ')') {
          ++pos_;
          break;
        }
        throw ActionParseError(ActionErrc::Syntax, "expected ',' or ')' in arguments");
      }
    }
    skip_ws();
    if (!at_end()) {
      std::size_t p = pos_;
      while (p < s_.size() && is_ident_char(s_[p])) ++p;
      while (p < s_.size() && std::isspace(static_cast<unsigned char>(s_[p]))) ++p;
      if (p > pos_ && p < s_.size() && s_[p] == '(') {
        throw ActionParseError(ActionErrc::MultipleActions, "only one action may be issued");
      }
      throw ActionParseError(ActionErrc::Syntax, "unexpected text after action");
    }
    return {std::move(name), std::move(args)};
  }

 private:
  bool at_end() const { return pos_ >= s_.size(); }
  char peek() const { return at_end() ? '\0' : s_[pos_]; }
  void skip_ws() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  Literal literal() {
    char c = peek();
    if (c == '\'' || c == '"') {
      ++pos_;
      std::string out;
      while (true) {
        if (at_end()) throw ActionParseError(ActionErrc::BadLiteral, "unterminated string");
        char ch = s_[pos_++];
        if (ch == c) break;
        if (ch == '\\') {
          if (at_end()) throw ActionParseError(ActionErrc::BadLiteral, "dangling escape");
          char e = s_[pos_++];
          out += e == 'n' ? '\n' : e == 't' ? '\t' : e;
        } else {
          out += ch;
        }
      }
      return {out};
    }
    if (c == '-' || std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t start = pos_++;
      while (!at_end() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      std::string digits(s_.substr(start, pos_ - start));
      if (digits == "-") throw ActionParseError(ActionErrc::BadLiteral, "bad integer");
      if (!at_end() && is_ident_char(s_[pos_])) throw ActionParseError(ActionErrc::BadLiteral, "bad integer");
      try {
        return {std::stoll(digits)};
      } catch (const std::exception&) {
        throw ActionParseError(ActionErrc::BadLiteral, "integer out of range");
      }
    }
    std::size_t start = pos_;
    while (!at_end() && (is_ident_char(s_[pos_]) || s_[pos_] == '.')) ++pos_;
    std::string_view word = s_.substr(start, pos_ - start);
    if (word == "True") return {true};
    if (word == "False") return {false};
    if (word.empty()) throw ActionParseError(ActionErrc::Syntax, "expected argument");
    throw ActionParseError(ActionErrc::BadLiteral, "bad literal '" + std::string(word) + "'");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

const std::string& want_str(const Literal& lit, std::string_view what) {
  if (const auto* s = std::get_if<std::string>(&lit.value)) return *s;
  throw ActionParseError(ActionErrc::BadLiteral, std::string(what) + " must be a quoted string");
}

bool want_bool(const Literal& lit, std::string_view what) {
  if (const auto* b = std::get_if<bool>(&lit.value)) return *b;
  throw ActionParseError(ActionErrc::BadLiteral, std::string(what) + " must be True or False");
}

long long want_int(const Literal& lit, std::string_view what) {
  if (const auto* i = std::get_if<long long>(&lit.value)) return *i;
  throw ActionParseError(ActionErrc::BadLiteral, std::string(what) + " must be an integer");
}

void want_arity(std::string_view name, std::size_t got, std::size_t lo, std::size_t hi) {
  if (got < lo || got > hi) {
    std::string expect = lo == hi ? std::to_string(lo) : std::to_string(lo) + "-" + std::to_string(hi);
    throw ActionParseError(ActionErrc::ArityMismatch, std::string(name) + " takes " + expect +
                                                          " argument(s), got " + std::to_string(got));
  }
}

// Locates call expressions `name(...)` outside quotes, by start position.
// Calls nested in an earlier span are listed too.
std::vector<std::string_view> find_calls(std::string_view s) {
  std::vector<std::string_view> calls;
  std::size_t i = 0;
  char quote_char = 0;
  while (i < s.size()) {
    char c = s[i];
    if (quote_char != 0) {
      if (c == '\\') ++i;
      else if (c == quote_char) quote_char = 0;
      ++i;
      continue;
    }
    if (c == '\'' || c == '"') {
      quote_char = c;
      ++i;
      continue;
    }
    bool boundary = i == 0 || !is_ident_char(s[i - 1]);
    if (!boundary || !std::isalpha(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    std::size_t start = i;
    std::size_t j = i;
    while (j < s.size() && is_ident_char(s[j])) ++j;
    std::size_t k = j;
    while (k < s.size() && s[k] == ' ') ++k;
    if (k >= s.size() || s[k] != '(') {
      i = j;
      continue;
    }
    int depth = 0;
    char q = 0;
    std::size_t end = std::string_view::npos;
    for (std::size_t p = k; p < s.size(); ++p) {
      char ch = s[p];
      if (q != 0) {
        if (ch == '\\') ++p;
        else if (ch == q) q = 0;
        continue;
      }
      if (ch == '\'' || ch == '"') q = ch;
      else if (ch == '(') ++depth;
      else if (ch == ')' && --depth == 0) {
        end = p + 1;
        break;
      }
    }
    if (end != std::string_view::npos) calls.push_back(s.substr(start, end - start));
    i = j;
  }
  return calls;
}

std::string fix_booleans(std::string_view call) {
  std::string out;
  out.reserve(call.size());
  char q = 0;
  for (std::size_t i = 0; i < call.size(); ++i) {
    char c = call[i];
    if (q != 0) {
      out += c;
      if (c == '\\' && i + 1 < call.size()) out += call[++i];
      else if (c == q) q = 0;
      continue;
    }
    if (c == '\'' || c == '"') {
      q = c;
      out += c;
      continue;
    }
    bool boundary = i == 0 || !is_ident_char(call[i - 1]);
    if (boundary) {
      for (std::string_view word : {std::string_view("true"), std::string_view("false")}) {
        if (call.substr(i, word.size()) == word &&
            (i + word.size() == call.size() || !is_ident_char(call[i + word.size()]))) {
          out += static_cast<char>(std::toupper(static_cast<unsigned char>(word[0])));
          out += word.substr(1);
          i += word.size() - 1;
          goto next;
        }
      }
    }
    out += c;
  next:;
  }
  return out;
}

std::string merge_key(const WebAction& a) {
  if (a.kind == ActionKind::stop) return "stop";
  if (a.kind == ActionKind::fill) {
    return "fill\x1f" + a.bid + "\x1f" + normalize_fill_text(a.text) + "\x1f" + (a.press_enter ? "1" : "0");
  }
  return a.to_string();
}

}  // namespace

std::string_view action_kind_name(ActionKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "?";
}

std::optional<ActionKind> action_kind_from_name(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

std::string_view action_class_name(ActionClass c) {
  switch (c) {
    case ActionClass::terminating: return "terminating";
    case ActionClass::destructive: return "destructive";
    case ActionClass::safe: return "safe";
  }
  return "?";
}

WebAction WebAction::click(std::string bid) { return {ActionKind::click, std::move(bid), {}, false, 0}; }
WebAction WebAction::fill(std::string bid, std::string value, bool press_enter) {
  return {ActionKind::fill, std::move(bid), std::move(value), press_enter, 0};
}
WebAction WebAction::select_option(std::string bid, std::string option) {
  return {ActionKind::select_option, std::move(bid), std::move(option), false, 0};
}
WebAction WebAction::scroll(std::string direction) { return {ActionKind::scroll, {}, std::move(direction), false, 0}; }
WebAction WebAction::go_to(std::string url) { return {ActionKind::goto_url, {}, std::move(url), false, 0}; }
WebAction WebAction::new_tab(std::string url) { return {ActionKind::new_tab, {}, std::move(url), false, 0}; }
WebAction WebAction::tab_focus(int index) { return {ActionKind::tab_focus, {}, {}, false, index}; }
WebAction WebAction::tab_close() { return {ActionKind::tab_close, {}, {}, false, 0}; }
WebAction WebAction::go_back() { return {ActionKind::go_back, {}, {}, false, 0}; }
WebAction WebAction::go_forward() { return {ActionKind::go_forward, {}, {}, false, 0}; }
WebAction WebAction::press(std::string bid, std::string key) {
  return {ActionKind::press, std::move(bid), std::move(key), false, 0};
}
WebAction WebAction::stop(std::string answer) { return {ActionKind::stop, {}, std::move(answer), false, 0}; }
WebAction WebAction::noop() { return {}; }

std::optional<std::string_view> WebAction::target_bid() const {
  switch (kind) {
    case ActionKind::click:
    case ActionKind::fill:
    case ActionKind::select_option:
    case ActionKind::press:
      return bid;
    default:
      return std::nullopt;
  }
}

std::string WebAction::to_string() const {
  std::string out(action_kind_name(kind));
  out += '(';
  switch (kind) {
    case ActionKind::click: out += quote(bid); break;
    case ActionKind::fill:
      out += quote(bid) + ", " + quote(text) + ", " + (press_enter ? "True" : "False");
      break;
    case ActionKind::select_option:
    case ActionKind::press: out += quote(bid) + ", " + quote(text); break;
    case ActionKind::scroll:
    case ActionKind::goto_url:
    case ActionKind::new_tab:
    case ActionKind::stop: out += quote(text); break;
    case ActionKind::tab_focus: out += std::to_string(index); break;
    case ActionKind::tab_close:
    case ActionKind::go_back:
    case ActionKind::go_forward:
    case ActionKind::noop: break;
  }
  out += ')';
  return out;
}

WebAction parse_action(std::string_view text) {
  auto [name, args] = CallParser(text).parse();
  auto kind = action_kind_from_name(name);
  if (!kind) throw ActionParseError(ActionErrc::UnknownKind, "unknown action '" + name + "'");

  WebAction a;
  a.kind = *kind;
  switch (*kind) {
    case ActionKind::click:
      want_arity(name, args.size(), 1, 1);
      a.bid = want_str(args[0], "bid");
      break;
    case ActionKind::fill:
      want_arity(name, args.size(), 2, 3);
      a.bid = want_str(args[0], "bid");
      a.text = want_str(args[1], "value");
      if (args.size() == 3) a.press_enter = want_bool(args[2], "press_enter");
      break;
    case ActionKind::select_option:
      want_arity(name, args.size(), 2, 2);
      a.bid = want_str(args[0], "bid");
      a.text = want_str(args[1], "option");
      break;
    case ActionKind::press:
      want_arity(name, args.size(), 2, 2);
      a.bid = want_str(args[0], "bid");
      a.text = want_str(args[1], "key");
      break;
    case ActionKind::scroll:
      want_arity(name, args.size(), 1, 1);
      a.text = want_str(args[0], "direction");
      if (a.text != "up" && a.text != "down") {
        throw ActionParseError(ActionErrc::BadLiteral, "scroll direction must be 'up' or 'down'");
      }
      break;
    case ActionKind::goto_url:
    case ActionKind::new_tab:
      want_arity(name, args.size(), 1, 1);
      a.text = want_str(args[0], "url");
      break;
    case ActionKind::stop:
      want_arity(name, args.size(), 1, 1);
      a.text = want_str(args[0], "answer");
      break;
    case ActionKind::tab_focus: {
      want_arity(name, args.size(), 1, 1);
      long long i = want_int(args[0], "tab index");
      if (i < 0 || i > 1'000'000) throw ActionParseError(ActionErrc::BadLiteral, "tab index out of range");
      a.index = static_cast<int>(i);
      break;
    }
    case ActionKind::tab_close:
    case ActionKind::go_back:
    case ActionKind::go_forward:
    case ActionKind::noop:
      want_arity(name, args.size(), 0, 0);
      break;
  }
  return a;
}

std::string auto_correct(std::string_view text) {
  auto calls = find_calls(text);
  if (calls.empty()) return std::string(text);
  for (std::string_view call : calls) {
    std::string fixed = fix_booleans(call);
    try {
      parse_action(fixed);
      return fixed;
    } catch (const ActionParseError&) {
    }
  }
  return fix_booleans(calls.front());
}

std::string ActionSpace::listing() const {
  std::string out;
  for (ActionKind k : enabled) {
    if (!out.empty()) out += ", ";
    out += action_kind_name(k);
  }
  return out;
}

bool is_text_entry_role(std::string_view role) {
  return role == "textbox" || role == "searchbox" || role == "spinbutton";
}

bool is_select_role(std::string_view role) { return role == "combobox" || role == "listbox"; }

namespace {

bool any_node(const AXNode& n, bool (*pred)(std::string_view)) {
  if (pred(n.role)) return true;
  return std::any_of(n.children.begin(), n.children.end(), [&](const AXNode& c) { return any_node(c, pred); });
}

}  // namespace

ActionSpace dynamic_action_space(const SpaceInputs& in) {
  ActionSpace space;
  space.tab_count = in.tab_count;
  space.enabled = {ActionKind::click, ActionKind::fill, ActionKind::goto_url, ActionKind::new_tab, ActionKind::stop};
  if (in.page_long) space.enabled.insert(ActionKind::scroll);
  if (in.observation != nullptr) {
    if (any_node(in.observation->root(), is_select_role)) space.enabled.insert(ActionKind::select_option);
    if (any_node(in.observation->root(), is_text_entry_role)) space.enabled.insert(ActionKind::press);
  }
  if (in.tab_count >= 2) {
    space.enabled.insert(ActionKind::tab_focus);
    space.enabled.insert(ActionKind::tab_close);
  }
  if (in.history_nonempty) space.enabled.insert(ActionKind::go_back);
  if (in.last_action && in.last_action->kind == ActionKind::go_back) space.enabled.insert(ActionKind::go_forward);
  return space;
}

ValidationResult validate_action(const WebAction& action, const AXTree& obs, const ActionSpace& space,
                                 const UrlOracle& url_oracle) {
  if (!space.allows(action.kind)) {
    return ValidationResult::invalid("action not available: " + std::string(action_kind_name(action.kind)));
  }
  const AXNode* target = nullptr;
  if (auto bid = action.target_bid()) {
    target = obs.find(*bid);
    if (target == nullptr) return ValidationResult::invalid("element not found: " + std::string(*bid));
    if (target->flag(AttrKey::disabled)) return ValidationResult::invalid("disabled element");
  }
  switch (action.kind) {
    case ActionKind::fill:
      if (!is_text_entry_role(target->role)) return ValidationResult::invalid("not a text field");
      if (target->flag(AttrKey::readonly)) return ValidationResult::invalid("read-only field");
      break;
    case ActionKind::select_option: {
      if (!is_select_role(target->role)) return ValidationResult::invalid("not a select element");
      bool found = std::any_of(target->children.begin(), target->children.end(), [&](const AXNode& c) {
        return c.role == "option" && c.name == action.text;
      });
      if (!found) return ValidationResult::invalid("option not found: " + action.text);
      break;
    }
    case ActionKind::goto_url:
    case ActionKind::new_tab:
      if (!url_oracle || !url_oracle(action.text)) return ValidationResult::invalid("invalid URL");
      break;
    case ActionKind::tab_focus:
      if (action.index < 0 || action.index >= space.tab_count) return ValidationResult::invalid("tab index out of range");
      break;
    default:
      break;
  }
  return ValidationResult::ok();
}

bool is_destructive_pre(const WebAction& action, const AXTree& obs, bool authenticated) {
  if (!authenticated) return false;
  switch (action.kind) {
    case ActionKind::click: {
      const AXNode* node = obs.find(action.bid);
      if (node == nullptr || node->role != "button") return false;
      std::string label = lower(node->name);
      for (std::string_view word : kTransientLabels) {
        if (label.find(word) != std::string::npos) return false;
      }
      if (node->flag(AttrKey::hasPopup) || node->flag(AttrKey::disabled)) return false;
      return true;
    }
    case ActionKind::fill: return action.press_enter;
    case ActionKind::press: return action.text == "Enter";
    default: return false;
  }
}

std::string_view http_method_name(HttpMethod m) {
  switch (m) {
    case HttpMethod::GET: return "GET";
    case HttpMethod::POST: return "POST";
    case HttpMethod::PUT: return "PUT";
    case HttpMethod::DELETE: return "DELETE";
    case HttpMethod::PATCH: return "PATCH";
  }
  return "?";
}

std::optional<HttpMethod> http_method_from_name(std::string_view name) {
  for (HttpMethod m : {HttpMethod::GET, HttpMethod::POST, HttpMethod::PUT, HttpMethod::DELETE, HttpMethod::PATCH}) {
    if (http_method_name(m) == name) return m;
  }
  return std::nullopt;
}

bool is_destructive_post(std::span<const NetworkRequest> log) {
  return std::any_of(log.begin(), log.end(), [](const NetworkRequest& r) { return r.method != HttpMethod::GET; });
}

ActionClass classify_action(const WebAction& action, const AXTree& obs, bool authenticated) {
  if (action.kind == ActionKind::stop) return ActionClass::terminating;
  if (is_destructive_pre(action, obs, authenticated)) return ActionClass::destructive;
  return ActionClass::safe;
}

std::string normalize_fill_text(std::string_view value) {
  std::string out;
  bool pending_space = false;
  for (char c : value) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

std::vector<Candidate> merge_actions(std::span<const Candidate> candidates) {
  struct Group {
    std::size_t first = 0;
    std::size_t best = 0;
    double total = 0.0;
  };
  std::vector<Group> groups;
  std::map<std::string, std::size_t> by_key;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    auto [it, inserted] = by_key.emplace(merge_key(candidates[i].action), groups.size());
    if (inserted) {
      groups.push_back({i, i, candidates[i].reward});
      continue;
    }
    Group& g = groups[it->second];
    g.total += candidates[i].reward;
    if (candidates[i].reward > candidates[g.best].reward) g.best = i;
  }
  std::stable_sort(groups.begin(), groups.end(), [](const Group& a, const Group& b) { return a.total > b.total; });
  std::vector<Candidate> out;
  out.reserve(groups.size());
  for (const Group& g : groups) {
    Candidate c = candidates[g.best];
    c.reward = g.total;
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace webtree
