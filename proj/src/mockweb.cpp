#include "webtree/mockweb.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "webtree/digest.hpp"

namespace webtree {

using nlohmann::json;

namespace {

const std::set<std::string, std::less<>> kTriggers{"click", "fill", "submit", "select_option"};

[[noreturn]] void parse_fail(const std::string& why) { throw ScenarioError(ScenarioErrc::ParseError, why); }

std::string escape_quoted(std::string_view s) {
  std::string q = quote_ax_text(s);
  return q.substr(1, q.size() - 2);
}

std::string trim_copy(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// Expands {{store.KEY}} and {{nonce}}. `nonce` is called once per nonce.
template <typename NonceFn>
std::string expand_template(std::string_view tpl, const std::map<std::string, std::string>& store, NonceFn&& nonce) {
  std::string out;
  std::size_t pos = 0;
  while (true) {
    auto open = tpl.find("{{", pos);
    if (open == std::string_view::npos) {
      out.append(tpl.substr(pos));
      break;
    }
    auto close = tpl.find("}}", open + 2);
    if (close == std::string_view::npos) parse_fail("unterminated placeholder in template");
    out.append(tpl.substr(pos, open - pos));
    std::string_view name = tpl.substr(open + 2, close - open - 2);
    if (name == "nonce") {
      out += nonce();
    } else if (name.substr(0, 6) == "store.") {
      auto it = store.find(std::string(name.substr(6)));
      if (it != store.end()) out += escape_quoted(it->second);
    } else {
      parse_fail("unknown placeholder {{" + std::string(name) + "}}");
    }
    pos = close + 2;
  }
  return out;
}

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
  return s;
}

constexpr std::string_view kFieldOpen = "{{field.";

std::vector<std::string> field_refs(std::string_view value) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while ((pos = value.find(kFieldOpen, pos)) != std::string_view::npos) {
    auto close = value.find("}}", pos);
    if (close == std::string_view::npos) parse_fail("unterminated {{field.}} placeholder");
    out.emplace_back(value.substr(pos + kFieldOpen.size(), close - pos - kFieldOpen.size()));
    pos = close + 2;
  }
  return out;
}

// Replaces {{field.BID}} with the current value of element BID.
template <typename Lookup>
std::string substitute_fields(const std::string& value, Lookup&& lookup) {
  std::string out;
  std::size_t pos = 0;
  while (true) {
    auto open = value.find(kFieldOpen, pos);
    if (open == std::string::npos) break;
    auto close = value.find("}}", open);
    out.append(value, pos, open - pos);
    out += lookup(value.substr(open + kFieldOpen.size(), close - open - kFieldOpen.size()));
    pos = close + 2;
  }
  out.append(value, pos, std::string::npos);
  return out;
}

AXNode* find_mutable(AXNode& node, std::string_view bid) {
  if (node.bid && *node.bid == bid) return &node;
  for (auto& c : node.children) {
    if (AXNode* hit = find_mutable(c, bid)) return hit;
  }
  return nullptr;
}

AttrValue attr_value_from_text(const std::string& text) {
  if (text == "True") return true;
  if (text == "False") return false;
  return text;
}

const json& field(const json& obj, const char* name) {
  if (!obj.is_object() || !obj.contains(name)) parse_fail(std::string("missing field '") + name + "'");
  return obj.at(name);
}

std::string str_field(const json& obj, const char* name) {
  const json& v = field(obj, name);
  if (!v.is_string()) parse_fail(std::string("field '") + name + "' must be a string");
  return v.get<std::string>();
}

Effect parse_effect(const json& j) {
  Effect e;
  std::string kind = str_field(j, "kind");
  if (kind == "navigate") {
    e.kind = EffectKind::navigate;
    e.url = str_field(j, "url");
  } else if (kind == "store_set") {
    e.kind = EffectKind::store_set;
    e.key = str_field(j, "key");
    e.value = str_field(j, "value");
  } else if (kind == "temp_set") {
    e.kind = EffectKind::temp_set;
    e.bid = str_field(j, "bid");
    auto attr = attr_key_from_name(str_field(j, "attr"));
    if (!attr) parse_fail("temp_set: unknown attribute");
    e.attr = *attr;
    e.value = str_field(j, "value");
  } else if (kind == "alert") {
    e.kind = EffectKind::alert;
    e.message = str_field(j, "message");
  } else if (kind == "open_tab") {
    e.kind = EffectKind::open_tab;
    e.url = str_field(j, "url");
  } else if (kind == "close_tab") {
    e.kind = EffectKind::close_tab;
  } else if (kind == "request") {
    e.kind = EffectKind::request;
    auto m = http_method_from_name(str_field(j, "method"));
    if (!m) parse_fail("request: unknown method");
    e.method = *m;
    e.url = str_field(j, "url");
  } else if (kind == "error") {
    e.kind = EffectKind::error;
    e.message = str_field(j, "message");
  } else {
    parse_fail("unknown effect kind '" + kind + "'");
  }
  return e;
}

std::string template_text(const json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (!j.is_array()) parse_fail("axtree must be a string or an array of lines");
  std::string out;
  for (const auto& line : j) {
    if (!line.is_string()) parse_fail("axtree lines must be strings");
    out += line.get<std::string>();
    out += '\n';
  }
  return out;
}

SuccessCriterion parse_success(const json& j) {
  if (!j.is_object() || j.size() != 1) parse_fail("task success must have exactly one criterion");
  SuccessCriterion c;
  if (j.contains("store_equals")) {
    c.kind = SuccessCriterion::Kind::store_equals;
    c.key = str_field(j.at("store_equals"), "key");
    c.value = str_field(j.at("store_equals"), "value");
  } else if (j.contains("answer_equals")) {
    c.kind = SuccessCriterion::Kind::answer_equals;
    if (!j.at("answer_equals").is_string()) parse_fail("answer_equals must be a string");
    c.value = j.at("answer_equals").get<std::string>();
  } else if (j.contains("url_is")) {
    c.kind = SuccessCriterion::Kind::url_is;
    if (!j.at("url_is").is_string()) parse_fail("url_is must be a string");
    c.value = j.at("url_is").get<std::string>();
  } else {
    parse_fail("unknown success criterion");
  }
  return c;
}

void validate_scenario(Scenario& sc) {
  for (std::size_t i = 0; i < sc.pages.size(); ++i) {
    if (!sc.url_index.emplace(sc.pages[i].url, i).second) {
      throw ScenarioError(ScenarioErrc::DuplicatePageUrl, "duplicate page url " + sc.pages[i].url);
    }
  }
  if (sc.url_index.find(sc.start_url) == sc.url_index.end()) {
    throw ScenarioError(ScenarioErrc::MissingStartUrl, "start_url " + sc.start_url + " is not a declared page");
  }
  for (const auto& page : sc.pages) {
    AXTree probe;
    try {
      probe = parse_axtree(expand_template(page.axtree_template, sc.store, [] { return std::string("0"); }));
    } catch (const AxParseError& e) {
      parse_fail("page " + page.url + ": " + e.what());
    }
    for (const auto& [bid, triggers] : page.elements) {
      if (probe.find(bid) == nullptr) {
        throw ScenarioError(ScenarioErrc::DanglingBid, "page " + page.url + ": element " + bid + " not in template");
      }
      for (const auto& [trigger, effects] : triggers) {
        for (const auto& e : effects) {
          bool page_target = e.kind == EffectKind::navigate || e.kind == EffectKind::open_tab;
          if (page_target && sc.url_index.find(e.url) == sc.url_index.end()) {
            throw ScenarioError(ScenarioErrc::DanglingUrl, "page " + page.url + ": navigation to undeclared " + e.url);
          }
          if (e.kind == EffectKind::request && sc.url_index.find(e.url) == sc.url_index.end() &&
              sc.external_urls.count(e.url) == 0) {
            throw ScenarioError(ScenarioErrc::DanglingUrl, "page " + page.url + ": request to undeclared " + e.url);
          }
          if (e.kind == EffectKind::store_set) {
            for (const auto& bid : field_refs(e.value)) {
              if (probe.find(bid) == nullptr) {
                throw ScenarioError(ScenarioErrc::DanglingBid, "page " + page.url + ": store_set reads unknown " + bid);
              }
            }
          }
          if (e.kind == EffectKind::temp_set && probe.find(e.bid) == nullptr) {
            throw ScenarioError(ScenarioErrc::DanglingBid, "page " + page.url + ": temp_set on unknown " + e.bid);
          }
        }
      }
    }
  }
}

}  // namespace

std::string_view effect_kind_name(EffectKind kind) {
  switch (kind) {
    case EffectKind::navigate: return "navigate";
    case EffectKind::store_set: return "store_set";
    case EffectKind::temp_set: return "temp_set";
    case EffectKind::alert: return "alert";
    case EffectKind::open_tab: return "open_tab";
    case EffectKind::close_tab: return "close_tab";
    case EffectKind::request: return "request";
    case EffectKind::error: return "error";
  }
  return "?";
}

bool PageSpec::is_volatile() const { return axtree_template.find("{{nonce}}") != std::string::npos; }

const PageSpec* Scenario::page(std::string_view url) const {
  auto it = url_index.find(url);
  return it == url_index.end() ? nullptr : &pages[it->second];
}

const TaskSpec* Scenario::task(std::string_view id) const {
  for (const auto& t : tasks) {
    if (t.id == id) return &t;
  }
  return nullptr;
}

Scenario parse_scenario(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    parse_fail(std::string("invalid JSON: ") + e.what());
  }
  Scenario sc;
  try {
    sc.name = str_field(root, "name");
    sc.start_url = str_field(root, "start_url");
    if (root.contains("authenticated")) sc.authenticated = root.at("authenticated").get<bool>();
    if (root.contains("store")) {
      for (const auto& [k, v] : root.at("store").items()) sc.store[k] = v.get<std::string>();
    }
    if (root.contains("external_urls")) {
      for (const auto& u : root.at("external_urls")) sc.external_urls.insert(u.get<std::string>());
    }
    for (const auto& pj : field(root, "pages")) {
      PageSpec page;
      page.url = str_field(pj, "url");
      page.axtree_template = template_text(field(pj, "axtree"));
      if (pj.contains("long")) page.long_page = pj.at("long").get<bool>();
      if (pj.contains("elements")) {
        for (const auto& [bid, triggers] : pj.at("elements").items()) {
          for (const auto& [trigger, effects] : triggers.items()) {
            if (kTriggers.count(trigger) == 0) parse_fail("unknown trigger '" + trigger + "' on element " + bid);
            auto& list = page.elements[bid][trigger];
            for (const auto& ej : effects) list.push_back(parse_effect(ej));
          }
        }
      }
      sc.pages.push_back(std::move(page));
    }
    for (const auto& tj : field(root, "tasks")) {
      TaskSpec task;
      task.id = str_field(tj, "id");
      task.goal = str_field(tj, "goal");
      if (tj.contains("rephrased_goal")) task.rephrased_goal = tj.at("rephrased_goal").get<std::string>();
      if (tj.contains("examples")) {
        for (const auto& ex : tj.at("examples")) {
          task.examples.push_back({str_field(ex, "goal"), str_field(ex, "thought"), str_field(ex, "action")});
        }
      }
      task.success = parse_success(field(tj, "success"));
      sc.tasks.push_back(std::move(task));
    }
  } catch (const json::exception& e) {
    parse_fail(std::string("malformed scenario: ") + e.what());
  }
  validate_scenario(sc);
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(ScenarioErrc::ParseError, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

Environment::Environment(std::shared_ptr<const Scenario> scenario, const TaskSpec& task, std::uint64_t seed)
    : scenario_(std::move(scenario)), task_(task), seed_(seed), store_(scenario_->store), rng_(seed) {
  open_tab(scenario_->start_url);
}

std::pair<Environment, AXTree> reset(std::shared_ptr<const Scenario> scenario, std::string_view task_id,
                                     std::uint64_t seed) {
  const TaskSpec* task = scenario->task(task_id);
  if (task == nullptr) throw NoSuchTask(std::string(task_id));
  Environment env(std::move(scenario), *task, seed);
  AXTree obs = env.observation();
  return {std::move(env), std::move(obs)};
}

std::vector<TabState> Environment::tab_states() const {
  std::vector<TabState> out;
  out.reserve(tabs_.size());
  for (const auto& t : tabs_) out.push_back(t.state);
  return out;
}

bool Environment::page_long() const {
  const PageSpec* p = scenario_->page(url());
  return p != nullptr && p->long_page;
}

void Environment::log(HttpMethod method, std::string url) {
  if (fork_ && method != HttpMethod::GET) ++fork_mutating_requests_;
  last_network_.push_back({method, std::move(url)});
}

AXTree Environment::render(const TabState& tab) {
  const PageSpec* page = scenario_->page(tab.url);
  if (page == nullptr) throw ExecutionError("invalid URL: " + tab.url);
  std::string text =
      expand_template(page->axtree_template, store_, [this] { return hex64(rng_()).substr(8); });
  AXNode root = parse_axtree(text).root();
  for (const auto& [bid, attrs] : tab.overrides) {
    if (AXNode* n = find_mutable(root, bid)) {
      for (const auto& [k, v] : attrs) n->attrs[k] = v;
    }
  }
  root.attrs[AttrKey::url] = tab.url;
  if (page->long_page) {
    std::size_t first = std::min(tab.window * kScrollStride, root.children.size());
    std::size_t last = std::min(first + kViewportWindow, root.children.size());
    std::vector<AXNode> visible(std::make_move_iterator(root.children.begin() + static_cast<std::ptrdiff_t>(first)),
                                std::make_move_iterator(root.children.begin() + static_cast<std::ptrdiff_t>(last)));
    root.children = std::move(visible);
  }
  for (const auto& msg : tab.alerts) {
    AXNode alert;
    alert.role = "alert";
    alert.name = msg;
    root.children.push_back(std::move(alert));
  }
  return AXTree(std::move(root));
}

void Environment::navigate(Tab& tab, const std::string& url) {
  if (!url_exists(url)) throw ExecutionError("invalid URL: " + url);
  tab.state.back.push_back(tab.state.url);
  tab.state.forward.clear();
  tab.state.url = url;
  tab.state.window = 0;
  tab.state.overrides.clear();
  tab.state.alerts.clear();
  log(HttpMethod::GET, url);
}

void Environment::open_tab(const std::string& url) {
  if (!url_exists(url)) throw ExecutionError("invalid URL: " + url);
  Tab tab;
  tab.state.url = url;
  log(HttpMethod::GET, url);
  tab.render = render(tab.state);
  tabs_.push_back(std::move(tab));
  active_ = tabs_.size() - 1;
}

std::size_t Environment::lowest_tab() const { return fork_ ? *fork_ : 0; }

void Environment::close_active_tab() {
  if (tabs_.size() - lowest_tab() < 2) throw ExecutionError("cannot close the last tab");
  tabs_.erase(tabs_.begin() + static_cast<std::ptrdiff_t>(active_));
  if (active_ >= tabs_.size()) active_ = tabs_.size() - 1;
}

const std::vector<Effect>* Environment::effects_for(const std::string& bid, const std::string& trigger) const {
  const PageSpec* page = scenario_->page(url());
  if (page == nullptr) return nullptr;
  auto el = page->elements.find(bid);
  if (el == page->elements.end()) return nullptr;
  auto tr = el->second.find(trigger);
  return tr == el->second.end() ? nullptr : &tr->second;
}

std::string Environment::field_value(const std::string& bid) const {
  const auto& overrides = tabs_[active_].state.overrides;
  if (auto it = overrides.find(bid); it != overrides.end()) {
    if (auto v = it->second.find(AttrKey::value); v != it->second.end()) {
      if (const auto* text = std::get_if<std::string>(&v->second)) return *text;
    }
  }
  const AXNode* node = observation().find(bid);
  return node == nullptr ? std::string{} : node->text_attr(AttrKey::value);
}

const AXNode& Environment::require_element(std::string_view bid) const {
  const AXNode* node = observation().find(bid);
  if (node == nullptr) throw ExecutionError("element not found: " + std::string(bid));
  if (node->flag(AttrKey::disabled)) throw ExecutionError("disabled element: " + std::string(bid));
  return *node;
}

void Environment::fire(const std::vector<Effect>& effects, const std::string& input, bool& dirty) {
  // Failing effects abort the step before anything is applied.
  std::size_t closes = 0;
  for (const auto& e : effects) {
    if (e.kind == EffectKind::error) throw ExecutionError(e.message);
    if (e.kind == EffectKind::close_tab) ++closes;
  }
  if (closes > 0 && tabs_.size() - lowest_tab() < closes + 1) throw ExecutionError("cannot close the last tab");

  for (const auto& e : effects) {
    switch (e.kind) {
      case EffectKind::navigate:
        navigate(tabs_[active_], e.url);
        dirty = true;
        break;
      case EffectKind::store_set:
        store_[e.key] = substitute_fields(replace_all(e.value, "{{input}}", input),
                                          [this](const std::string& bid) { return field_value(bid); });
        dirty = true;
        break;
      case EffectKind::temp_set:
        tabs_[active_].state.overrides[e.bid][e.attr] = attr_value_from_text(e.value);
        dirty = true;
        break;
      case EffectKind::alert:
        tabs_[active_].state.alerts.push_back(e.message);
        dirty = true;
        break;
      case EffectKind::open_tab:
        if (dirty) tabs_[active_].render = render(tabs_[active_].state);
        open_tab(e.url);
        dirty = false;
        break;
      case EffectKind::close_tab:
        close_active_tab();
        dirty = false;
        break;
      case EffectKind::request:
        log(e.method, e.url);
        break;
      case EffectKind::error:
        break;
    }
  }
}

StepOutcome Environment::execute(const WebAction& action) {
  last_network_.clear();
  bool dirty = false;
  Tab& tab = tabs_[active_];
  static const std::vector<Effect> kNone;
  auto effects = [&](const std::string& bid, const char* trigger) -> const std::vector<Effect>& {
    const auto* list = effects_for(bid, trigger);
    return list == nullptr ? kNone : *list;
  };

  switch (action.kind) {
    case ActionKind::click: {
      require_element(action.bid);
      fire(effects(action.bid, "click"), {}, dirty);
      break;
    }
    case ActionKind::fill: {
      const AXNode& node = require_element(action.bid);
      if (!is_text_entry_role(node.role)) throw ExecutionError("not a text field: " + action.bid);
      if (node.flag(AttrKey::readonly)) throw ExecutionError("read-only field: " + action.bid);
      std::vector<Effect> all = effects(action.bid, "fill");
      if (action.press_enter) {
        const auto& submit = effects(action.bid, "submit");
        all.insert(all.end(), submit.begin(), submit.end());
      }
      for (const auto& e : all) {
        if (e.kind == EffectKind::error) throw ExecutionError(e.message);
      }
      tab.state.overrides[action.bid][AttrKey::value] = action.text;
      dirty = true;
      fire(all, action.text, dirty);
      break;
    }
    case ActionKind::select_option: {
      const AXNode& node = require_element(action.bid);
      if (!is_select_role(node.role)) throw ExecutionError("not a select element: " + action.bid);
      bool found = std::any_of(node.children.begin(), node.children.end(),
                               [&](const AXNode& c) { return c.role == "option" && c.name == action.text; });
      if (!found) throw ExecutionError("option not found: " + action.text);
      const auto& list = effects(action.bid, "select_option");
      for (const auto& e : list) {
        if (e.kind == EffectKind::error) throw ExecutionError(e.message);
      }
      tab.state.overrides[action.bid][AttrKey::value] = action.text;
      dirty = true;
      fire(list, action.text, dirty);
      break;
    }
    case ActionKind::press: {
      const AXNode& node = require_element(action.bid);
      if (action.text == "Enter") fire(effects(action.bid, "submit"), node.text_attr(AttrKey::value), dirty);
      break;
    }
    case ActionKind::scroll: {
      if (!page_long()) throw ExecutionError("page is not scrollable");
      const PageSpec* page = scenario_->page(tab.state.url);
      std::size_t total = parse_axtree(expand_template(page->axtree_template, store_, [] {
                            return std::string("0");
                          })).root().children.size();
      std::size_t max_window = total > kViewportWindow ? (total - kViewportWindow + kScrollStride - 1) / kScrollStride : 0;
      if (action.text == "down" && tab.state.window < max_window) {
        ++tab.state.window;
        dirty = true;
      } else if (action.text == "up" && tab.state.window > 0) {
        --tab.state.window;
        dirty = true;
      }
      break;
    }
    case ActionKind::goto_url:
      navigate(tab, action.text);
      dirty = true;
      break;
    case ActionKind::new_tab:
      open_tab(action.text);
      break;
    case ActionKind::tab_focus:
      if (action.index < static_cast<int>(lowest_tab()) || action.index >= static_cast<int>(tabs_.size())) {
        throw ExecutionError("tab index out of range: " + std::to_string(action.index));
      }
      active_ = static_cast<std::size_t>(action.index);
      break;
    case ActionKind::tab_close:
      close_active_tab();
      break;
    case ActionKind::go_back: {
      if (tab.state.back.empty()) throw ExecutionError("no previous page in history");
      std::string prev = tab.state.back.back();
      tab.state.back.pop_back();
      tab.state.forward.push_back(tab.state.url);
      tab.state.url = prev;
      tab.state.window = 0;
      tab.state.overrides.clear();
      tab.state.alerts.clear();
      log(HttpMethod::GET, prev);
      dirty = true;
      break;
    }
    case ActionKind::go_forward: {
      if (tab.state.forward.empty()) throw ExecutionError("no next page in history");
      std::string next = tab.state.forward.back();
      tab.state.forward.pop_back();
      tab.state.back.push_back(tab.state.url);
      tab.state.url = next;
      tab.state.window = 0;
      tab.state.overrides.clear();
      tab.state.alerts.clear();
      log(HttpMethod::GET, next);
      dirty = true;
      break;
    }
    case ActionKind::stop:
    case ActionKind::noop:
      break;
  }
  if (dirty) tabs_[active_].render = render(tabs_[active_].state);
  return {observation(), last_network_};
}

AXTree Environment::refresh() {
  Tab& tab = tabs_[active_];
  tab.state.window = 0;
  tab.state.overrides.clear();
  tab.state.alerts.clear();
  last_network_.clear();
  log(HttpMethod::GET, tab.state.url);
  tab.render = render(tab.state);
  return tab.render;
}

SpecContext Environment::fork_tabs(std::span<const TabState> tabs, std::size_t active) {
  if (fork_) throw ForkInForkError();
  if (tabs.empty() || active >= tabs.size()) throw std::invalid_argument("fork needs at least one tab");
  SpecContext ctx;
  ctx.first_tab = tabs_.size();
  ctx.original_active = active_;
  ctx.rng_at_fork = rng_;
  ctx.open = true;
  fork_ = ctx.first_tab;
  last_network_.clear();
  for (const auto& state : tabs) {
    if (!url_exists(state.url)) {
      tabs_.resize(ctx.first_tab);
      fork_.reset();
      throw ExecutionError("invalid URL: " + state.url);
    }
    log(HttpMethod::GET, state.url);
    tabs_.push_back({state, render(state)});
  }
  active_ = ctx.first_tab + active;
  return ctx;
}

SpecContext Environment::fork_urls(std::span<const std::string> urls) {
  std::vector<TabState> states;
  for (const auto& u : urls) {
    TabState s;
    s.url = u;
    states.push_back(std::move(s));
  }
  return fork_tabs(states, 0);
}

void Environment::commit_fork(SpecContext& ctx) {
  if (!ctx.open || !fork_) throw std::logic_error("no open fork to commit");
  tabs_.erase(tabs_.begin(), tabs_.begin() + static_cast<std::ptrdiff_t>(ctx.first_tab));
  active_ -= ctx.first_tab;
  fork_.reset();
  ctx.open = false;
}

void Environment::abort_fork(SpecContext& ctx) {
  if (!ctx.open || !fork_) throw std::logic_error("no open fork to abort");
  tabs_.resize(ctx.first_tab);
  active_ = ctx.original_active;
  rng_ = ctx.rng_at_fork;
  fork_.reset();
  ctx.open = false;
}

bool evaluate_task(const Environment& env, const TaskSpec& task, const std::optional<std::string>& stop_answer) {
  const SuccessCriterion& c = task.success;
  switch (c.kind) {
    case SuccessCriterion::Kind::store_equals: {
      auto it = env.store().find(c.key);
      return it != env.store().end() && it->second == c.value;
    }
    case SuccessCriterion::Kind::answer_equals:
      return stop_answer.has_value() && trim_copy(*stop_answer) == trim_copy(c.value);
    case SuccessCriterion::Kind::url_is:
      return env.url() == c.value;
  }
  return false;
}

}  // namespace webtree
