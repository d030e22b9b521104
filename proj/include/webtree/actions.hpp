#pragma once

// Action DSL, taxonomy classification, dynamic action space, validation,
// auto-correction, fill-text normalization, and candidate merging.

#include <functional>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "webtree/axtree.hpp"

namespace webtree {

enum class ActionKind {
  click,
  fill,
  select_option,
  scroll,
  goto_url,
  new_tab,
  tab_focus,
  tab_close,
  go_back,
  go_forward,
  press,
  stop,
  noop,
};

std::string_view action_kind_name(ActionKind kind);
std::optional<ActionKind> action_kind_from_name(std::string_view name);

/// One parsed agent action. Which fields are meaningful depends on `kind`:
/// `bid` for element actions, `text` for fill value / option / url / key /
/// answer / scroll direction, `press_enter` for fill, `index` for tab_focus.
struct WebAction {
  ActionKind kind = ActionKind::noop;
  std::string bid;
  std::string text;
  bool press_enter = false;
  int index = 0;

  static WebAction click(std::string bid);
  static WebAction fill(std::string bid, std::string value, bool press_enter = false);
  static WebAction select_option(std::string bid, std::string option);
  static WebAction scroll(std::string direction);
  static WebAction go_to(std::string url);
  static WebAction new_tab(std::string url);
  static WebAction tab_focus(int index);
  static WebAction tab_close();
  static WebAction go_back();
  static WebAction go_forward();
  static WebAction press(std::string bid, std::string key);
  static WebAction stop(std::string answer);
  static WebAction noop();

  /// Element the action operates on, if any.
  std::optional<std::string_view> target_bid() const;
  /// Canonical DSL text, e.g. fill('237', 'example value', False).
  std::string to_string() const;

  friend bool operator==(const WebAction&, const WebAction&) = default;
};

/// Priority class used by the frontier. Invalid actions never get one.
enum class ActionClass : int { terminating = 1, destructive = 2, safe = 3 };

std::string_view action_class_name(ActionClass c);

enum class ActionErrc { UnknownKind, ArityMismatch, BadLiteral, MultipleActions, Syntax };

class ActionParseError : public std::runtime_error {
 public:
  ActionParseError(ActionErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ActionErrc code() const noexcept { return code_; }

 private:
  ActionErrc code_;
};

WebAction parse_action(std::string_view text);

/// Keeps the first well-formed call when several are present and rewrites
/// bare true/false inside call arguments to True/False. Returns the input
/// unchanged when no call expression can be found.
std::string auto_correct(std::string_view text);

struct ActionSpace {
  std::set<ActionKind> enabled;
  int tab_count = 1;

  bool allows(ActionKind kind) const { return enabled.count(kind) != 0; }
  /// Comma-separated kind names in enum order.
  std::string listing() const;
};

struct SpaceInputs {
  const AXTree* observation = nullptr;
  bool page_long = false;
  int tab_count = 1;
  bool history_nonempty = false;
  std::optional<WebAction> last_action;
};

ActionSpace dynamic_action_space(const SpaceInputs& in);

struct ValidationResult {
  bool valid = true;
  std::string reason;

  static ValidationResult ok() { return {}; }
  static ValidationResult invalid(std::string why) { return {false, std::move(why)}; }
};

using UrlOracle = std::function<bool(std::string_view)>;

ValidationResult validate_action(const WebAction& action, const AXTree& obs, const ActionSpace& space,
                                 const UrlOracle& url_oracle);

bool is_text_entry_role(std::string_view role);
bool is_select_role(std::string_view role);

bool is_destructive_pre(const WebAction& action, const AXTree& obs, bool authenticated);

enum class HttpMethod { GET, POST, PUT, DELETE, PATCH };

std::string_view http_method_name(HttpMethod m);
std::optional<HttpMethod> http_method_from_name(std::string_view name);

struct NetworkRequest {
  HttpMethod method = HttpMethod::GET;
  std::string url;

  friend bool operator==(const NetworkRequest&, const NetworkRequest&) = default;
};

bool is_destructive_post(std::span<const NetworkRequest> log);

ActionClass classify_action(const WebAction& action, const AXTree& obs, bool authenticated);

std::string normalize_fill_text(std::string_view value);

struct Candidate {
  WebAction action;
  double reward = 0.0;
  ActionClass cls = ActionClass::safe;
};

std::vector<Candidate> merge_actions(std::span<const Candidate> candidates);

}  // namespace webtree
