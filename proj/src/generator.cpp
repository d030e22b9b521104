#include "webtree/generator.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "webtree/digest.hpp"

namespace webtree {

using nlohmann::json;

namespace {

constexpr int kRecipes = 3;
constexpr std::size_t kSummaryElements = 5;

void collect_interactive(const AXNode& node, std::vector<const AXNode*>& out) {
  if (out.size() >= kSummaryElements) return;
  if (node.bid) out.push_back(&node);
  for (const auto& c : node.children) collect_interactive(c, out);
}

void collect_bids(const AXNode& node, std::vector<const AXNode*>& out) {
  if (node.bid) out.push_back(&node);
  for (const auto& c : node.children) collect_bids(c, out);
}

struct PolicyRule {
  std::optional<std::string> url;
  std::optional<std::string> contains;
  std::optional<std::string> lacks;
  std::vector<std::vector<std::string>> variations;
};

class ScriptedPolicy final : public GenProvider {
 public:
  ScriptedPolicy(std::map<std::string, std::string, std::less<>> exact, std::vector<PolicyRule> rules)
      : exact_(std::move(exact)), rules_(std::move(rules)) {}

  std::optional<std::string> propose(const GenContext& ctx, int attempt,
                                     const std::optional<std::string>&) override {
    std::string key = ctx.observation_digest + "/" + std::to_string(ctx.variation) + "/" + std::to_string(attempt);
    if (auto it = exact_.find(key); it != exact_.end()) return it->second;
    for (const auto& r : rules_) {
      if (r.url && *r.url != ctx.url) continue;
      if (r.contains && ctx.observation_text.find(*r.contains) == std::string::npos) continue;
      if (r.lacks && ctx.observation_text.find(*r.lacks) != std::string::npos) continue;
      auto v = static_cast<std::size_t>(ctx.variation);
      if (v >= r.variations.size()) return std::nullopt;
      auto a = static_cast<std::size_t>(attempt);
      if (a >= r.variations[v].size()) return std::nullopt;
      return r.variations[v][a];
    }
    return std::nullopt;
  }

 private:
  std::map<std::string, std::string, std::less<>> exact_;
  std::vector<PolicyRule> rules_;
};

class RandomPolicy final : public GenProvider {
 public:
  explicit RandomPolicy(std::uint64_t seed) : rng_(seed) {}

  std::optional<std::string> propose(const GenContext& ctx, int, const std::optional<std::string>&) override {
    if (ctx.observation == nullptr) return std::nullopt;
    std::vector<WebAction> pool;
    std::vector<const AXNode*> nodes;
    collect_bids(ctx.observation->root(), nodes);
    for (const AXNode* n : nodes) {
      const std::string& bid = *n->bid;
      pool.push_back(WebAction::click(bid));
      if (is_text_entry_role(n->role)) pool.push_back(WebAction::fill(bid, "test"));
      if (is_select_role(n->role)) {
        for (const auto& c : n->children) {
          if (c.role == "option") pool.push_back(WebAction::select_option(bid, c.name));
        }
      }
    }
    pool.push_back(WebAction::scroll("down"));
    pool.push_back(WebAction::scroll("up"));
    pool.push_back(WebAction::go_back());
    pool.push_back(WebAction::stop(""));
    auto any_url = [](std::string_view) { return true; };
    std::erase_if(pool, [&](const WebAction& a) {
      return !validate_action(a, *ctx.observation, ctx.space, any_url).valid;
    });
    if (pool.empty()) return std::nullopt;
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    return pool[pick(rng_)].to_string();
  }

 private:
  std::mt19937_64 rng_;
};

std::optional<std::string> opt_string(const json& j, const char* name) {
  if (!j.contains(name)) return std::nullopt;
  if (!j.at(name).is_string()) throw PolicyError(std::string("policy rule field '") + name + "' must be a string");
  return j.at(name).get<std::string>();
}

}  // namespace

std::vector<HistoryStep> build_history(std::span<const HistoryStep> trajectory, std::size_t n) {
  std::size_t keep = std::min(n, trajectory.size());
  return {trajectory.end() - static_cast<std::ptrdiff_t>(keep), trajectory.end()};
}

std::vector<GenContext> context_variations(const GenInputs& in, int count) {
  if (count < 1) throw std::invalid_argument("variation count must be positive");
  std::string text = in.observation ? serialize_axtree(*in.observation) : std::string{};
  std::string digest = digest_text(text);
  std::vector<GenContext> out;
  for (int v = 0; v < count; ++v) {
    std::size_t round = static_cast<std::size_t>(v / kRecipes);
    std::size_t full = in.history.size() > round ? in.history.size() - round : 0;
    GenContext ctx;
    ctx.goal = in.goal;
    ctx.observation = in.observation;
    ctx.observation_text = text;
    ctx.observation_digest = digest;
    ctx.url = in.url;
    ctx.space = in.space;
    ctx.variation = v;
    switch (v % kRecipes) {
      case 0:
        ctx.history = build_history(in.history, full);
        break;
      case 1:
        ctx.history = build_history(in.history, std::min<std::size_t>(1, full));
        break;
      default:
        ctx.history = build_history(in.history, full);
        ctx.examples = in.examples;
        ctx.rephrased_goal = in.rephrased_goal;
        break;
    }
    out.push_back(std::move(ctx));
  }
  return out;
}

std::string summarize_observation(const AXTree& obs, std::string_view url) {
  std::vector<const AXNode*> nodes;
  collect_interactive(obs.root(), nodes);
  std::string out = obs.root().name;
  out += " @ ";
  out += url;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    out += i == 0 ? ": " : "; ";
    out += "[" + *nodes[i]->bid + "] " + nodes[i]->role + " " + quote_ax_text(nodes[i]->name);
  }
  return out;
}

std::unique_ptr<GenProvider> parse_scripted_policy(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw PolicyError(std::string("policy table: ") + e.what());
  }
  if (!root.is_object()) throw PolicyError("policy table must be an object");
  std::map<std::string, std::string, std::less<>> exact;
  std::vector<PolicyRule> rules;
  for (const auto& [key, value] : root.items()) {
    if (key == "rules") {
      if (!value.is_array()) throw PolicyError("rules must be a list");
      for (const auto& rj : value) {
        PolicyRule r{opt_string(rj, "url"), opt_string(rj, "contains"), opt_string(rj, "lacks"), {}};
        if (!rj.contains("variations") || !rj.at("variations").is_array()) {
          throw PolicyError("policy rule needs a variations list");
        }
        for (const auto& vj : rj.at("variations")) {
          std::vector<std::string> attempts;
          for (const auto& aj : vj) {
            if (!aj.is_string()) throw PolicyError("policy attempts must be strings");
            attempts.push_back(aj.get<std::string>());
          }
          r.variations.push_back(std::move(attempts));
        }
        rules.push_back(std::move(r));
      }
      continue;
    }
    if (!value.is_string()) throw PolicyError("policy entry '" + key + "' must be a string");
    exact.emplace(key, value.get<std::string>());
  }
  return std::make_unique<ScriptedPolicy>(std::move(exact), std::move(rules));
}

std::unique_ptr<GenProvider> make_scripted_policy(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PolicyError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scripted_policy(buf.str());
}

std::unique_ptr<GenProvider> make_random_policy(std::uint64_t seed) { return std::make_unique<RandomPolicy>(seed); }

Generation generate_candidates(GenProvider& provider, const GenInputs& in, int count, int max_retry,
                               const UrlOracle& url_oracle) {
  if (max_retry < 1) throw std::invalid_argument("max_retry must be positive");
  Generation gen;
  for (const auto& ctx : context_variations(in, count)) {
    VariationLog vlog;
    vlog.variation = ctx.variation;
    std::optional<std::string> feedback;
    for (int attempt = 0; attempt < max_retry; ++attempt) {
      std::optional<std::string> text = provider.propose(ctx, attempt, feedback);
      if (!text) break;
      ++vlog.attempts;
      std::string fixed = auto_correct(*text);
      std::string reason;
      try {
        WebAction action = parse_action(fixed);
        ValidationResult check = validate_action(action, *in.observation, in.space, url_oracle);
        if (check.valid) {
          vlog.accepted = action;
          gen.actions.push_back(std::move(action));
          break;
        }
        reason = check.reason;
      } catch (const ActionParseError& e) {
        reason = e.what();
      }
      vlog.rejected.push_back(*text + " -> " + reason);
      feedback = reason;
    }
    gen.log.push_back(std::move(vlog));
  }
  return gen;
}

}  // namespace webtree
