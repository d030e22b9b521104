#include "webtree/reward.hpp"

#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "json.hpp"
#include "webtree/digest.hpp"

namespace webtree {

using nlohmann::json;

namespace {

void check_item(const ChecklistItem& item) {
  auto [yes, progress] = item;
  if (!(yes >= 0.0 && yes <= 1.0) || !(progress >= 0.0 && progress <= 1.0) || yes + progress > 1.0 + 1e-12) {
    throw RewardError(RewardErrc::BadProbability, "checklist probabilities out of range");
  }
}

ChecklistProbs probs_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) {
    throw RewardError(RewardErrc::ParseError, where + ": expected a non-empty list of [p_yes, p_inprogress]");
  }
  ChecklistProbs out;
  for (const auto& pair : j) {
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number()) {
      throw RewardError(RewardErrc::ParseError, where + ": malformed checklist item");
    }
    ChecklistItem item{pair[0].get<double>(), pair[1].get<double>()};
    check_item(item);
    out.push_back(item);
  }
  return out;
}

struct Rule {
  std::optional<std::string> url;
  std::optional<std::string> contains;
  std::optional<std::string> lacks;
  std::optional<std::string> action;
  ChecklistProbs probs;
};

class ScriptedReward final : public RewardProvider {
 public:
  ScriptedReward(ChecklistProbs fallback, std::map<std::string, ChecklistProbs, std::less<>> exact,
                 std::vector<Rule> rules)
      : default_(std::move(fallback)), exact_(std::move(exact)), rules_(std::move(rules)) {}

  ChecklistProbs probs(const RewardQuery& q) const override {
    std::string action = q.action->to_string();
    if (!exact_.empty()) {
      std::string key = trajectory_digest(q.goal, q.trajectory, *q.observation) + " " + action;
      if (auto it = exact_.find(key); it != exact_.end()) return it->second;
    }
    if (!rules_.empty()) {
      std::string text = serialize_axtree(*q.observation);
      for (const auto& r : rules_) {
        if (r.action && *r.action != action) continue;
        if (r.url && *r.url != q.url) continue;
        if (r.contains && text.find(*r.contains) == std::string::npos) continue;
        if (r.lacks && text.find(*r.lacks) != std::string::npos) continue;
        return r.probs;
      }
    }
    return default_;
  }

 private:
  ChecklistProbs default_;
  std::map<std::string, ChecklistProbs, std::less<>> exact_;
  std::vector<Rule> rules_;
};

std::optional<std::string> opt_string(const json& j, const char* name) {
  if (!j.contains(name)) return std::nullopt;
  if (!j.at(name).is_string()) throw RewardError(RewardErrc::ParseError, std::string("rule field ") + name);
  return j.at(name).get<std::string>();
}

// Rules may spell actions loosely (defaults omitted, true/false); match on
// the canonical form.
std::string canonical_action(const std::string& text) {
  try {
    return parse_action(auto_correct(text)).to_string();
  } catch (const ActionParseError& e) {
    throw RewardError(RewardErrc::ParseError, "rule action '" + text + "': " + e.what());
  }
}

}  // namespace

double combine_checklist(std::span<const ChecklistItem> probs) {
  if (probs.empty()) throw RewardError(RewardErrc::EmptyChecklist, "empty checklist");
  double sum = 0.0;
  for (const auto& item : probs) {
    check_item(item);
    sum += item.first + 0.5 * item.second;
  }
  return sum / static_cast<double>(probs.size());
}

std::string trajectory_digest(std::string_view goal, std::span<const WebAction> trajectory, const AXTree& obs) {
  std::string buf(goal);
  buf += '\n';
  for (const auto& a : trajectory) {
    buf += a.to_string();
    buf += ';';
  }
  buf += '\n';
  buf += serialize_axtree(obs);
  return digest_text(buf);
}

std::vector<double> score_candidates(const RewardProvider& provider, std::string_view goal,
                                     std::span<const WebAction> trajectory, const AXTree& obs, std::string_view url,
                                     std::span<const WebAction> candidates) {
  std::vector<double> out;
  out.reserve(candidates.size());
  for (const auto& action : candidates) {
    RewardQuery q{goal, trajectory, &obs, url, &action};
    out.push_back(combine_checklist(provider.probs(q)));
  }
  return out;
}

std::unique_ptr<RewardProvider> parse_scripted_provider(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw RewardError(RewardErrc::ParseError, std::string("reward table: ") + e.what());
  }
  if (!root.is_object()) throw RewardError(RewardErrc::ParseError, "reward table must be an object");
  if (!root.contains("default")) throw RewardError(RewardErrc::MissingDefault, "reward table has no default entry");

  ChecklistProbs fallback = probs_from_json(root.at("default"), "default");
  std::map<std::string, ChecklistProbs, std::less<>> exact;
  std::vector<Rule> rules;
  for (const auto& [key, value] : root.items()) {
    if (key == "default") continue;
    if (key == "rules") {
      if (!value.is_array()) throw RewardError(RewardErrc::ParseError, "rules must be a list");
      for (const auto& rj : value) {
        if (!rj.is_object() || !rj.contains("probs")) throw RewardError(RewardErrc::ParseError, "rule needs probs");
        Rule r{opt_string(rj, "url"), opt_string(rj, "contains"), opt_string(rj, "lacks"), opt_string(rj, "action"),
               probs_from_json(rj.at("probs"), "rule")};
        if (r.action) r.action = canonical_action(*r.action);
        rules.push_back(std::move(r));
      }
      continue;
    }
    exact.emplace(key, probs_from_json(value, key));
  }
  return std::make_unique<ScriptedReward>(std::move(fallback), std::move(exact), std::move(rules));
}

std::unique_ptr<RewardProvider> make_scripted_provider(const std::filesystem::path& table_path) {
  std::ifstream in(table_path);
  if (!in) throw RewardError(RewardErrc::ParseError, "cannot read " + table_path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scripted_provider(buf.str());
}

}  // namespace webtree
