#pragma once

// Checklist-based process reward: per-item (yes, in-progress) probabilities
// are combined into one score; providers produce the probabilities.

#include <filesystem>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "webtree/actions.hpp"
#include "webtree/axtree.hpp"

namespace webtree {

/// (p_yes, p_inprogress) for one checklist item.
using ChecklistItem = std::pair<double, double>;
using ChecklistProbs = std::vector<ChecklistItem>;

enum class RewardErrc { EmptyChecklist, BadProbability, ParseError, MissingDefault };

class RewardError : public std::runtime_error {
 public:
  RewardError(RewardErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  RewardErrc code() const noexcept { return code_; }

 private:
  RewardErrc code_;
};

/// Mean over items of p_yes + 0.5 * p_inprogress.
double combine_checklist(std::span<const ChecklistItem> probs);

/// Everything a provider may look at when scoring one candidate.
struct RewardQuery {
  std::string_view goal;
  std::span<const WebAction> trajectory;
  const AXTree* observation = nullptr;
  std::string_view url;
  const WebAction* action = nullptr;
};

/// Hash of goal, the actions taken so far and the current observation.
std::string trajectory_digest(std::string_view goal, std::span<const WebAction> trajectory, const AXTree& obs);

class RewardProvider {
 public:
  virtual ~RewardProvider() = default;
  virtual ChecklistProbs probs(const RewardQuery& query) const = 0;
};

std::vector<double> score_candidates(const RewardProvider& provider, std::string_view goal,
                                     std::span<const WebAction> trajectory, const AXTree& obs, std::string_view url,
                                     std::span<const WebAction> candidates);

/// Table format:
///   {"default": [[p, q], ...],
///    "<trajectory digest> <action>": [[p, q], ...],
///    "rules": [{"url": u, "contains": s, "lacks": s, "action": a, "probs": [[p, q], ...]}]}
/// Exact keys win over rules; rules are tried in order; then the default.
std::unique_ptr<RewardProvider> parse_scripted_provider(std::string_view json_text);
std::unique_ptr<RewardProvider> make_scripted_provider(const std::filesystem::path& table_path);

}  // namespace webtree
