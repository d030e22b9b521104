#pragma once

// Candidate action generation: context variations, concise history, the
// validate/retry loop, and the scripted and random policies standing in for
// a language model.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "webtree/actions.hpp"
#include "webtree/axtree.hpp"
#include "webtree/mockweb.hpp"

namespace webtree {

struct HistoryStep {
  std::string summary;
  std::string thought;
  std::string action;
};

struct GenContext {
  std::string goal;
  std::optional<std::string> rephrased_goal;
  std::vector<HistoryStep> history;
  std::vector<ExampleStep> examples;
  const AXTree* observation = nullptr;
  std::string observation_text;
  std::string observation_digest;
  std::string url;
  ActionSpace space;
  int variation = 0;
};

/// Inputs shared by all variations of one node.
struct GenInputs {
  std::string goal;
  std::optional<std::string> rephrased_goal;
  std::vector<HistoryStep> history;
  std::vector<ExampleStep> examples;
  const AXTree* observation = nullptr;
  std::string url;
  ActionSpace space;
};

/// Variation 0: full history. 1: last step only. 2: full history, examples
/// and rephrased goal. Later variations repeat the cycle with one step less
/// history per round.
std::vector<GenContext> context_variations(const GenInputs& in, int count);

/// Last min(n, len) steps, oldest first.
std::vector<HistoryStep> build_history(std::span<const HistoryStep> trajectory, std::size_t n);

/// Root name, url, and the first five interactive elements.
std::string summarize_observation(const AXTree& obs, std::string_view url);

class GenProvider {
 public:
  virtual ~GenProvider() = default;
  /// One action text for this context and attempt, or nullopt when the
  /// provider has nothing more to offer for the variation.
  virtual std::optional<std::string> propose(const GenContext& ctx, int attempt,
                                             const std::optional<std::string>& feedback) = 0;
};

class PolicyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Table format:
///   {"<observation digest>/<variation>/<attempt>": "click('3')",
///    "rules": [{"url": u, "contains": s, "lacks": s,
///               "variations": [["attempt 0", "attempt 1"], ...]}]}
std::unique_ptr<GenProvider> parse_scripted_policy(std::string_view json_text);
std::unique_ptr<GenProvider> make_scripted_policy(const std::filesystem::path& path);
std::unique_ptr<GenProvider> make_random_policy(std::uint64_t seed);

struct VariationLog {
  int variation = 0;
  int attempts = 0;
  std::vector<std::string> rejected;  // "text -> reason"
  std::optional<WebAction> accepted;
};

struct Generation {
  std::vector<WebAction> actions;
  std::vector<VariationLog> log;
};

Generation generate_candidates(GenProvider& provider, const GenInputs& in, int count, int max_retry,
                               const UrlOracle& url_oracle);

}  // namespace webtree
