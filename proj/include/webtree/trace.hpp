#pragma once

// JSON Lines search trace and its replay verifier.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "webtree/actions.hpp"
#include "webtree/mockweb.hpp"

namespace webtree {

using TraceJson = nlohmann::ordered_json;

class Trace {
 public:
  /// Appends {"seq": n, "kind": kind, ...payload}.
  void emit(std::string_view kind, const TraceJson& payload = TraceJson::object());
  const std::vector<TraceJson>& events() const noexcept { return events_; }
  std::string jsonl() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<TraceJson> events_;
};

TraceJson tab_state_json(const TabState& tab);
TabState tab_state_from_json(const TraceJson& j);
TraceJson network_json(const std::vector<NetworkRequest>& log);

enum class ReplayStatus { match = 0, divergence = 1, malformed = 2 };

struct ReplayReport {
  ReplayStatus status = ReplayStatus::match;
  std::int64_t seq = -1;  // event where replay diverged
  std::string message;
  std::size_t executes = 0;
};

/// Re-executes the trace's execute events and committed backtracks against
/// a fresh environment and checks every recorded observation digest.
ReplayReport replay_trace(std::string_view jsonl, std::shared_ptr<const Scenario> scenario);

}  // namespace webtree
