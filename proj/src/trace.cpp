#include "webtree/trace.hpp"

#include <fstream>
#include <sstream>

#include "webtree/backtrack.hpp"
#include "webtree/digest.hpp"

namespace webtree {

void Trace::emit(std::string_view kind, const TraceJson& payload) {
  TraceJson event;
  event["seq"] = events_.size();
  event["kind"] = kind;
  for (const auto& [k, v] : payload.items()) {
    if (k == "seq" || k == "kind") throw std::invalid_argument("trace payload may not set " + k);
    event[k] = v;
  }
  events_.push_back(std::move(event));
}

std::string Trace::jsonl() const {
  std::string out;
  for (const auto& e : events_) {
    out += e.dump();
    out += '\n';
  }
  return out;
}

void Trace::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write trace " + path.string());
  out << jsonl();
}

TraceJson tab_state_json(const TabState& tab) {
  TraceJson j;
  j["url"] = tab.url;
  j["window"] = tab.window;
  TraceJson overrides = TraceJson::object();
  for (const auto& [bid, attrs] : tab.overrides) {
    TraceJson a = TraceJson::object();
    for (const auto& [k, v] : attrs) {
      if (const bool* b = std::get_if<bool>(&v)) a[std::string(attr_key_name(k))] = *b;
      else a[std::string(attr_key_name(k))] = std::get<std::string>(v);
    }
    overrides[bid] = std::move(a);
  }
  j["overrides"] = std::move(overrides);
  j["alerts"] = tab.alerts;
  j["back"] = tab.back;
  j["forward"] = tab.forward;
  return j;
}

TabState tab_state_from_json(const TraceJson& j) {
  TabState tab;
  tab.url = j.at("url").get<std::string>();
  tab.window = j.at("window").get<std::size_t>();
  for (const auto& [bid, attrs] : j.at("overrides").items()) {
    for (const auto& [name, v] : attrs.items()) {
      auto key = attr_key_from_name(name);
      if (!key) throw std::runtime_error("unknown attribute in trace: " + name);
      if (v.is_boolean()) tab.overrides[bid][*key] = v.get<bool>();
      else tab.overrides[bid][*key] = v.get<std::string>();
    }
  }
  tab.alerts = j.at("alerts").get<std::vector<std::string>>();
  tab.back = j.at("back").get<std::vector<std::string>>();
  tab.forward = j.at("forward").get<std::vector<std::string>>();
  return tab;
}

TraceJson network_json(const std::vector<NetworkRequest>& log) {
  TraceJson arr = TraceJson::array();
  for (const auto& r : log) arr.push_back({{"method", http_method_name(r.method)}, {"url", r.url}});
  return arr;
}

namespace {

std::string obs_digest(const Environment& env) { return digest_text(serialize_axtree(env.observation())); }

ReplayReport malformed(std::string why) {
  ReplayReport r;
  r.status = ReplayStatus::malformed;
  r.message = std::move(why);
  return r;
}

}  // namespace

ReplayReport replay_trace(std::string_view jsonl, std::shared_ptr<const Scenario> scenario) {
  std::vector<TraceJson> events;
  std::istringstream in{std::string(jsonl)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      events.push_back(TraceJson::parse(line));
    } catch (const TraceJson::exception& e) {
      return malformed("unparsable trace line " + std::to_string(events.size() + 1));
    }
  }
  std::int64_t last_seq = -1;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    if (!e.is_object() || !e.contains("seq") || !e.contains("kind") || !e["seq"].is_number_integer()) {
      return malformed("event without seq/kind");
    }
    std::int64_t seq = e["seq"].get<std::int64_t>();
    if (seq <= last_seq) return malformed("seq not increasing at " + std::to_string(seq));
    last_seq = seq;
    if (e["kind"] == "result" && i + 1 != events.size()) return malformed("result event is not last");
  }
  if (events.empty() || events.back()["kind"] != "result") return malformed("trace has no result event");

  const TraceJson& result = events.back();
  std::string task;
  std::uint64_t seed = 0;
  try {
    task = result.at("task").get<std::string>();
    seed = result.at("seed").get<std::uint64_t>();
  } catch (const TraceJson::exception&) {
    return malformed("result event lacks task/seed");
  }
  std::optional<Environment> env;
  try {
    env.emplace(reset(scenario, task, seed).first);
  } catch (const NoSuchTask& ex) {
    return malformed(ex.what());
  }

  ReplayReport report;
  auto diverge = [&](std::int64_t seq, std::string why) {
    report.status = ReplayStatus::divergence;
    report.seq = seq;
    report.message = std::move(why);
    return report;
  };

  for (const auto& e : events) {
    std::int64_t seq = e["seq"].get<std::int64_t>();
    const std::string kind = e["kind"].get<std::string>();
    try {
      if (kind == "backtrack" && e.value("outcome", "") == "committed") {
        std::vector<TabState> tabs;
        for (const auto& t : e.at("tabs")) tabs.push_back(tab_state_from_json(t));
        SpecContext ctx = env->fork_tabs(tabs, e.at("active").get<std::size_t>());
        for (const auto& a : e.at("replay")) {
          env->execute(remap_tab_action(parse_action(a.get<std::string>()), ctx.first_tab));
        }
        env->commit_fork(ctx);
        if (obs_digest(*env) != e.at("obs_digest").get<std::string>()) {
          return diverge(seq, "observation after backtrack differs");
        }
      } else if (kind == "execute") {
        WebAction action = parse_action(e.at("action").get<std::string>());
        bool expect_error = e.at("status") == "error";
        bool raised = false;
        try {
          env->execute(action);
        } catch (const ExecutionError&) {
          raised = true;
        }
        if (raised != expect_error) return diverge(seq, "execution status differs");
        if (obs_digest(*env) != e.at("obs_digest").get<std::string>()) {
          return diverge(seq, "observation digest differs after " + action.to_string());
        }
        ++report.executes;
      }
    } catch (const ActionParseError& ex) {
      return diverge(seq, std::string("unparsable action: ") + ex.what());
    } catch (const ExecutionError& ex) {
      return diverge(seq, std::string("replay failed: ") + ex.what());
    } catch (const TraceJson::exception& ex) {
      return malformed(std::string("event ") + std::to_string(seq) + ": " + ex.what());
    }
  }
  return report;
}

}  // namespace webtree
