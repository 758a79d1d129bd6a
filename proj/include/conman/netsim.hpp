#pragma once

// Deterministic two-host discrete-event simulator. A scenario declares both
// hosts, their policies, the applications that open channels, timed context
// events and the user's scripted answers to cost prompts. Running it yields
// a trace of every channel evaluation plus per-channel time accounting.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "conman/channel.hpp"
#include "conman/context.hpp"
#include "conman/cost.hpp"
#include "conman/json_io.hpp"
#include "conman/policy.hpp"

namespace conman {

struct Application {
    std::string id;
    std::string host;  // owning host; the channel's local end
    TrafficClass traffic_class = TrafficClass::INTERACTIVE;
    Direction direction = Direction::BIDIRECTIONAL;
    QoSRequirement qos;
    Millis start = 0;
    Millis stop = 0;
};

struct SetContext {
    std::string entity;
    std::string feature;
    ContextValue value;
};
struct InterfaceUp {
    std::string host;
    InterfaceIndex index = 0;
};
struct InterfaceDown {
    std::string host;
    InterfaceIndex index = 0;
};
struct SetE2E {
    std::string host;  // measuring host; `local` is its interface
    InterfaceIndex local = 0;
    InterfaceIndex remote = 0;
    std::string field;
    double value = 0.0;
};

struct SimEvent {
    Millis time = 0;
    std::variant<SetContext, InterfaceUp, InterfaceDown, SetE2E> kind;

    std::string describe() const;
};

struct ScriptEntry {
    Millis from = 0;
    Millis to = 0;
    UserDecision decision = UserDecision::REJECT;
};

struct PollSpec {
    Millis interval = 0;
    std::string entity;
    std::string feature;
};

struct SimConfig {
    FactorCatalog catalog = FactorCatalog::defaults();
    DelayTable delays;
    DwellConfig dwell;
    std::vector<PollSpec> polls;  // each tick re-evaluates every live channel
};

struct Scenario {
    std::array<HostContextView, 2> hosts;  // initial readings at time 0
    std::map<std::string, PolicySet> policies;
    std::vector<Application> applications;
    std::vector<SimEvent> events;
    std::vector<ScriptEntry> user_script;
    SimConfig config;
    std::uint64_t seed = 0;

    const HostContextView& host(std::string_view id) const;
    const HostContextView& peer_of(std::string_view id) const;
};

/// Throws SyntaxError, SchemaError, ValidationError, ReferenceError or OrderError.
Scenario load_scenario(std::string_view text);
Scenario scenario_from_json(const nlohmann::json& doc);

/// Answers cost prompts from the script: entries are consumed in order, an
/// entry whose window has passed is skipped, and an exhausted script (or a
/// prompt before the next window opens) answers REJECT.
class ScriptedOracle {
public:
    explicit ScriptedOracle(std::vector<ScriptEntry> script) : script_(std::move(script)) {}
    UserDecision operator()(const std::string& channel, double cost_rate, Millis now);
    std::size_t consumed() const { return cursor_; }

private:
    std::vector<ScriptEntry> script_;
    std::size_t cursor_ = 0;
};

/// Writes the event into the store at ev.time. Store errors propagate.
void apply_sim_event(ContextStore& store, const SimEvent& ev);

/// Registers both hosts and writes their initial readings at time 0.
void seed_store(ContextStore& store, const Scenario& scenario);

struct TraceRecord {
    Millis time = 0;
    std::string channel;
    Cause cause = Cause::CONTEXT_EVENT;
    ActionKind action = ActionKind::STAY;
    std::optional<InterfacePair> old_pair;
    std::optional<InterfacePair> new_pair;
    std::vector<std::pair<std::string, std::string>> mmp;  // host id -> policy id
    std::optional<double> cost;
    std::string event;
    std::string detail;
    DecisionMode mode = DecisionMode::PEER_TO_PEER;
    std::optional<SwitchEstimate> estimate;
    double current_throughput = 0.0;
    double threshold = 0.0;
    bool prompted = false;
};

struct ChannelMetrics {
    std::string channel;
    int switch_count = 0;
    int suspend_count = 0;
    int resume_count = 0;
    Millis window_ms = 0;
    Millis pre_establish_ms = 0;
    Millis active_ms = 0;
    Millis suspended_ms = 0;
    Millis qos_violation_ms = 0;
    double mean_cost_rate = 0.0;  // time-weighted over active time
};

struct SimResult {
    std::vector<TraceRecord> trace;
    std::vector<ChannelMetrics> metrics;
    std::uint64_t seed = 0;
};

SimResult run_simulation(const Scenario& scenario);

/// One JSON object per line, keys in fixed order starting with
/// time, channel, cause, action, old_pair, new_pair, mmp, cost.
ojson to_json(const TraceRecord& r);
std::string trace_to_jsonl(const std::vector<TraceRecord>& trace);
ojson metrics_to_json(const SimResult& result);

}  // namespace conman
