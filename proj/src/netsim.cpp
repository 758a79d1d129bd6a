#include "conman/netsim.hpp"

#include <algorithm>
#include <charconv>
#include <queue>
#include <set>
#include <sstream>
#include <tuple>

#include <spdlog/spdlog.h>

#include "json_util.hpp"

namespace conman {

using detail::allow_keys;
using detail::get_bool;
using detail::get_double;
using detail::get_enum;
using detail::get_int;
using detail::get_string;
using nlohmann::json;

const HostContextView& Scenario::host(std::string_view id) const {
    for (const auto& h : hosts)
        if (h.host_id == id) return h;
    throw ReferenceError("unknown host '" + std::string(id) + "'");
}

const HostContextView& Scenario::peer_of(std::string_view id) const {
    return hosts[0].host_id == id ? hosts[1] : hosts[0];
}

std::string SimEvent::describe() const {
    return std::visit(
        [](const auto& k) -> std::string {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, SetContext>) {
                std::string v = std::visit(
                    [](const auto& x) -> std::string {
                        using V = std::decay_t<decltype(x)>;
                        if constexpr (std::is_same_v<V, std::string>) return x;
                        else if constexpr (std::is_same_v<V, bool>) return x ? "true" : "false";
                        else return json(x).dump();
                    },
                    k.value);
                return "set_context " + k.entity + "." + k.feature + "=" + v;
            } else if constexpr (std::is_same_v<T, InterfaceUp>) {
                return "interface_up " + interface_entity(k.host, k.index);
            } else if constexpr (std::is_same_v<T, InterfaceDown>) {
                return "interface_down " + interface_entity(k.host, k.index);
            } else {
                return "set_e2e " + interface_entity(k.host, k.local) + "~if" +
                       std::to_string(k.remote) + "." + k.field + "=" + json(k.value).dump();
            }
        },
        kind);
}

UserDecision ScriptedOracle::operator()(const std::string&, double, Millis now) {
    while (cursor_ < script_.size() && script_[cursor_].to < now) ++cursor_;
    if (cursor_ >= script_.size() || script_[cursor_].from > now) return UserDecision::REJECT;
    return script_[cursor_++].decision;
}

// ---------------------------------------------------------------------------
// scenario loading

namespace {

/// Parses "host.ifN" into (host, N) when the entity has that shape.
std::optional<std::pair<std::string, InterfaceIndex>> split_interface_entity(std::string_view e) {
    const auto pos = e.rfind(".if");
    if (pos == std::string_view::npos || pos == 0) return std::nullopt;
    const auto digits = e.substr(pos + 3);
    InterfaceIndex idx = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), idx);
    if (digits.empty() || ec != std::errc{} || ptr != digits.data() + digits.size())
        return std::nullopt;
    return std::pair{std::string(e.substr(0, pos)), idx};
}

void check_interface(const Scenario& s, const std::string& host, InterfaceIndex index,
                     const std::string& where) {
    const HostContextView* h = nullptr;
    for (const auto& v : s.hosts)
        if (v.host_id == host) h = &v;
    if (!h) throw ReferenceError(where + ": unknown host '" + host + "'");
    if (!h->find(index))
        throw ReferenceError(where + ": host '" + host + "' has no interface " +
                             std::to_string(index));
}

void check_entity(const Scenario& s, std::string_view entity, const std::string& where) {
    std::vector<std::string_view> parts;
    if (auto tilde = entity.find('~'); tilde != std::string_view::npos) {
        parts = {entity.substr(0, tilde), entity.substr(tilde + 1)};
    } else {
        parts = {entity};
    }
    for (auto part : parts) {
        auto split = split_interface_entity(part);
        if (!split) continue;
        const bool known_host = std::any_of(s.hosts.begin(), s.hosts.end(),
                                            [&](const auto& h) { return h.host_id == split->first; });
        if (known_host) check_interface(s, split->first, split->second, where);
    }
}

SimEvent event_from_json(const json& j, std::size_t k, const Scenario& s) {
    const std::string w = "events[" + std::to_string(k) + "]";
    detail::require_object(j, w);
    SimEvent ev;
    ev.time = get_int(j, "time", w);
    if (ev.time < 0) throw SchemaError(w + ".time: must be non-negative");
    const std::string kind = get_string(j, "kind", w);
    if (kind == "set_context") {
        allow_keys(j, {"time", "kind", "entity", "feature", "value"}, w);
        SetContext sc{get_string(j, "entity", w), get_string(j, "feature", w), 0.0};
        if (sc.entity.empty() || sc.feature.empty())
            throw SchemaError(w + ": entity and feature must be non-empty");
        const auto& v = detail::field(j, "value", w);
        if (v.is_boolean()) sc.value = v.get<bool>();
        else if (v.is_string()) sc.value = v.get<std::string>();
        else sc.value = detail::as_double(v, w + ".value");
        check_entity(s, sc.entity, w);
        ev.kind = std::move(sc);
    } else if (kind == "interface_up" || kind == "interface_down") {
        allow_keys(j, {"time", "kind", "host", "index"}, w);
        const std::string host = get_string(j, "host", w);
        const auto index = get_int(j, "index", w);
        if (index < 0) throw ReferenceError(w + ": negative interface index");
        check_interface(s, host, static_cast<InterfaceIndex>(index), w);
        if (kind == "interface_up") ev.kind = InterfaceUp{host, static_cast<InterfaceIndex>(index)};
        else ev.kind = InterfaceDown{host, static_cast<InterfaceIndex>(index)};
    } else if (kind == "set_e2e") {
        allow_keys(j, {"time", "kind", "host", "local", "remote", "field", "value"}, w);
        SetE2E e;
        e.host = j.contains("host") ? get_string(j, "host", w) : s.hosts[0].host_id;
        const auto local = get_int(j, "local", w);
        const auto remote = get_int(j, "remote", w);
        if (local < 0 || remote < 0) throw ReferenceError(w + ": negative interface index");
        e.local = static_cast<InterfaceIndex>(local);
        e.remote = static_cast<InterfaceIndex>(remote);
        check_interface(s, e.host, e.local, w);
        check_interface(s, s.peer_of(e.host).host_id, e.remote, w);
        e.field = get_string(j, "field", w);
        if (!feature::is_path_feature(e.field))
            throw SchemaError(w + ".field: unknown end-to-end field \"" + e.field + "\"");
        e.value = get_double(j, "value", w);
        ev.kind = std::move(e);
    } else {
        throw SchemaError(w + ".kind: unknown event kind \"" + kind + "\"");
    }
    return ev;
}

SimConfig config_from_json(const json& j) {
    SimConfig cfg;
    allow_keys(j, {"factors", "delays", "use_default_delays", "dwell", "poll"}, "config");
    if (j.contains("factors")) cfg.catalog = catalog_from_json(j.at("factors"));
    const bool defaults = j.contains("use_default_delays") ? get_bool(j, "use_default_delays", "config")
                                                          : true;
    cfg.delays = delays_from_json(j.contains("delays") ? j.at("delays") : json::array(), defaults);
    if (j.contains("dwell")) {
        const auto& d = j.at("dwell");
        allow_keys(d, {"t_dwell", "k_stable"}, "config.dwell");
        if (d.contains("t_dwell")) cfg.dwell.t_dwell = get_int(d, "t_dwell", "config.dwell");
        if (d.contains("k_stable"))
            cfg.dwell.k_stable = static_cast<int>(get_int(d, "k_stable", "config.dwell"));
        if (cfg.dwell.t_dwell < 0) throw SchemaError("config.dwell.t_dwell: must be >= 0");
        if (cfg.dwell.k_stable < 1) throw SchemaError("config.dwell.k_stable: must be >= 1");
    }
    if (j.contains("poll")) {
        const auto& arr = j.at("poll");
        detail::require_array(arr, "config.poll");
        for (std::size_t k = 0; k < arr.size(); ++k) {
            const std::string w = "config.poll[" + std::to_string(k) + "]";
            allow_keys(arr[k], {"interval_ms", "entity", "feature"}, w);
            PollSpec p{get_int(arr[k], "interval_ms", w), get_string(arr[k], "entity", w),
                       get_string(arr[k], "feature", w)};
            if (p.interval <= 0) throw SchemaError(w + ".interval_ms: must be positive");
            cfg.polls.push_back(std::move(p));
        }
    }
    return cfg;
}

}  // namespace

Scenario scenario_from_json(const json& doc) {
    allow_keys(doc, {"hosts", "policies", "applications", "events", "user_script", "config", "seed"},
               "scenario");
    Scenario s;

    const auto& hosts = detail::field(doc, "hosts", "scenario");
    detail::require_array(hosts, "hosts");
    if (hosts.size() != 2) throw SchemaError("hosts: exactly two hosts are required");
    for (std::size_t k = 0; k < 2; ++k) {
        const auto& h = hosts[k];
        const std::string w = "hosts[" + std::to_string(k) + "]";
        allow_keys(h, {"id", "interfaces", "e2e"}, w);
        json view = {{"host_id", get_string(h, "id", w)}, {"interfaces", detail::field(h, "interfaces", w)}};
        if (h.contains("e2e")) view["e2e"] = h.at("e2e");
        s.hosts[k] = view_from_json(view);
    }
    if (s.hosts[0].host_id == s.hosts[1].host_id) throw SchemaError("hosts: ids must differ");
    for (const auto& h : s.hosts)
        for (const auto& [pair, _] : h.e2e)
            check_interface(s, s.peer_of(h.host_id).host_id, pair.remote,
                            "host " + h.host_id + ".e2e");

    if (doc.contains("config")) s.config = config_from_json(doc.at("config"));
    if (doc.contains("seed")) {
        const auto& v = doc.at("seed");
        if (!v.is_number_unsigned()) throw SchemaError("seed: expected a non-negative integer");
        s.seed = v.get<std::uint64_t>();
    }

    std::vector<std::string> violations;
    if (doc.contains("policies")) {
        const auto& pol = doc.at("policies");
        detail::require_object(pol, "policies");
        for (const auto& [host, set] : pol.items()) {
            static_cast<void>(s.host(host));
            try {
                s.policies[host] = policy_set_from_json(set);
            } catch (const ValidationError& e) {
                for (const auto& v : e.violations()) violations.push_back("host " + host + ": " + v);
            }
        }
    }

    const auto& apps = detail::field(doc, "applications", "scenario");
    detail::require_array(apps, "applications");
    std::set<std::string> app_ids;
    for (std::size_t k = 0; k < apps.size(); ++k) {
        const auto& j = apps[k];
        const std::string w = "applications[" + std::to_string(k) + "]";
        allow_keys(j, {"id", "host", "traffic_class", "direction", "qos", "start", "stop"}, w);
        Application a;
        a.id = get_string(j, "id", w);
        a.host = j.contains("host") ? get_string(j, "host", w) : s.hosts[0].host_id;
        static_cast<void>(s.host(a.host));
        a.traffic_class = get_enum<TrafficClass>(j, "traffic_class", w, parse_traffic_class);
        a.direction = get_enum<Direction>(j, "direction", w, parse_direction);
        a.qos = qos_from_json(detail::field(j, "qos", w));
        a.start = get_int(j, "start", w);
        a.stop = get_int(j, "stop", w);
        if (a.id.empty()) violations.push_back(w + ": id is empty");
        if (!app_ids.insert(a.id).second) violations.push_back(w + ": duplicate id '" + a.id + "'");
        if (a.start < 0 || a.start >= a.stop)
            violations.push_back("application '" + a.id + "': needs 0 <= start < stop");
        for (auto& v : validate(a.qos)) violations.push_back("application '" + a.id + "': " + v);
        s.applications.push_back(std::move(a));
    }

    if (doc.contains("events")) {
        const auto& evs = doc.at("events");
        detail::require_array(evs, "events");
        for (std::size_t k = 0; k < evs.size(); ++k) {
            s.events.push_back(event_from_json(evs[k], k, s));
            if (k > 0 && s.events[k].time < s.events[k - 1].time)
                throw OrderError("events[" + std::to_string(k) + "]: time " +
                                 std::to_string(s.events[k].time) + " precedes " +
                                 std::to_string(s.events[k - 1].time));
        }
    }

    if (doc.contains("user_script")) {
        const auto& arr = doc.at("user_script");
        detail::require_array(arr, "user_script");
        for (std::size_t k = 0; k < arr.size(); ++k) {
            const std::string w = "user_script[" + std::to_string(k) + "]";
            allow_keys(arr[k], {"from", "to", "decision"}, w);
            ScriptEntry e;
            e.from = get_int(arr[k], "from", w);
            e.to = get_int(arr[k], "to", w);
            e.decision = get_enum<UserDecision>(arr[k], "decision", w, [](std::string_view v) {
                return v == "accept"   ? std::optional(UserDecision::ACCEPT)
                       : v == "reject" ? std::optional(UserDecision::REJECT)
                                       : std::nullopt;
            });
            if (e.from > e.to) violations.push_back(w + ": window has from > to");
            s.user_script.push_back(e);
        }
    }

    if (!violations.empty()) throw ValidationError(std::move(violations));
    return s;
}

Scenario load_scenario(std::string_view text) { return scenario_from_json(parse_json_text(text)); }

// ---------------------------------------------------------------------------
// store mapping

void seed_store(ContextStore& store, const Scenario& scenario) {
    for (const auto& h : scenario.hosts) {
        for (const auto& s : h.interfaces) {
            store.register_interface(s.descriptor);
            const std::string e = interface_entity(h.host_id, s.descriptor.index);
            store.put({e, std::string(feature::kAvailable), s.available, 0});
            store.put({e, std::string(feature::kSignalStrength), s.signal_strength, 0});
            store.put({e, std::string(feature::kSnr), s.snr, 0});
            store.put({e, std::string(feature::kChargeRate), s.charge_rate, 0});
            store.put({e, std::string(feature::kPowerDraw), s.power_draw, 0});
            store.put({e, std::string(feature::kCurrentSpeed), s.current_speed, 0});
        }
    }
    for (const auto& h : scenario.hosts) {
        const std::string& peer = scenario.peer_of(h.host_id).host_id;
        for (const auto& [pair, q] : h.e2e) {
            const std::string e = path_entity(h.host_id, pair.local, peer, pair.remote);
            store.put({e, std::string(feature::kRtt), q.rtt, 0});
            store.put({e, std::string(feature::kBandwidthUp), q.bandwidth_up, 0});
            store.put({e, std::string(feature::kBandwidthDown), q.bandwidth_down, 0});
            store.put({e, std::string(feature::kPacketLoss), q.packet_loss, 0});
            store.put({e, std::string(feature::kJitter), q.jitter, 0});
        }
    }
}

void apply_sim_event(ContextStore& store, const SimEvent& ev) {
    std::visit(
        [&](const auto& k) {
            using T = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<T, SetContext>) {
                store.put({k.entity, k.feature, k.value, ev.time});
            } else if constexpr (std::is_same_v<T, InterfaceUp> || std::is_same_v<T, InterfaceDown>) {
                store.put({interface_entity(k.host, k.index), std::string(feature::kAvailable),
                           std::is_same_v<T, InterfaceUp>, ev.time});
            } else {
                std::string peer;
                for (const auto& h : store.hosts())
                    if (h != k.host) peer = h;
                store.put({path_entity(k.host, k.local, peer, k.remote), k.field, k.value, ev.time});
            }
        },
        ev.kind);
}

// ---------------------------------------------------------------------------
// event loop

namespace {

struct AppStart { std::size_t app; };
struct AppStop { std::size_t app; };
struct Context { std::size_t event; };
struct Wake { std::size_t channel; };

struct Item {
    Millis time = 0;
    int cls = 0;  // 0 application, 1 context, 2 deferred re-evaluation
    std::size_t seq = 0;
    std::variant<AppStart, AppStop, Context, Wake> what;

    friend bool operator>(const Item& a, const Item& b) {
        return std::tie(a.time, a.cls, a.seq) > std::tie(b.time, b.cls, b.seq);
    }
};

struct Runtime {
    Channel channel;
    const Application* app = nullptr;
    ChannelMetrics metrics;
    Millis mark = 0;
    bool violating = false;
    double cost_rate = 0.0;
    double cost_integral = 0.0;  // cost_rate * ms over active time
    std::set<Millis> wakes;
};

bool live(const Channel& c) {
    return c.state == ChannelState::ACTIVE || c.state == ChannelState::SUSPENDED;
}

class Simulator {
public:
    explicit Simulator(const Scenario& s) : s_(s), oracle_(s.user_script) {
        seed_store(store_, s);
        for (const auto& p : s.config.polls) {
            store_.subscribe(ContextStore::Poll{p.interval}, p.entity, p.feature,
                             [this, p](const ContextStore::Delivery& d) {
                                 accrue(d.time);
                                 evaluate_all(d.time, "poll " + p.entity + "." + p.feature);
                                 refresh(d.time);
                             });
        }
        std::size_t seq = 0;
        for (std::size_t k = 0; k < s.applications.size(); ++k) {
            queue_.push({s.applications[k].start, 0, seq++, AppStart{k}});
            queue_.push({s.applications[k].stop, 0, seq++, AppStop{k}});
        }
        for (std::size_t k = 0; k < s.events.size(); ++k)
            queue_.push({s.events[k].time, 1, seq++, Context{k}});
        seq_ = seq;
    }

    SimResult run() {
        while (!queue_.empty()) {
            const Item top = queue_.top();
            if (auto due = store_.next_poll_due();
                due && (*due < top.time || (*due == top.time && top.cls >= 2))) {
                store_.advance_to(*due);
                continue;
            }
            queue_.pop();
            accrue(top.time);
            std::visit([&](const auto& w) { handle(top.time, w); }, top.what);
            refresh(top.time);
        }

        SimResult out;
        out.trace = std::move(trace_);
        out.seed = s_.seed;
        for (auto& rt : channels_) {
            auto m = rt.metrics;
            m.mean_cost_rate = m.active_ms > 0 ? rt.cost_integral / static_cast<double>(m.active_ms) : 0.0;
            out.metrics.push_back(std::move(m));
        }
        return out;
    }

private:
    void handle(Millis now, const AppStart& a) {
        const Application& app = s_.applications[a.app];
        Runtime rt;
        rt.app = &app;
        rt.channel.id = app.id;
        rt.channel.request = {app.id, app.traffic_class, app.direction, app.qos};
        rt.metrics.channel = app.id;
        rt.metrics.window_ms = app.stop - app.start;
        rt.mark = now;
        channels_.push_back(std::move(rt));
        evaluate(channels_.size() - 1, now, "app_start");
    }

    void handle(Millis now, const AppStop& a) {
        for (auto& rt : channels_) {
            if (rt.app != &s_.applications[a.app] || !live(rt.channel)) continue;
            TraceRecord r;
            r.time = now;
            r.channel = rt.channel.id;
            r.cause = Cause::CONTEXT_EVENT;
            r.action = ActionKind::TERMINATE;
            r.old_pair = rt.channel.pair;
            r.event = "app_stop";
            r.threshold = rt.channel.request.qos.acceptable_throughput();
            rt.channel = apply_transition(rt.channel, {ActionKind::TERMINATE, std::nullopt}, now);
            trace_.push_back(std::move(r));
        }
    }

    void handle(Millis now, const Context& c) {
        const SimEvent& ev = s_.events[c.event];
        apply_sim_event(store_, ev);
        evaluate_all(now, ev.describe());
    }

    void handle(Millis now, const Wake& w) {
        auto& rt = channels_[w.channel];
        rt.wakes.erase(now);
        if (live(rt.channel)) evaluate(w.channel, now, "dwell_wake");
    }

    void evaluate_all(Millis now, const std::string& event) {
        for (std::size_t k = 0; k < channels_.size(); ++k)
            if (live(channels_[k].channel)) evaluate(k, now, event);
    }

    void evaluate(std::size_t k, Millis now, const std::string& event) {
        auto& rt = channels_[k];
        const auto& local_id = rt.app->host;
        const auto& remote_id = s_.peer_of(local_id).host_id;
        const HostContextView local = store_.snapshot_host(local_id, now, remote_id);
        const HostContextView remote = store_.snapshot_host(remote_id, now, local_id);
        const EvaluationContext ctx{local, remote, policies(local_id), policies(remote_id),
                                    s_.config.catalog, s_.config.delays};
        UserDecisionOracle oracle = [this](const std::string& ch, double rate, Millis t) {
            return oracle_(ch, rate, t);
        };
        const Decision d = evaluate_event(rt.channel, now, ctx, oracle, s_.config.dwell);

        TraceRecord r;
        r.time = now;
        r.channel = rt.channel.id;
        r.cause = d.cause;
        r.action = d.action.kind;
        r.old_pair = rt.channel.pair;
        r.mmp = {{local_id, d.selection.local_mmp.id}, {remote_id, d.selection.remote_mmp.id}};
        r.event = event;
        r.detail = d.detail;
        r.mode = d.selection.mode;
        r.estimate = d.estimate;
        r.current_throughput = d.current_throughput;
        r.threshold = rt.channel.request.qos.acceptable_throughput();
        r.prompted = d.prompted;

        rt.channel = commit(rt.channel, d, now);
        r.new_pair = rt.channel.pair;
        if (r.new_pair) r.cost = d.selection.combined_cost(*r.new_pair);

        switch (d.action.kind) {
            case ActionKind::SWITCH: ++rt.metrics.switch_count; break;
            case ActionKind::SUSPEND: ++rt.metrics.suspend_count; break;
            case ActionKind::RESUME: ++rt.metrics.resume_count; break;
            default: break;
        }
        if (d.retry_at && *d.retry_at > now && rt.wakes.insert(*d.retry_at).second)
            queue_.push({*d.retry_at, 2, seq_++, Wake{k}});

        spdlog::debug("t={} {} {} {} ({})", now, r.channel, to_string(r.action), to_string(r.cause),
                      r.detail);
        trace_.push_back(std::move(r));
    }

    const PolicySet& policies(const std::string& host) const {
        static const PolicySet kEmpty;
        auto it = s_.policies.find(host);
        return it == s_.policies.end() ? kEmpty : it->second;
    }

    void accrue(Millis now) {
        for (auto& rt : channels_) {
            if (rt.channel.state == ChannelState::TERMINATED) continue;
            const Millis dt = now - rt.mark;
            switch (rt.channel.state) {
                case ChannelState::ESTABLISHING: rt.metrics.pre_establish_ms += dt; break;
                case ChannelState::SUSPENDED: rt.metrics.suspended_ms += dt; break;
                case ChannelState::ACTIVE:
                    rt.metrics.active_ms += dt;
                    rt.cost_integral += rt.cost_rate * static_cast<double>(dt);
                    if (rt.violating) rt.metrics.qos_violation_ms += dt;
                    break;
                case ChannelState::TERMINATED: break;
            }
            rt.mark = now;
        }
    }

    /// Re-reads the active pair's throughput and charge rate after a change.
    void refresh(Millis now) {
        for (auto& rt : channels_) {
            if (rt.channel.state != ChannelState::ACTIVE) continue;
            const auto& local_id = rt.app->host;
            const auto& remote_id = s_.peer_of(local_id).host_id;
            const auto local = store_.snapshot_host(local_id, now, remote_id);
            const auto remote = store_.snapshot_host(remote_id, now, local_id);
            const double tp = pair_throughput(*rt.channel.pair, local, remote);
            rt.violating = tp < rt.channel.request.qos.acceptable_throughput();
            const auto* snap = local.find(rt.channel.pair->local);
            rt.cost_rate = snap ? snap->charge_rate : 0.0;
        }
    }

    const Scenario& s_;
    ContextStore store_;
    ScriptedOracle oracle_;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue_;
    std::vector<Runtime> channels_;
    std::vector<TraceRecord> trace_;
    std::size_t seq_ = 0;
};

ojson pair_or_null(const std::optional<InterfacePair>& p) {
    return p ? to_json(*p) : ojson(nullptr);
}

}  // namespace

SimResult run_simulation(const Scenario& scenario) { return Simulator(scenario).run(); }

ojson to_json(const TraceRecord& r) {
    ojson j;
    j["time"] = r.time;
    j["channel"] = r.channel;
    j["cause"] = to_string(r.cause);
    j["action"] = to_string(r.action);
    j["old_pair"] = pair_or_null(r.old_pair);
    j["new_pair"] = pair_or_null(r.new_pair);
    if (r.mmp.empty()) {
        j["mmp"] = nullptr;
    } else {
        ojson m;
        for (const auto& [host, id] : r.mmp) m[host] = id;
        j["mmp"] = std::move(m);
    }
    j["cost"] = r.cost ? ojson(*r.cost) : ojson(nullptr);
    j["event"] = r.event;
    j["detail"] = r.detail;
    j["mode"] = to_string(r.mode);
    if (r.estimate) {
        ojson e;
        e["switch_delay"] = r.estimate->switch_delay;
        e["projected_throughput"] = r.estimate->projected_throughput;
        e["projected_delay"] = r.estimate->projected_delay;
        e["cost_rate"] = r.estimate->cost_rate;
        e["acceptable_qos"] = r.estimate->acceptable_qos;
        e["acceptable_cost"] = r.estimate->acceptable_cost;
        j["estimate"] = std::move(e);
    } else {
        j["estimate"] = nullptr;
    }
    j["current_throughput"] = r.current_throughput;
    j["threshold"] = r.threshold;
    j["prompted"] = r.prompted;
    return j;
}

std::string trace_to_jsonl(const std::vector<TraceRecord>& trace) {
    std::string out;
    for (const auto& r : trace) {
        out += to_json(r).dump();
        out += '\n';
    }
    return out;
}

ojson metrics_to_json(const SimResult& result) {
    ojson out;
    out["seed"] = result.seed;
    out["channels"] = ojson::array();
    for (const auto& m : result.metrics) {
        ojson j;
        j["channel"] = m.channel;
        j["switch_count"] = m.switch_count;
        j["suspend_count"] = m.suspend_count;
        j["resume_count"] = m.resume_count;
        j["window_ms"] = m.window_ms;
        j["pre_establish_ms"] = m.pre_establish_ms;
        j["active_ms"] = m.active_ms;
        j["suspended_ms"] = m.suspended_ms;
        j["qos_violation_ms"] = m.qos_violation_ms;
        j["mean_cost_rate"] = m.mean_cost_rate;
        out["channels"].push_back(std::move(j));
    }
    return out;
}

}  // namespace conman
