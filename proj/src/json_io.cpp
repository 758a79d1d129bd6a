#include "conman/json_io.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "json_util.hpp"

namespace conman {

using detail::allow_keys;
using detail::get_bool;
using detail::get_double;
using detail::get_enum;
using detail::get_int;
using detail::get_string;
using nlohmann::json;

json parse_json_text(std::string_view text) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw SyntaxError(e.what());
    }
}

namespace {

Target target_from(const json& j, const std::string& where) {
    if (!j.is_string()) throw SchemaError(where + ": target must be a string");
    auto t = Target::parse(j.get<std::string>());
    if (!t) throw SchemaError(where + ": bad target \"" + j.get<std::string>() + "\"");
    return *t;
}

Policy policy_from_json(const json& j, std::size_t order) {
    const std::string where = "policies[" + std::to_string(order) + "]";
    allow_keys(j, {"id", "scope", "traffic_class", "direction", "rc", "end_type", "use", "default",
                   "priority", "weight"},
               where);
    Policy p;
    p.order = order;
    p.id = get_string(j, "id", where);
    p.scope = get_enum<Scope>(j, "scope", where, parse_scope);
    p.end_type = get_enum<EndType>(j, "end_type", where, parse_end_type);
    if (j.contains("traffic_class"))
        p.traffic_class = get_enum<TrafficClass>(j, "traffic_class", where, parse_traffic_class);
    if (j.contains("direction"))
        p.direction = get_enum<Direction>(j, "direction", where, parse_direction);
    if (j.contains("rc")) {
        const auto& arr = j.at("rc");
        detail::require_array(arr, where + ".rc");
        RequirementCondition rc;
        for (std::size_t k = 0; k < arr.size(); ++k) {
            const std::string w = where + ".rc[" + std::to_string(k) + "]";
            allow_keys(arr[k], {"metric", "cmp", "bound"}, w);
            Predicate pred;
            pred.metric = get_enum<Metric>(arr[k], "metric", w, parse_metric);
            pred.cmp = get_enum<Comparator>(arr[k], "cmp", w, [](std::string_view s) {
                return s == "le"   ? std::optional(Comparator::LE)
                       : s == "ge" ? std::optional(Comparator::GE)
                                   : std::nullopt;
            });
            pred.bound = get_double(arr[k], "bound", w);
            rc.predicates.push_back(pred);
        }
        p.rc = std::move(rc);
    }

    int kinds = 0;
    for (auto key : {"use", "default", "priority", "weight"}) kinds += j.contains(key) ? 1 : 0;
    if (kinds != 1)
        throw SchemaError(where + ": exactly one of use/default/priority/weight is required");

    if (j.contains("use")) {
        p.ei = UseItem{target_from(j.at("use"), where + ".use")};
    } else if (j.contains("default")) {
        p.ei = DefaultItem{target_from(j.at("default"), where + ".default")};
    } else if (j.contains("priority")) {
        const auto& arr = j.at("priority");
        detail::require_array(arr, where + ".priority");
        PriorityItem item;
        for (std::size_t k = 0; k < arr.size(); ++k) {
            const std::string w = where + ".priority[" + std::to_string(k) + "]";
            allow_keys(arr[k], {"target", "value"}, w);
            item.entries.push_back({target_from(detail::field(arr[k], "target", w), w + ".target"),
                                    get_int(arr[k], "value", w)});
        }
        p.ei = std::move(item);
    } else {
        const auto& arr = j.at("weight");
        detail::require_array(arr, where + ".weight");
        WeightItem item;
        for (std::size_t k = 0; k < arr.size(); ++k) {
            const std::string w = where + ".weight[" + std::to_string(k) + "]";
            allow_keys(arr[k], {"factor", "w"}, w);
            item.entries.push_back({get_enum<FactorName>(arr[k], "factor", w, parse_factor),
                                    get_double(arr[k], "w", w)});
        }
        p.ei = std::move(item);
    }
    return p;
}

}  // namespace

PolicySet policy_set_from_json(const json& doc) {
    allow_keys(doc, {"policies"}, "policy document");
    const auto& arr = detail::field(doc, "policies", "policy document");
    detail::require_array(arr, "policies");

    PolicySet set;
    for (std::size_t k = 0; k < arr.size(); ++k) set.push_back(policy_from_json(arr[k], k));

    std::vector<std::string> violations;
    std::set<std::string> ids;
    for (const auto& p : set) {
        if (!ids.insert(p.id).second) violations.push_back("policy '" + p.id + "': duplicate id");
        for (auto& v : validate_policy(p)) violations.push_back("policy '" + p.id + "': " + v);
    }
    if (!violations.empty()) throw ValidationError(std::move(violations));
    return set;
}

PolicySet parse_policy_set(std::string_view text) {
    return policy_set_from_json(parse_json_text(text));
}

FactorCatalog catalog_from_json(const json& arr) {
    detail::require_array(arr, "factors");
    std::vector<FactorSpec> specs;
    for (std::size_t k = 0; k < arr.size(); ++k) {
        const std::string w = "factors[" + std::to_string(k) + "]";
        allow_keys(arr[k], {"factor", "lo", "hi", "direction", "end_to_end"}, w);
        FactorSpec s;
        s.name = get_enum<FactorName>(arr[k], "factor", w, parse_factor);
        s.lo = get_double(arr[k], "lo", w);
        s.hi = get_double(arr[k], "hi", w);
        s.direction = get_enum<Better>(arr[k], "direction", w, [](std::string_view v) {
            return v == "lower"    ? std::optional(Better::LOWER)
                   : v == "higher" ? std::optional(Better::HIGHER)
                                   : std::nullopt;
        });
        s.end_to_end = arr[k].contains("end_to_end") ? get_bool(arr[k], "end_to_end", w)
                                                     : is_end_to_end(s.name);
        specs.push_back(s);
    }
    return FactorCatalog::with_overrides(std::move(specs));
}

DelayTable delays_from_json(const json& arr, bool use_default_delays) {
    detail::require_array(arr, "delays");
    DelayTable table;
    table.use_default_delays = use_default_delays;
    for (std::size_t k = 0; k < arr.size(); ++k) {
        const std::string w = "delays[" + std::to_string(k) + "]";
        allow_keys(arr[k], {"from", "to", "delay_ms"}, w);
        const auto delay = get_int(arr[k], "delay_ms", w);
        if (delay < 0) throw SchemaError(w + ".delay_ms: must be non-negative");
        table.entries[{TechType::parse(get_string(arr[k], "from", w)).name(),
                       TechType::parse(get_string(arr[k], "to", w)).name()}] = delay;
    }
    return table;
}

QoSRequirement qos_from_json(const json& obj) {
    const std::string w = "qos";
    allow_keys(obj, {"min_throughput", "max_delay", "max_cost_rate", "max_disruption",
                     "min_acceptable"},
               w);
    QoSRequirement q;
    q.min_throughput = get_double(obj, "min_throughput", w);
    q.max_delay = get_double(obj, "max_delay", w);
    q.max_cost_rate = get_double(obj, "max_cost_rate", w);
    q.max_disruption = get_double(obj, "max_disruption", w);
    if (obj.contains("min_acceptable")) q.min_acceptable = get_double(obj, "min_acceptable", w);
    return q;
}

HostContextView view_from_json(const json& obj) {
    allow_keys(obj, {"host_id", "as_of", "interfaces", "e2e"}, "host view");
    HostContextView view;
    view.host_id = get_string(obj, "host_id", "host view");
    if (obj.contains("as_of")) view.as_of = get_int(obj, "as_of", "host view");
    const std::string where = "host " + view.host_id;

    const auto& ifaces = detail::field(obj, "interfaces", where);
    detail::require_array(ifaces, where + ".interfaces");
    std::set<InterfaceIndex> seen;
    for (std::size_t k = 0; k < ifaces.size(); ++k) {
        const auto& j = ifaces[k];
        const std::string w = where + ".interfaces[" + std::to_string(k) + "]";
        allow_keys(j, {"index", "tech", "max_speed", "subscribed", "available", "signal_strength",
                       "snr", "charge_rate", "power_draw", "current_speed"},
                   w);
        InterfaceSnapshot s;
        const auto index = get_int(j, "index", w);
        if (index < 0) throw SchemaError(w + ".index: must be non-negative");
        s.descriptor.host_id = view.host_id;
        s.descriptor.index = static_cast<InterfaceIndex>(index);
        s.descriptor.tech = TechType::parse(get_string(j, "tech", w));
        s.descriptor.max_speed = get_double(j, "max_speed", w);
        if (!(s.descriptor.max_speed > 0)) throw SchemaError(w + ".max_speed: must be positive");
        if (j.contains("subscribed")) s.descriptor.subscribed = get_bool(j, "subscribed", w);
        if (j.contains("available")) s.available = get_bool(j, "available", w);
        if (j.contains("signal_strength")) s.signal_strength = get_double(j, "signal_strength", w);
        if (j.contains("snr")) s.snr = get_double(j, "snr", w);
        if (j.contains("charge_rate")) s.charge_rate = get_double(j, "charge_rate", w);
        if (j.contains("power_draw")) s.power_draw = get_double(j, "power_draw", w);
        if (j.contains("current_speed")) s.current_speed = get_double(j, "current_speed", w);
        if (!seen.insert(s.descriptor.index).second)
            throw SchemaError(w + ": duplicate interface index");
        view.interfaces.push_back(std::move(s));
    }
    if (view.interfaces.empty()) throw SchemaError(where + ": needs at least one interface");
    std::sort(view.interfaces.begin(), view.interfaces.end(), [](const auto& a, const auto& b) {
        return a.descriptor.index < b.descriptor.index;
    });

    if (obj.contains("e2e")) {
        const auto& arr = obj.at("e2e");
        detail::require_array(arr, where + ".e2e");
        for (std::size_t k = 0; k < arr.size(); ++k) {
            const auto& j = arr[k];
            const std::string w = where + ".e2e[" + std::to_string(k) + "]";
            allow_keys(j, {"local", "remote", "rtt", "bandwidth_up", "bandwidth_down",
                           "packet_loss", "jitter"},
                       w);
            const auto local = get_int(j, "local", w);
            const auto remote = get_int(j, "remote", w);
            if (local < 0 || remote < 0) throw SchemaError(w + ": indices must be non-negative");
            if (!seen.contains(static_cast<InterfaceIndex>(local)))
                throw ReferenceError(w + ": unknown local interface " + std::to_string(local));
            EndToEndQoS q;
            if (j.contains("rtt")) q.rtt = get_double(j, "rtt", w);
            if (j.contains("bandwidth_up")) q.bandwidth_up = get_double(j, "bandwidth_up", w);
            if (j.contains("bandwidth_down")) q.bandwidth_down = get_double(j, "bandwidth_down", w);
            if (j.contains("packet_loss")) q.packet_loss = get_double(j, "packet_loss", w);
            if (j.contains("jitter")) q.jitter = get_double(j, "jitter", w);
            view.e2e[{static_cast<InterfaceIndex>(local), static_cast<InterfaceIndex>(remote)}] = q;
        }
    }
    return view;
}

ojson to_json(const HostContextView& view) {
    ojson out;
    out["host_id"] = view.host_id;
    out["as_of"] = view.as_of;
    out["interfaces"] = ojson::array();
    for (const auto& s : view.interfaces) {
        ojson j;
        j["index"] = s.descriptor.index;
        j["tech"] = s.descriptor.tech.name();
        j["max_speed"] = s.descriptor.max_speed;
        j["subscribed"] = s.descriptor.subscribed;
        j["available"] = s.available;
        j["signal_strength"] = s.signal_strength;
        j["snr"] = s.snr;
        j["charge_rate"] = s.charge_rate;
        j["power_draw"] = s.power_draw;
        j["current_speed"] = s.current_speed;
        out["interfaces"].push_back(std::move(j));
    }
    out["e2e"] = ojson::array();
    for (const auto& [pair, q] : view.e2e) {
        ojson j;
        j["local"] = pair.local;
        j["remote"] = pair.remote;
        j["rtt"] = q.rtt;
        j["bandwidth_up"] = q.bandwidth_up;
        j["bandwidth_down"] = q.bandwidth_down;
        j["packet_loss"] = q.packet_loss;
        j["jitter"] = q.jitter;
        out["e2e"].push_back(std::move(j));
    }
    return out;
}

ojson to_json(const CostMatrix& m) {
    ojson out;
    out["shape"] = m.shape() == CostShape::MATRIX ? "matrix" : "vector";
    out["rows"] = m.rows();
    out["cols"] = m.cols();
    out["entries"] = ojson::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        ojson row = ojson::array();
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if (m.at(r, c).is_finite())
                row.push_back(m.at(r, c).value());
            else
                row.push_back("inf");
        }
        out["entries"].push_back(std::move(row));
    }
    return out;
}

ojson to_json(InterfacePair p) { return ojson::array({p.local, p.remote}); }

ojson to_json(const Policy& p) {
    ojson out;
    out["id"] = p.id;
    out["scope"] = to_string(p.scope);
    out["end_type"] = to_string(p.end_type);
    return out;
}

}  // namespace conman
