#include "conman/cost.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

#include "conman/error.hpp"

namespace conman {

Cost Cost::finite(double v) {
    if (!(v >= 0.0 && v <= kMax)) throw std::out_of_range("finite cost out of [0, MAX]");
    return Cost(v, false);
}

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols, CostShape shape, Cost fill)
    : rows_(rows), cols_(cols), shape_(shape), entries_(rows * cols, fill) {
    if (rows == 0 || cols == 0) throw ShapeError("cost matrix needs at least one row and column");
    if (shape == CostShape::VECTOR && cols != 1) throw ShapeError("a cost vector has one column");
}

CostMatrix CostMatrix::broadcast(std::size_t cols) const {
    if (shape_ == CostShape::MATRIX) return *this;
    CostMatrix out(rows_, cols, CostShape::MATRIX);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols; ++c) out.at(r, c) = at(r, 0);
    return out;
}

FactorCatalog::FactorCatalog(std::vector<FactorSpec> specs) : specs_(std::move(specs)) {
    std::set<FactorName> seen;
    for (const auto& s : specs_) {
        const std::string name(to_string(s.name));
        if (!seen.insert(s.name).second) throw SchemaError("duplicate factor spec " + name);
        if (!(std::isfinite(s.lo) && std::isfinite(s.hi) && s.lo < s.hi))
            throw SchemaError("factor " + name + " needs finite lo < hi");
        if (s.end_to_end != is_end_to_end(s.name))
            throw SchemaError("factor " + name + (s.end_to_end ? " is local" : " is end-to-end"));
    }
}

FactorCatalog FactorCatalog::defaults() {
    return FactorCatalog({
        {FactorName::CHARGE_RATE, 0.0, 5.0, Better::LOWER, false},
        {FactorName::RTT_MS, 0.0, 1000.0, Better::LOWER, true},
        {FactorName::PACKET_LOSS, 0.0, 1.0, Better::LOWER, true},
        {FactorName::SIGNAL_DBM, -100.0, -40.0, Better::HIGHER, false},
        {FactorName::BANDWIDTH_KBPS, 0.0, 10000.0, Better::HIGHER, true},
        {FactorName::POWER_MW, 0.0, 3000.0, Better::LOWER, false},
        {FactorName::SPEED_KBPS, 0.0, 54000.0, Better::HIGHER, false},
    });
}

FactorCatalog FactorCatalog::with_overrides(std::vector<FactorSpec> overrides) {
    static_cast<void>(FactorCatalog(overrides));  // validates, rejects duplicates
    auto specs = defaults().specs_;
    for (auto& s : specs)
        for (const auto& o : overrides)
            if (o.name == s.name) s = o;
    return FactorCatalog(std::move(specs));
}

const FactorSpec* FactorCatalog::find(FactorName name) const {
    for (const auto& s : specs_)
        if (s.name == name) return &s;
    return nullptr;
}

namespace {

std::optional<double> metric_reading(Metric m, const InterfaceSnapshot& local,
                                     const EndToEndQoS* path) {
    switch (m) {
        case Metric::SIGNAL_DBM: return local.signal_strength;
        case Metric::CHARGE_RATE: return local.charge_rate;
        case Metric::SPEED_KBPS: return local.current_speed;
        default: break;
    }
    if (!path) return std::nullopt;
    switch (m) {
        case Metric::RTT_MS: return path->rtt;
        case Metric::BANDWIDTH_UP_KBPS: return path->bandwidth_up;
        case Metric::BANDWIDTH_DOWN_KBPS: return path->bandwidth_down;
        case Metric::PACKET_LOSS: return path->packet_loss;
        default: return std::nullopt;
    }
}

bool weights_need_path(const Policy& policy, const FactorCatalog& catalog) {
    const auto* w = std::get_if<WeightItem>(&policy.ei);
    if (!w) return false;
    return std::any_of(w->entries.begin(), w->entries.end(), [&](const WeightEntry& e) {
        const auto* spec = catalog.find(e.factor);
        return spec ? spec->end_to_end : is_end_to_end(e.factor);
    });
}

/// Priority of an interface: an index entry beats a technology entry.
std::optional<long long> priority_of(const PriorityItem& item, const InterfaceDescriptor& d) {
    std::optional<long long> by_tech;
    for (const auto& e : item.entries) {
        if (!e.target.matches(d.index, d.tech)) continue;
        if (e.target.is_index()) return e.priority;
        if (!by_tech) by_tech = e.priority;
    }
    return by_tech;
}

}  // namespace

bool requirement_satisfied(const RequirementCondition& rc, const InterfaceSnapshot& local,
                           const EndToEndQoS* path) {
    for (const auto& p : rc.predicates) {
        auto reading = metric_reading(p.metric, local, path);
        if (!reading)
            throw MissingContext("no end-to-end data for " + std::string(to_string(p.metric)));
        if (!p.holds(*reading)) return false;
    }
    return true;
}

double normalize_factor(const FactorSpec& spec, double raw) {
    const double t = std::clamp((raw - spec.lo) / (spec.hi - spec.lo), 0.0, 1.0);
    return spec.direction == Better::LOWER ? t : 1.0 - t;
}

double weight_cost(std::span<const WeightEntry> entries,
                   const std::map<FactorName, double>& readings, const FactorCatalog& catalog) {
    double sum = 0.0;
    for (const auto& e : entries) {
        const auto* spec = catalog.find(e.factor);
        if (!spec) throw MissingReading("no factor spec for " + std::string(to_string(e.factor)));
        auto it = readings.find(e.factor);
        if (it == readings.end())
            throw MissingReading("no reading for " + std::string(to_string(e.factor)));
        sum += e.weight * normalize_factor(*spec, it->second);
    }
    return sum;
}

std::optional<double> factor_reading(FactorName f, const InterfaceSnapshot& local,
                                     const EndToEndQoS* path) {
    switch (f) {
        case FactorName::CHARGE_RATE: return local.charge_rate;
        case FactorName::SIGNAL_DBM: return local.signal_strength;
        case FactorName::POWER_MW: return local.power_draw;
        case FactorName::SPEED_KBPS: return local.current_speed;
        default: break;
    }
    if (!path) return std::nullopt;
    switch (f) {
        case FactorName::RTT_MS: return path->rtt;
        case FactorName::PACKET_LOSS: return path->packet_loss;
        case FactorName::BANDWIDTH_KBPS: return std::min(path->bandwidth_up, path->bandwidth_down);
        default: return std::nullopt;
    }
}

bool references_end_to_end(const Policy& policy, const FactorCatalog& catalog) {
    return (policy.rc && policy.rc->references_end_to_end()) || weights_need_path(policy, catalog);
}

CostMatrix compute_cost_matrix(const Policy& mmp, const HostContextView& local,
                               std::optional<std::span<const InterfaceIndex>> remote,
                               const FactorCatalog& catalog) {
    if (local.interfaces.empty()) throw ShapeError("host " + local.host_id + " has no interfaces");
    const bool e2e = references_end_to_end(mmp, catalog);
    if (e2e && (!remote || remote->empty()))
        throw ShapeError("policy " + mmp.id + " uses end-to-end factors but no remote interfaces given");

    const std::size_t m = local.interfaces.size();
    const std::size_t n = e2e ? remote->size() : 1;
    CostMatrix costs(m, n, e2e ? CostShape::MATRIX : CostShape::VECTOR);

    for (std::size_t j = 0; j < n; ++j) {
        std::vector<std::size_t> qualified;
        for (std::size_t i = 0; i < m; ++i) {
            const auto& snap = local.interfaces[i];
            const EndToEndQoS* path =
                e2e ? local.path({snap.descriptor.index, (*remote)[j]}) : nullptr;
            bool ok = snap.available && snap.descriptor.subscribed;
            if (ok && e2e && !path) ok = false;
            if (ok && mmp.rc) ok = requirement_satisfied(*mmp.rc, snap, path);
            if (!ok) continue;  // stays INFINITE
            costs.at(i, j) = Cost::max();
            qualified.push_back(i);
        }

        std::visit(
            [&](const auto& item) {
                using T = std::decay_t<decltype(item)>;
                if constexpr (std::is_same_v<T, UseItem> || std::is_same_v<T, DefaultItem>) {
                    for (auto i : qualified) {
                        const auto& d = local.interfaces[i].descriptor;
                        if (item.target.matches(d.index, d.tech)) {
                            costs.at(i, j) = Cost::finite(0.0);
                            break;
                        }
                    }
                } else if constexpr (std::is_same_v<T, PriorityItem>) {
                    for (auto i : qualified)
                        if (auto p = priority_of(item, local.interfaces[i].descriptor))
                            costs.at(i, j) = Cost::finite(static_cast<double>(*p));
                } else {
                    for (auto i : qualified) {
                        const auto& snap = local.interfaces[i];
                        const EndToEndQoS* path =
                            e2e ? local.path({snap.descriptor.index, (*remote)[j]}) : nullptr;
                        std::map<FactorName, double> readings;
                        for (const auto& e : item.entries)
                            if (auto r = factor_reading(e.factor, snap, path)) readings[e.factor] = *r;
                        const double c = weight_cost(item.entries, readings, catalog);
                        costs.at(i, j) = Cost::finite(std::clamp(c, 0.0, 1.0));
                    }
                }
            },
            mmp.ei);
    }
    return costs;
}

}  // namespace conman
