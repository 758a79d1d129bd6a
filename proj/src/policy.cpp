#include "conman/policy.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>
#include <utility>

namespace conman {

namespace {

template <typename E, std::size_t N>
std::optional<E> lookup(const std::array<std::pair<E, std::string_view>, N>& table,
                        std::string_view s) {
    for (const auto& [value, name] : table)
        if (name == s) return value;
    return std::nullopt;
}

template <typename E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N>& table, E e) {
    for (const auto& [value, name] : table)
        if (value == e) return name;
    return "?";
}

constexpr std::array<std::pair<Scope, std::string_view>, 3> kScopes{{
    {Scope::CHANNEL, "channel"},
    {Scope::APPLICATION, "application"},
    {Scope::DEVICE, "device"},
}};

constexpr std::array<std::pair<EndType, std::string_view>, 2> kEndTypes{{
    {EndType::MASTER, "master"},
    {EndType::SLAVE, "slave"},
}};

constexpr std::array<std::pair<Metric, std::string_view>, 7> kMetrics{{
    {Metric::RTT_MS, "rtt_ms"},
    {Metric::BANDWIDTH_UP_KBPS, "bandwidth_up_kbps"},
    {Metric::BANDWIDTH_DOWN_KBPS, "bandwidth_down_kbps"},
    {Metric::PACKET_LOSS, "packet_loss"},
    {Metric::SIGNAL_DBM, "signal_dbm"},
    {Metric::CHARGE_RATE, "charge_rate"},
    {Metric::SPEED_KBPS, "speed_kbps"},
}};

constexpr std::array<std::pair<FactorName, std::string_view>, 7> kFactors{{
    {FactorName::CHARGE_RATE, "charge_rate"},
    {FactorName::RTT_MS, "rtt_ms"},
    {FactorName::PACKET_LOSS, "packet_loss"},
    {FactorName::SIGNAL_DBM, "signal_dbm"},
    {FactorName::BANDWIDTH_KBPS, "bandwidth_kbps"},
    {FactorName::POWER_MW, "power_mw"},
    {FactorName::SPEED_KBPS, "speed_kbps"},
}};

std::string fmt_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

constexpr std::array<Scope, 3> kScanOrder{Scope::CHANNEL, Scope::APPLICATION, Scope::DEVICE};

}  // namespace

std::string_view to_string(Scope s) { return name_of(kScopes, s); }
std::string_view to_string(EndType e) { return name_of(kEndTypes, e); }
std::string_view to_string(Metric m) { return name_of(kMetrics, m); }
std::string_view to_string(FactorName f) { return name_of(kFactors, f); }
std::optional<Scope> parse_scope(std::string_view s) { return lookup(kScopes, s); }
std::optional<EndType> parse_end_type(std::string_view s) { return lookup(kEndTypes, s); }
std::optional<Metric> parse_metric(std::string_view s) { return lookup(kMetrics, s); }
std::optional<FactorName> parse_factor(std::string_view s) { return lookup(kFactors, s); }

bool RequirementCondition::references_end_to_end() const {
    return std::any_of(predicates.begin(), predicates.end(),
                       [](const Predicate& p) { return is_end_to_end(p.metric); });
}

bool Target::matches(InterfaceIndex index, const TechType& tech) const {
    if (const auto* i = std::get_if<InterfaceIndex>(&value)) return *i == index;
    return std::get<TechType>(value) == tech;
}

std::string Target::to_string() const {
    if (const auto* i = std::get_if<InterfaceIndex>(&value)) return "index:" + std::to_string(*i);
    return std::get<TechType>(value).name();
}

std::optional<Target> Target::parse(std::string_view s) {
    if (s.empty()) return std::nullopt;
    constexpr std::string_view prefix = "index:";
    if (s.substr(0, prefix.size()) == prefix) {
        const auto digits = s.substr(prefix.size());
        InterfaceIndex idx = 0;
        auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), idx);
        if (digits.empty() || ec != std::errc{} || ptr != digits.data() + digits.size())
            return std::nullopt;
        return Target::index(idx);
    }
    return Target::tech(TechType::parse(s));
}

std::vector<std::string> validate_policy(const Policy& policy) {
    std::vector<std::string> out;
    if (policy.id.empty()) out.emplace_back("policy id is empty");

    if (policy.rc) {
        for (const auto& p : policy.rc->predicates)
            if (!std::isfinite(p.bound))
                out.push_back("requirement bound for " + std::string(to_string(p.metric)) +
                              " is not finite");
    }

    std::visit(
        [&](const auto& item) {
            using T = std::decay_t<decltype(item)>;
            if constexpr (std::is_same_v<T, PriorityItem>) {
                std::set<std::string> seen;
                for (const auto& e : item.entries) {
                    if (!seen.insert(e.target.to_string()).second)
                        out.push_back("duplicate target " + e.target.to_string());
                    if (e.priority < 0)
                        out.push_back("priority of " + e.target.to_string() + " is negative");
                    else if (e.priority > 1'000'000)
                        out.push_back("priority of " + e.target.to_string() + " exceeds MAX");
                }
            } else if constexpr (std::is_same_v<T, WeightItem>) {
                double sum = 0.0;
                std::set<FactorName> seen;
                for (const auto& e : item.entries) {
                    if (!std::isfinite(e.weight) || e.weight < 0.0)
                        out.push_back("weight of " + std::string(to_string(e.factor)) +
                                      " must be a non-negative number");
                    if (!seen.insert(e.factor).second)
                        out.push_back("duplicate factor " + std::string(to_string(e.factor)));
                    sum += e.weight;
                }
                if (!(std::fabs(sum - 1.0) <= kWeightSumTolerance))
                    out.push_back("weights sum to " + fmt_number(sum) + " ≠ 1");
            }
        },
        policy.ei);
    return out;
}

std::optional<int> matching_value(const Policy& policy, const ChannelRequest& request) {
    int mv = 0;
    if (policy.traffic_class) {
        if (*policy.traffic_class != request.traffic_class) return std::nullopt;
        ++mv;
    }
    if (policy.direction) {
        const bool ok = *policy.direction == Direction::BIDIRECTIONAL ||
                        *policy.direction == request.direction;
        if (!ok) return std::nullopt;
        ++mv;
    }
    return mv;
}

std::optional<Policy> traverse_policies(const PolicySet& policies, const ChannelRequest& request) {
    for (Scope scope : kScanOrder) {
        const Policy* best = nullptr;
        int best_mv = -1;
        for (const auto& p : policies) {
            if (p.scope != scope) continue;
            auto mv = matching_value(p, request);
            if (!mv) continue;
            if (*mv > best_mv || (*mv == best_mv && p.order < best->order)) {
                best = &p;
                best_mv = *mv;
            }
        }
        if (best) return *best;
    }
    return std::nullopt;
}

Policy os_fallback_policy(InterfaceIndex target) {
    Policy p;
    p.id = std::string(kOsFallbackId);
    p.scope = Scope::DEVICE;
    p.ei = DefaultItem{Target::index(target)};
    p.end_type = EndType::SLAVE;
    return p;
}

}  // namespace conman
