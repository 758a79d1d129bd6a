#pragma once

// Connectivity policies P = (TC, RC, EI): an optional traffic-class selector,
// an optional requirement condition and a mandatory evaluation item, each
// with a scope and a channel end type. The traverse picks the most matching
// policy for a channel request.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "conman/types.hpp"

namespace conman {

enum class Scope { CHANNEL, APPLICATION, DEVICE };
enum class EndType { MASTER, SLAVE };

enum class Metric {
    RTT_MS,
    BANDWIDTH_UP_KBPS,
    BANDWIDTH_DOWN_KBPS,
    PACKET_LOSS,
    SIGNAL_DBM,
    CHARGE_RATE,
    SPEED_KBPS,
};

/// Metrics that describe an interface pair rather than one local interface.
constexpr bool is_end_to_end(Metric m) {
    return m == Metric::RTT_MS || m == Metric::BANDWIDTH_UP_KBPS ||
           m == Metric::BANDWIDTH_DOWN_KBPS || m == Metric::PACKET_LOSS;
}

enum class Comparator { LE, GE };

struct Predicate {
    Metric metric = Metric::RTT_MS;
    Comparator cmp = Comparator::LE;
    double bound = 0.0;

    bool holds(double reading) const {
        return cmp == Comparator::LE ? reading <= bound : reading >= bound;
    }
    friend bool operator==(const Predicate&, const Predicate&) = default;
};

/// Conjunction of predicates; empty means "no requirement".
struct RequirementCondition {
    std::vector<Predicate> predicates;

    bool references_end_to_end() const;
    friend bool operator==(const RequirementCondition&, const RequirementCondition&) = default;
};

enum class FactorName {
    CHARGE_RATE,
    RTT_MS,
    PACKET_LOSS,
    SIGNAL_DBM,
    BANDWIDTH_KBPS,
    POWER_MW,
    SPEED_KBPS,
};

/// An interface addressed either by its index or by its technology.
struct Target {
    std::variant<InterfaceIndex, TechType> value;

    static Target index(InterfaceIndex i) { return Target{i}; }
    static Target tech(TechType t) { return Target{std::move(t)}; }

    bool is_index() const { return std::holds_alternative<InterfaceIndex>(value); }
    bool matches(InterfaceIndex index, const TechType& tech) const;
    /// "index:3" or a technology name.
    std::string to_string() const;
    static std::optional<Target> parse(std::string_view s);

    friend bool operator==(const Target&, const Target&) = default;
};

struct UseItem {
    Target target;
    friend bool operator==(const UseItem&, const UseItem&) = default;
};
struct DefaultItem {
    Target target;
    friend bool operator==(const DefaultItem&, const DefaultItem&) = default;
};
struct PriorityEntry {
    Target target;
    long long priority = 0;
    friend bool operator==(const PriorityEntry&, const PriorityEntry&) = default;
};
struct PriorityItem {
    std::vector<PriorityEntry> entries;
    friend bool operator==(const PriorityItem&, const PriorityItem&) = default;
};
struct WeightEntry {
    FactorName factor = FactorName::CHARGE_RATE;
    double weight = 0.0;
    friend bool operator==(const WeightEntry&, const WeightEntry&) = default;
};
struct WeightItem {
    std::vector<WeightEntry> entries;
    friend bool operator==(const WeightItem&, const WeightItem&) = default;
};

using EvaluationItem = std::variant<UseItem, DefaultItem, PriorityItem, WeightItem>;

struct Policy {
    std::string id;
    Scope scope = Scope::DEVICE;
    std::optional<TrafficClass> traffic_class;
    std::optional<Direction> direction;
    std::optional<RequirementCondition> rc;
    EvaluationItem ei;
    EndType end_type = EndType::SLAVE;
    std::size_t order = 0;

    friend bool operator==(const Policy&, const Policy&) = default;
};

using PolicySet = std::vector<Policy>;

struct ChannelRequest {
    std::string application_id;
    TrafficClass traffic_class = TrafficClass::INTERACTIVE;
    Direction direction = Direction::BIDIRECTIONAL;
    QoSRequirement qos;
};

/// Tolerance on the sum of weights.
inline constexpr double kWeightSumTolerance = 1e-9;

/// Every violated invariant of the policy; empty when the policy is valid.
std::vector<std::string> validate_policy(const Policy& policy);

/// Number of specified selectors that match, or nullopt when one conflicts.
std::optional<int> matching_value(const Policy& policy, const ChannelRequest& request);

/// Most matching policy, or nullopt when the decision is left to the OS.
/// Scopes are scanned CHANNEL, APPLICATION, DEVICE; the first scope with a
/// match decides. Ties on matching value go to the lowest declaration order.
std::optional<Policy> traverse_policies(const PolicySet& policies, const ChannelRequest& request);

/// Stand-in for the OS decision: the lowest-index interface that is both
/// available and subscribed, expressed as a default policy.
Policy os_fallback_policy(InterfaceIndex target);
inline constexpr std::string_view kOsFallbackId = "os_fallback";

// string forms used in documents
std::string_view to_string(Scope s);
std::string_view to_string(EndType e);
std::string_view to_string(Metric m);
std::string_view to_string(FactorName f);
std::optional<Scope> parse_scope(std::string_view s);
std::optional<EndType> parse_end_type(std::string_view s);
std::optional<Metric> parse_metric(std::string_view s);
std::optional<FactorName> parse_factor(std::string_view s);

/// Parses and validates a policy document ({"policies": [...]}).
/// Throws SyntaxError, SchemaError or ValidationError.
PolicySet parse_policy_set(std::string_view text);

}  // namespace conman
