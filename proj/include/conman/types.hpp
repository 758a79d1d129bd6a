#pragma once

// Vocabulary shared by every module: simulated time, interface identity,
// traffic classes and the per-application QoS requirement.

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace conman {

/// Simulated time in integer milliseconds.
using Millis = std::int64_t;

/// Per-host interface index (the "connection index").
using InterfaceIndex = std::uint32_t;

enum class TechKind { GSM, GPRS, WLAN, BLUETOOTH, OTHER };

/// Access technology. OTHER carries a free-form name.
struct TechType {
    TechKind kind = TechKind::OTHER;
    std::string other;

    static TechType parse(std::string_view name);
    std::string name() const;

    friend bool operator==(const TechType&, const TechType&) = default;
    friend auto operator<=>(const TechType&, const TechType&) = default;
};

enum class TrafficClass {
    BULK_TRANSFER,
    PRIORITY_TRAFFIC,
    INTERACTIVE,
    RESPONSIVE,
    REAL_TIME,
    BANDWIDTH_INTENSIVE,
    NETWORK_CONTROL,
};

enum class Direction { SEND, RECEIVE, BIDIRECTIONAL };

/// The same flow seen from the other end of the channel.
constexpr Direction reversed(Direction d) {
    switch (d) {
        case Direction::SEND: return Direction::RECEIVE;
        case Direction::RECEIVE: return Direction::SEND;
        default: return Direction::BIDIRECTIONAL;
    }
}

std::optional<TrafficClass> parse_traffic_class(std::string_view s);
std::string_view to_string(TrafficClass tc);
std::optional<Direction> parse_direction(std::string_view s);
std::string_view to_string(Direction d);

struct QoSRequirement {
    double min_throughput = 1.0;    // kbit/s
    double max_delay = 1000.0;      // ms
    double max_cost_rate = 1.0;     // currency per MB
    double max_disruption = 1000.0; // ms of tolerable switch outage
    double min_acceptable = 1.0;    // fraction of min_throughput still acceptable

    double acceptable_throughput() const { return min_acceptable * min_throughput; }
};

/// A connection: local interface index paired with the remote one.
struct InterfacePair {
    InterfaceIndex local = 0;
    InterfaceIndex remote = 0;

    friend bool operator==(const InterfacePair&, const InterfacePair&) = default;
    friend auto operator<=>(const InterfacePair&, const InterfacePair&) = default;
};

}  // namespace conman

namespace conman {

/// Violations of the QoSRequirement ranges; empty when valid.
std::vector<std::string> validate(const QoSRequirement& qos);

}  // namespace conman
