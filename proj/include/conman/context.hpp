#pragma once

// Context model: 4-tuples of (entity, feature, value, time), a timestamped
// store with explicit query, polling and event-driven access, and per-host
// instant-context snapshots assembled from the stored tuples.

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "conman/types.hpp"

namespace conman {

using ContextValue = std::variant<double, std::string, bool>;

struct ContextTuple {
    std::string entity;
    std::string feature;
    ContextValue value;
    Millis time = 0;

    friend bool operator==(const ContextTuple&, const ContextTuple&) = default;
};

/// Numeric view of a value: numbers as-is, booleans as 0/1, strings absent.
std::optional<double> as_number(const ContextValue& v);

struct InterfaceDescriptor {
    std::string host_id;
    InterfaceIndex index = 0;
    TechType tech;
    double max_speed = 1.0;  // kbit/s
    bool subscribed = true;

    friend bool operator==(const InterfaceDescriptor&, const InterfaceDescriptor&) = default;
};

/// Readings for one interface at one instant. Defaults are what a snapshot
/// reports for attributes that were never written: an unobserved interface
/// is unavailable and carries the worst signal.
struct InterfaceSnapshot {
    InterfaceDescriptor descriptor;
    bool available = false;
    double signal_strength = -120.0;  // dBm
    double snr = 0.0;                 // dB
    double charge_rate = 0.0;         // currency per MB
    double power_draw = 0.0;          // mW
    double current_speed = 0.0;       // kbit/s

    friend bool operator==(const InterfaceSnapshot&, const InterfaceSnapshot&) = default;
};

/// Fill value for delay fields of a partially measured path.
inline constexpr double kUnmeasuredDelayMs = 1'000'000.0;

struct EndToEndQoS {
    double rtt = kUnmeasuredDelayMs;  // ms
    double bandwidth_up = 0.0;        // kbit/s
    double bandwidth_down = 0.0;      // kbit/s
    double packet_loss = 1.0;         // fraction
    double jitter = kUnmeasuredDelayMs;

    friend bool operator==(const EndToEndQoS&, const EndToEndQoS&) = default;
};

struct HostContextView {
    std::string host_id;
    std::vector<InterfaceSnapshot> interfaces;  // ascending index
    std::map<InterfacePair, EndToEndQoS> e2e;   // (local, remote) -> path QoS
    Millis as_of = 0;

    const InterfaceSnapshot* find(InterfaceIndex index) const;
    const EndToEndQoS* path(InterfacePair pair) const;

    friend bool operator==(const HostContextView&, const HostContextView&) = default;
};

/// Feature names under which interface and path attributes are stored.
namespace feature {
inline constexpr std::string_view kAvailable = "available";
inline constexpr std::string_view kSignalStrength = "signal_strength";
inline constexpr std::string_view kSnr = "snr";
inline constexpr std::string_view kChargeRate = "charge_rate";
inline constexpr std::string_view kPowerDraw = "power_draw";
inline constexpr std::string_view kCurrentSpeed = "current_speed";

inline constexpr std::string_view kRtt = "rtt";
inline constexpr std::string_view kBandwidthUp = "bandwidth_up";
inline constexpr std::string_view kBandwidthDown = "bandwidth_down";
inline constexpr std::string_view kPacketLoss = "packet_loss";
inline constexpr std::string_view kJitter = "jitter";

bool is_interface_feature(std::string_view f);
bool is_path_feature(std::string_view f);
}  // namespace feature

/// "A.if0"
std::string interface_entity(std::string_view host, InterfaceIndex index);
/// "A.if0~B.if1": the path from A's interface 0 to B's interface 1, as measured by A.
std::string path_entity(std::string_view host, InterfaceIndex local, std::string_view peer,
                        InterfaceIndex remote);

/// Timestamped context storage. Writes are serialized; concurrent readers see
/// a consistent latest-wins state. Subscribers are notified outside the lock
/// in registration order, so sinks may read from or write to the store.
class ContextStore {
public:
    using SubscriptionId = std::uint64_t;

    struct Poll {
        Millis interval = 0;
    };
    struct OnEvent {
        std::function<bool(const ContextTuple&)> predicate;
    };
    using Mode = std::variant<Poll, OnEvent>;

    struct Delivery {
        SubscriptionId id = 0;
        Millis time = 0;
        std::optional<ContextTuple> tuple;  // empty when a poll finds no value yet
    };
    using Sink = std::function<void(const Delivery&)>;

    void register_interface(InterfaceDescriptor desc);
    std::vector<InterfaceDescriptor> interfaces(std::string_view host) const;
    std::vector<std::string> hosts() const;

    /// Throws InvalidTuple or TimeRegression.
    void put(ContextTuple tuple);

    std::optional<ContextTuple> query_latest(std::string_view entity, std::string_view feature) const;
    /// Latest tuple with time <= at.
    std::optional<ContextTuple> query_at(std::string_view entity, std::string_view feature,
                                         Millis at) const;

    /// Polls start counting from the store clock at subscription time.
    SubscriptionId subscribe(Mode mode, std::string entity, std::string feature, Sink sink);
    void unsubscribe(SubscriptionId id);

    /// Moves the store clock forward, delivering every poll tick <= now in time order.
    void advance_to(Millis now);
    std::optional<Millis> next_poll_due() const;
    Millis clock() const;

    /// Instant-context view of one host. `peer` selects the remote host for
    /// path readings; when omitted and exactly one other host exists, that one is used.
    HostContextView snapshot_host(std::string_view host, Millis at,
                                  std::optional<std::string_view> peer = std::nullopt) const;

private:
    struct Key {
        std::string entity;
        std::string feature;
        friend auto operator<=>(const Key&, const Key&) = default;
    };
    struct Subscription {
        SubscriptionId id = 0;
        Mode mode;
        std::string entity;
        std::string feature;
        Sink sink;
        Millis next_tick = 0;  // polls only
    };

    const ContextTuple* latest_at_locked(std::string_view entity, std::string_view feature,
                                         Millis at) const;

    mutable std::shared_mutex mutex_;
    std::map<Key, std::vector<ContextTuple>> history_;
    std::map<std::string, std::map<InterfaceIndex, InterfaceDescriptor>, std::less<>> hosts_;
    std::vector<Subscription> subscriptions_;
    SubscriptionId next_id_ = 1;
    Millis clock_ = 0;
};

}  // namespace conman
