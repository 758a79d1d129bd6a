#include "conman/context.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "conman/error.hpp"

namespace conman {

std::optional<double> as_number(const ContextValue& v) {
    if (const auto* d = std::get_if<double>(&v)) return *d;
    if (const auto* b = std::get_if<bool>(&v)) return *b ? 1.0 : 0.0;
    return std::nullopt;
}

const InterfaceSnapshot* HostContextView::find(InterfaceIndex index) const {
    for (const auto& s : interfaces)
        if (s.descriptor.index == index) return &s;
    return nullptr;
}

const EndToEndQoS* HostContextView::path(InterfacePair pair) const {
    auto it = e2e.find(pair);
    return it == e2e.end() ? nullptr : &it->second;
}

namespace feature {

bool is_interface_feature(std::string_view f) {
    return f == kAvailable || f == kSignalStrength || f == kSnr || f == kChargeRate ||
           f == kPowerDraw || f == kCurrentSpeed;
}

bool is_path_feature(std::string_view f) {
    return f == kRtt || f == kBandwidthUp || f == kBandwidthDown || f == kPacketLoss ||
           f == kJitter;
}

}  // namespace feature

std::string interface_entity(std::string_view host, InterfaceIndex index) {
    return std::string(host) + ".if" + std::to_string(index);
}

std::string path_entity(std::string_view host, InterfaceIndex local, std::string_view peer,
                        InterfaceIndex remote) {
    return interface_entity(host, local) + "~" + interface_entity(peer, remote);
}

void ContextStore::register_interface(InterfaceDescriptor desc) {
    if (desc.host_id.empty()) throw InvalidTuple("interface descriptor needs a host id");
    if (!(desc.max_speed > 0.0)) throw InvalidTuple("max_speed must be positive");
    std::unique_lock lock(mutex_);
    auto& ifaces = hosts_[desc.host_id];
    if (ifaces.contains(desc.index))
        throw InvalidTuple("duplicate interface index " + std::to_string(desc.index) +
                           " on host " + desc.host_id);
    ifaces.emplace(desc.index, std::move(desc));
}

std::vector<InterfaceDescriptor> ContextStore::interfaces(std::string_view host) const {
    std::shared_lock lock(mutex_);
    std::vector<InterfaceDescriptor> out;
    if (auto it = hosts_.find(host); it != hosts_.end())
        for (const auto& [_, d] : it->second) out.push_back(d);
    return out;
}

std::vector<std::string> ContextStore::hosts() const {
    std::shared_lock lock(mutex_);
    std::vector<std::string> out;
    for (const auto& [id, _] : hosts_) out.push_back(id);
    return out;
}

void ContextStore::put(ContextTuple tuple) {
    if (tuple.entity.empty() || tuple.feature.empty())
        throw InvalidTuple("context tuple needs a non-empty entity and feature");
    if (tuple.time < 0) throw InvalidTuple("context time must be non-negative");
    if (const auto* d = std::get_if<double>(&tuple.value); d && !std::isfinite(*d))
        throw InvalidTuple("context value must be finite");

    std::vector<std::pair<Sink, Delivery>> notify;
    {
        std::unique_lock lock(mutex_);
        auto& series = history_[Key{tuple.entity, tuple.feature}];
        if (!series.empty() && tuple.time < series.back().time)
            throw TimeRegression(tuple.entity + "." + tuple.feature + ": time " +
                                 std::to_string(tuple.time) + " precedes " +
                                 std::to_string(series.back().time));
        series.push_back(tuple);
        for (const auto& sub : subscriptions_) {
            const auto* ev = std::get_if<OnEvent>(&sub.mode);
            if (!ev || sub.entity != tuple.entity || sub.feature != tuple.feature) continue;
            if (ev->predicate && !ev->predicate(tuple)) continue;
            notify.emplace_back(sub.sink, Delivery{sub.id, tuple.time, tuple});
        }
    }
    for (auto& [sink, delivery] : notify) sink(delivery);
}

const ContextTuple* ContextStore::latest_at_locked(std::string_view entity,
                                                   std::string_view feature, Millis at) const {
    auto it = history_.find(Key{std::string(entity), std::string(feature)});
    if (it == history_.end()) return nullptr;
    const auto& series = it->second;
    auto pos = std::upper_bound(series.begin(), series.end(), at,
                                [](Millis t, const ContextTuple& c) { return t < c.time; });
    if (pos == series.begin()) return nullptr;
    return &*std::prev(pos);
}

std::optional<ContextTuple> ContextStore::query_latest(std::string_view entity,
                                                       std::string_view feature) const {
    std::shared_lock lock(mutex_);
    auto it = history_.find(Key{std::string(entity), std::string(feature)});
    if (it == history_.end() || it->second.empty()) return std::nullopt;
    return it->second.back();
}

std::optional<ContextTuple> ContextStore::query_at(std::string_view entity,
                                                   std::string_view feature, Millis at) const {
    std::shared_lock lock(mutex_);
    if (const auto* t = latest_at_locked(entity, feature, at)) return *t;
    return std::nullopt;
}

ContextStore::SubscriptionId ContextStore::subscribe(Mode mode, std::string entity,
                                                     std::string feature, Sink sink) {
    std::unique_lock lock(mutex_);
    Subscription sub{next_id_++, std::move(mode), std::move(entity), std::move(feature),
                     std::move(sink), 0};
    if (const auto* poll = std::get_if<Poll>(&sub.mode)) {
        if (poll->interval <= 0)
            throw InvalidInterval("poll interval must be positive, got " +
                                  std::to_string(poll->interval));
        sub.next_tick = clock_ + poll->interval;
    }
    subscriptions_.push_back(std::move(sub));
    return subscriptions_.back().id;
}

void ContextStore::unsubscribe(SubscriptionId id) {
    std::unique_lock lock(mutex_);
    std::erase_if(subscriptions_, [id](const Subscription& s) { return s.id == id; });
}

std::optional<Millis> ContextStore::next_poll_due() const {
    std::shared_lock lock(mutex_);
    std::optional<Millis> due;
    for (const auto& sub : subscriptions_)
        if (std::holds_alternative<Poll>(sub.mode) && (!due || sub.next_tick < *due))
            due = sub.next_tick;
    return due;
}

Millis ContextStore::clock() const {
    std::shared_lock lock(mutex_);
    return clock_;
}

void ContextStore::advance_to(Millis now) {
    for (;;) {
        Sink sink;
        Delivery delivery;
        {
            std::unique_lock lock(mutex_);
            Subscription* earliest = nullptr;
            for (auto& sub : subscriptions_) {
                if (!std::holds_alternative<Poll>(sub.mode) || sub.next_tick > now) continue;
                if (!earliest || sub.next_tick < earliest->next_tick) earliest = &sub;
            }
            if (!earliest) {
                clock_ = std::max(clock_, now);
                return;
            }
            const Millis tick = earliest->next_tick;
            clock_ = std::max(clock_, tick);
            earliest->next_tick += std::get<Poll>(earliest->mode).interval;
            delivery.id = earliest->id;
            delivery.time = tick;
            if (const auto* t = latest_at_locked(earliest->entity, earliest->feature, tick))
                delivery.tuple = *t;
            sink = earliest->sink;
        }
        if (sink) sink(delivery);
    }
}

HostContextView ContextStore::snapshot_host(std::string_view host, Millis at,
                                            std::optional<std::string_view> peer) const {
    std::shared_lock lock(mutex_);
    auto hit = hosts_.find(host);
    if (hit == hosts_.end() || hit->second.empty())
        throw UnknownHost("unknown host '" + std::string(host) + "'");

    auto number = [&](const std::string& entity, std::string_view f) -> std::optional<double> {
        if (const auto* t = latest_at_locked(entity, f, at)) return as_number(t->value);
        return std::nullopt;
    };

    HostContextView view;
    view.host_id = std::string(host);
    view.as_of = at;
    for (const auto& [index, desc] : hit->second) {
        InterfaceSnapshot snap;
        snap.descriptor = desc;
        const std::string entity = interface_entity(host, index);
        if (auto v = number(entity, feature::kAvailable)) snap.available = *v != 0.0;
        if (auto v = number(entity, feature::kSignalStrength)) snap.signal_strength = *v;
        if (auto v = number(entity, feature::kSnr)) snap.snr = *v;
        if (auto v = number(entity, feature::kChargeRate)) snap.charge_rate = *v;
        if (auto v = number(entity, feature::kPowerDraw)) snap.power_draw = *v;
        if (auto v = number(entity, feature::kCurrentSpeed)) snap.current_speed = *v;
        view.interfaces.push_back(std::move(snap));
    }

    std::optional<std::string> peer_id;
    if (peer) {
        if (!hosts_.contains(*peer)) throw UnknownHost("unknown peer host '" + std::string(*peer) + "'");
        peer_id = std::string(*peer);
    } else if (hosts_.size() == 2) {
        for (const auto& [id, _] : hosts_)
            if (id != host) peer_id = id;
    }
    if (!peer_id) return view;

    // A path measured only from the peer's side is mirrored: its uplink is our downlink.
    for (const auto& [li, _l] : hit->second) {
        for (const auto& [ri, _r] : hosts_.at(*peer_id)) {
            const std::string own = path_entity(host, li, *peer_id, ri);
            const std::string mirror = path_entity(*peer_id, ri, host, li);
            bool any_own = false;
            for (auto f : {feature::kRtt, feature::kBandwidthUp, feature::kBandwidthDown,
                           feature::kPacketLoss, feature::kJitter})
                any_own = any_own || latest_at_locked(own, f, at) != nullptr;
            const std::string& entity = any_own ? own : mirror;
            const bool swapped = !any_own;

            EndToEndQoS q;
            bool any = false;
            auto read = [&](std::string_view f, double& field) {
                if (auto v = number(entity, f)) {
                    field = *v;
                    any = true;
                }
            };
            read(feature::kRtt, q.rtt);
            read(swapped ? feature::kBandwidthDown : feature::kBandwidthUp, q.bandwidth_up);
            read(swapped ? feature::kBandwidthUp : feature::kBandwidthDown, q.bandwidth_down);
            read(feature::kPacketLoss, q.packet_loss);
            read(feature::kJitter, q.jitter);
            if (any) view.e2e.emplace(InterfacePair{li, ri}, q);
        }
    }
    return view;
}

}  // namespace conman
