#include "conman/types.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <utility>

#include "conman/error.hpp"

namespace conman {

namespace {

std::string upper(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return out;
}

constexpr std::array<std::pair<TrafficClass, std::string_view>, 7> kTrafficClasses{{
    {TrafficClass::BULK_TRANSFER, "bulk_transfer"},
    {TrafficClass::PRIORITY_TRAFFIC, "priority_traffic"},
    {TrafficClass::INTERACTIVE, "interactive"},
    {TrafficClass::RESPONSIVE, "responsive"},
    {TrafficClass::REAL_TIME, "real_time"},
    {TrafficClass::BANDWIDTH_INTENSIVE, "bandwidth_intensive"},
    {TrafficClass::NETWORK_CONTROL, "network_control"},
}};

constexpr std::array<std::pair<Direction, std::string_view>, 3> kDirections{{
    {Direction::SEND, "send"},
    {Direction::RECEIVE, "receive"},
    {Direction::BIDIRECTIONAL, "bidirectional"},
}};

}  // namespace

ValidationError::ValidationError(std::vector<std::string> violations)
    : Error([&] {
          std::string msg;
          for (const auto& v : violations) {
              if (!msg.empty()) msg += "; ";
              msg += v;
          }
          return msg;
      }()),
      violations_(std::move(violations)) {}

TechType TechType::parse(std::string_view name) {
    const std::string u = upper(name);
    if (u == "GSM") return {TechKind::GSM, {}};
    if (u == "GPRS") return {TechKind::GPRS, {}};
    if (u == "WLAN") return {TechKind::WLAN, {}};
    if (u == "BLUETOOTH") return {TechKind::BLUETOOTH, {}};
    return {TechKind::OTHER, std::string(name)};
}

std::string TechType::name() const {
    switch (kind) {
        case TechKind::GSM: return "GSM";
        case TechKind::GPRS: return "GPRS";
        case TechKind::WLAN: return "WLAN";
        case TechKind::BLUETOOTH: return "BLUETOOTH";
        case TechKind::OTHER: break;
    }
    return other;
}

std::optional<TrafficClass> parse_traffic_class(std::string_view s) {
    for (const auto& [tc, name] : kTrafficClasses)
        if (name == s) return tc;
    return std::nullopt;
}

std::string_view to_string(TrafficClass tc) {
    for (const auto& [value, name] : kTrafficClasses)
        if (value == tc) return name;
    return "?";
}

std::optional<Direction> parse_direction(std::string_view s) {
    for (const auto& [d, name] : kDirections)
        if (name == s) return d;
    return std::nullopt;
}

std::string_view to_string(Direction d) {
    for (const auto& [value, name] : kDirections)
        if (value == d) return name;
    return "?";
}

std::vector<std::string> validate(const QoSRequirement& qos) {
    std::vector<std::string> out;
    auto positive = [&](double v, const char* name) {
        if (!std::isfinite(v) || v <= 0.0) out.push_back(std::string(name) + " must be positive");
    };
    positive(qos.min_throughput, "min_throughput");
    positive(qos.max_delay, "max_delay");
    positive(qos.max_cost_rate, "max_cost_rate");
    positive(qos.max_disruption, "max_disruption");
    positive(qos.min_acceptable, "min_acceptable");
    if (qos.min_acceptable > 1.0) out.push_back("min_acceptable must be <= 1");
    return out;
}

}  // namespace conman
