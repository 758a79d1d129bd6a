#pragma once

// Channel selection and switching between two hosts: decision mode from the
// channel end types, the master-slave and peer-to-peer selection protocols,
// switch estimation with QoS and cost gating, user cost approval, suspension
// and dwell/stability hysteresis.

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include "conman/context.hpp"
#include "conman/cost.hpp"
#include "conman/policy.hpp"

namespace conman {

enum class DecisionMode { MASTER_SLAVE, PEER_TO_PEER };

/// Different end types select master-slave, equal ones peer-to-peer.
constexpr DecisionMode decision_mode(EndType a, EndType b) {
    return (a != b) ? DecisionMode::MASTER_SLAVE : DecisionMode::PEER_TO_PEER;
}

/// Row/column position in a cost matrix (not an interface index).
struct Cell {
    std::size_t row = 0;
    std::size_t col = 0;
    friend bool operator==(const Cell&, const Cell&) = default;
    friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// Master picks the cheapest pairs of its m x n matrix; when several tie the
/// slave breaks the tie with its n x m matrix (lexicographic on (y, x) after
/// that). A pair is usable only when both sides price it finitely.
/// VECTOR inputs are broadcast first. Throws ShapeMismatch.
std::optional<Cell> select_master_slave(const CostMatrix& master, const CostMatrix& slave);

/// argmin over c_a[i][j] + c_b[j][i] with both terms finite, ties by (i, j).
std::optional<Cell> select_peer_to_peer(const CostMatrix& a, const CostMatrix& b);

/// Switch outage per ordered technology pair.
struct DelayTable {
    std::map<std::pair<std::string, std::string>, Millis> entries;
    bool use_default_delays = true;
    Millis intra_default = 50;
    Millis vertical_default = 1000;

    /// Throws UnknownTechPair.
    Millis lookup(const TechType& from, const TechType& to) const;
};

struct SwitchEstimate {
    Millis switch_delay = 0;
    double projected_throughput = 0.0;
    double projected_delay = 0.0;
    double cost_rate = 0.0;
    bool acceptable_qos = false;
    bool acceptable_cost = false;
};

/// Throughput a pair would deliver: the slower end's current speed, capped by
/// the measured path bandwidth. Zero when either end is unavailable or unknown.
double pair_throughput(InterfacePair pair, const HostContextView& local,
                       const HostContextView& remote);

/// Outage is the larger of the two ends' technology crossings; an end that
/// keeps its interface contributes nothing. With no current pair the outage is 0.
/// Throws ReferenceError for unknown interfaces, UnknownTechPair from the table.
SwitchEstimate estimate_switch(std::optional<InterfacePair> current, InterfacePair candidate,
                               const HostContextView& local, const HostContextView& remote,
                               const QoSRequirement& req, const DelayTable& delays);

enum class UserDecision { ACCEPT, REJECT };
using UserDecisionOracle =
    std::function<UserDecision(const std::string& channel_id, double cost_rate, Millis now)>;

struct DwellConfig {
    Millis t_dwell = 5000;
    int k_stable = 3;
};

enum class ChannelState { ESTABLISHING, ACTIVE, SUSPENDED, TERMINATED };

struct Channel {
    std::string id;
    ChannelRequest request;
    ChannelState state = ChannelState::ESTABLISHING;
    std::optional<InterfacePair> pair;  // set iff ACTIVE
    std::optional<Millis> last_switch_time;
    int stability_count = 0;
    std::optional<InterfacePair> pending;  // candidate the count refers to
};

enum class ActionKind { STAY, ESTABLISH, SWITCH, SUSPEND, RESUME, TERMINATE };

struct Action {
    ActionKind kind = ActionKind::STAY;
    std::optional<InterfacePair> pair;
    friend bool operator==(const Action&, const Action&) = default;
};

enum class Cause { ESTABLISH, CONTEXT_EVENT, QOS_GUARD, COST_PROMPT, NO_CANDIDATE };

std::string_view to_string(ActionKind a);
std::string_view to_string(Cause c);
std::string_view to_string(ChannelState s);
std::string_view to_string(DecisionMode m);

/// Everything one selection pass needs. `local` is the host that owns the application.
struct EvaluationContext {
    const HostContextView& local;
    const HostContextView& remote;
    const PolicySet& local_policies;
    const PolicySet& remote_policies;
    const FactorCatalog& catalog;
    const DelayTable& delays;
};

/// One traverse -> cost -> select pass, no hysteresis.
struct Selection {
    DecisionMode mode = DecisionMode::PEER_TO_PEER;
    Policy local_mmp;
    Policy remote_mmp;
    CostMatrix local_costs;   // m x n (broadcast)
    CostMatrix remote_costs;  // n x m (broadcast)
    CostMatrix local_raw;     // as computed, VECTOR or MATRIX
    CostMatrix remote_raw;
    std::optional<InterfacePair> best;
    double best_cost = 0.0;

    /// Both sides price the pair finitely.
    bool usable(InterfacePair pair) const;
    /// Objective value of a pair under this selection's mode.
    std::optional<double> combined_cost(InterfacePair pair) const;

    // interface index <-> matrix position
    std::optional<std::size_t> local_pos(InterfaceIndex i) const;
    std::optional<std::size_t> remote_pos(InterfaceIndex i) const;
    std::vector<InterfaceIndex> local_indices;
    std::vector<InterfaceIndex> remote_indices;
};

/// The remote host sees the request with the direction reversed. A host
/// whose traverse finds nothing uses os_fallback_policy.
Selection select_channel(const ChannelRequest& request, const EvaluationContext& ctx);

struct Decision {
    Action action;
    Cause cause = Cause::CONTEXT_EVENT;
    std::string detail;
    Selection selection;
    std::optional<SwitchEstimate> estimate;
    double current_throughput = 0.0;
    bool prompted = false;
    int stability_count = 0;
    std::optional<InterfacePair> pending;
    /// Set when only the dwell gate held a change back.
    std::optional<Millis> retry_at;
};

Decision evaluate_event(const Channel& channel, Millis now, const EvaluationContext& ctx,
                        const UserDecisionOracle& oracle, const DwellConfig& dwell);

/// Throws IllegalTransition.
Channel apply_transition(Channel channel, const Action& action, Millis now);

/// apply_transition plus the hysteresis bookkeeping carried by the decision.
Channel commit(Channel channel, const Decision& decision, Millis now);

}  // namespace conman
