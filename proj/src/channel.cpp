#include "conman/channel.hpp"

#include <algorithm>
#include <limits>
#include <string>
#include <vector>

#include "conman/error.hpp"

namespace conman {

std::string_view to_string(ActionKind a) {
    switch (a) {
        case ActionKind::STAY: return "STAY";
        case ActionKind::ESTABLISH: return "ESTABLISH";
        case ActionKind::SWITCH: return "SWITCH";
        case ActionKind::SUSPEND: return "SUSPEND";
        case ActionKind::RESUME: return "RESUME";
        case ActionKind::TERMINATE: return "TERMINATED";
    }
    return "?";
}

std::string_view to_string(Cause c) {
    switch (c) {
        case Cause::ESTABLISH: return "ESTABLISH";
        case Cause::CONTEXT_EVENT: return "CONTEXT_EVENT";
        case Cause::QOS_GUARD: return "QOS_GUARD";
        case Cause::COST_PROMPT: return "COST_PROMPT";
        case Cause::NO_CANDIDATE: return "NO_CANDIDATE";
    }
    return "?";
}

std::string_view to_string(ChannelState s) {
    switch (s) {
        case ChannelState::ESTABLISHING: return "ESTABLISHING";
        case ChannelState::ACTIVE: return "ACTIVE";
        case ChannelState::SUSPENDED: return "SUSPENDED";
        case ChannelState::TERMINATED: return "TERMINATED";
    }
    return "?";
}

std::string_view to_string(DecisionMode m) {
    return m == DecisionMode::MASTER_SLAVE ? "master_slave" : "peer_to_peer";
}

namespace {

/// Brings both structures to m x n and n x m.
std::pair<CostMatrix, CostMatrix> conform(const CostMatrix& a, const CostMatrix& b) {
    const std::size_t m = a.rows();
    const std::size_t n = b.rows();
    CostMatrix ca = a.broadcast(n);
    CostMatrix cb = b.broadcast(m);
    if (ca.rows() != m || ca.cols() != n || cb.rows() != n || cb.cols() != m)
        throw ShapeMismatch("cost structures are " + std::to_string(ca.rows()) + "x" +
                            std::to_string(ca.cols()) + " and " + std::to_string(cb.rows()) + "x" +
                            std::to_string(cb.cols()));
    return {std::move(ca), std::move(cb)};
}

}  // namespace

std::optional<Cell> select_master_slave(const CostMatrix& master, const CostMatrix& slave) {
    const auto [cm, cs] = conform(master, slave);

    // step a: cheapest usable pairs at the master
    std::vector<Cell> candidates;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t x = 0; x < cm.rows(); ++x) {
        for (std::size_t y = 0; y < cm.cols(); ++y) {
            if (!cm.at(x, y).is_finite() || !cs.at(y, x).is_finite()) continue;
            const double v = cm.at(x, y).value();
            if (v < best) {
                best = v;
                candidates.clear();
            }
            if (v == best) candidates.push_back({x, y});
        }
    }
    if (candidates.empty()) return std::nullopt;
    if (candidates.size() == 1) return candidates.front();

    // steps b-d: the slave resolves over exchanged pairs (y, x)
    std::optional<Cell> pick;  // in slave coordinates
    for (const auto& c : candidates) {
        const Cell exchanged{c.col, c.row};
        if (!pick || cs.at(exchanged.row, exchanged.col) < cs.at(pick->row, pick->col) ||
            (cs.at(exchanged.row, exchanged.col) == cs.at(pick->row, pick->col) && exchanged < *pick))
            pick = exchanged;
    }
    return Cell{pick->col, pick->row};
}

std::optional<Cell> select_peer_to_peer(const CostMatrix& a, const CostMatrix& b) {
    const auto [ca, cb] = conform(a, b);
    std::optional<Cell> pick;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < ca.rows(); ++i) {
        for (std::size_t j = 0; j < ca.cols(); ++j) {
            if (!ca.at(i, j).is_finite() || !cb.at(j, i).is_finite()) continue;
            const double s = ca.at(i, j).value() + cb.at(j, i).value();
            if (s < best) {
                best = s;
                pick = Cell{i, j};
            }
        }
    }
    return pick;
}

Millis DelayTable::lookup(const TechType& from, const TechType& to) const {
    if (auto it = entries.find({from.name(), to.name()}); it != entries.end()) return it->second;
    if (!use_default_delays)
        throw UnknownTechPair("no switch delay for " + from.name() + " -> " + to.name());
    return from == to ? intra_default : vertical_default;
}

double pair_throughput(InterfacePair pair, const HostContextView& local,
                       const HostContextView& remote) {
    const auto* l = local.find(pair.local);
    const auto* r = remote.find(pair.remote);
    if (!l || !r || !l->available || !r->available) return 0.0;
    double tp = std::min(l->current_speed, r->current_speed);
    if (const auto* path = local.path(pair))
        tp = std::min({tp, path->bandwidth_up, path->bandwidth_down});
    return std::max(tp, 0.0);
}

SwitchEstimate estimate_switch(std::optional<InterfacePair> current, InterfacePair candidate,
                               const HostContextView& local, const HostContextView& remote,
                               const QoSRequirement& req, const DelayTable& delays) {
    const auto* k = local.find(candidate.local);
    const auto* l = remote.find(candidate.remote);
    if (!k || !l)
        throw ReferenceError("candidate pair (" + std::to_string(candidate.local) + "," +
                             std::to_string(candidate.remote) + ") names an unknown interface");

    SwitchEstimate est;
    if (current) {
        const auto* i = local.find(current->local);
        const auto* j = remote.find(current->remote);
        if (!i || !j) throw ReferenceError("current pair names an unknown interface");
        Millis delay = 0;
        if (current->local != candidate.local)
            delay = std::max(delay, delays.lookup(i->descriptor.tech, k->descriptor.tech));
        if (current->remote != candidate.remote)
            delay = std::max(delay, delays.lookup(j->descriptor.tech, l->descriptor.tech));
        est.switch_delay = delay;
    }
    est.projected_throughput = pair_throughput(candidate, local, remote);
    const auto* path = local.path(candidate);
    est.projected_delay = path ? path->rtt : 0.0;
    est.cost_rate = k->charge_rate;
    est.acceptable_qos = static_cast<double>(est.switch_delay) <= req.max_disruption &&
                         est.projected_throughput >= req.min_throughput &&
                         est.projected_delay <= req.max_delay;
    est.acceptable_cost = est.cost_rate <= req.max_cost_rate;
    return est;
}

std::optional<std::size_t> Selection::local_pos(InterfaceIndex i) const {
    auto it = std::find(local_indices.begin(), local_indices.end(), i);
    if (it == local_indices.end()) return std::nullopt;
    return static_cast<std::size_t>(it - local_indices.begin());
}

std::optional<std::size_t> Selection::remote_pos(InterfaceIndex i) const {
    auto it = std::find(remote_indices.begin(), remote_indices.end(), i);
    if (it == remote_indices.end()) return std::nullopt;
    return static_cast<std::size_t>(it - remote_indices.begin());
}

bool Selection::usable(InterfacePair pair) const {
    auto i = local_pos(pair.local);
    auto j = remote_pos(pair.remote);
    return i && j && local_costs.at(*i, *j).is_finite() && remote_costs.at(*j, *i).is_finite();
}

std::optional<double> Selection::combined_cost(InterfacePair pair) const {
    if (!usable(pair)) return std::nullopt;
    const std::size_t i = *local_pos(pair.local);
    const std::size_t j = *remote_pos(pair.remote);
    const double a = local_costs.at(i, j).value();
    const double b = remote_costs.at(j, i).value();
    if (mode == DecisionMode::PEER_TO_PEER) return a + b;
    return local_mmp.end_type == EndType::MASTER ? a : b;
}

namespace {

Policy mmp_for(const PolicySet& policies, const ChannelRequest& request,
               const HostContextView& view) {
    if (auto p = traverse_policies(policies, request)) return *p;
    InterfaceIndex target = view.interfaces.front().descriptor.index;
    for (const auto& s : view.interfaces) {
        if (s.available && s.descriptor.subscribed) {
            target = s.descriptor.index;
            break;
        }
    }
    return os_fallback_policy(target);
}

std::vector<InterfaceIndex> indices_of(const HostContextView& v) {
    std::vector<InterfaceIndex> out;
    for (const auto& s : v.interfaces) out.push_back(s.descriptor.index);
    return out;
}

}  // namespace

Selection select_channel(const ChannelRequest& request, const EvaluationContext& ctx) {
    Selection sel;
    sel.local_indices = indices_of(ctx.local);
    sel.remote_indices = indices_of(ctx.remote);

    ChannelRequest remote_request = request;
    remote_request.direction = reversed(request.direction);
    sel.local_mmp = mmp_for(ctx.local_policies, request, ctx.local);
    sel.remote_mmp = mmp_for(ctx.remote_policies, remote_request, ctx.remote);

    sel.local_raw = compute_cost_matrix(sel.local_mmp, ctx.local,
                                        std::span<const InterfaceIndex>(sel.remote_indices), ctx.catalog);
    sel.remote_raw = compute_cost_matrix(sel.remote_mmp, ctx.remote,
                                         std::span<const InterfaceIndex>(sel.local_indices), ctx.catalog);
    sel.local_costs = sel.local_raw.broadcast(sel.remote_indices.size());
    sel.remote_costs = sel.remote_raw.broadcast(sel.local_indices.size());
    sel.mode = decision_mode(sel.local_mmp.end_type, sel.remote_mmp.end_type);

    std::optional<Cell> cell;
    if (sel.mode == DecisionMode::PEER_TO_PEER) {
        cell = select_peer_to_peer(sel.local_costs, sel.remote_costs);
    } else if (sel.local_mmp.end_type == EndType::MASTER) {
        cell = select_master_slave(sel.local_costs, sel.remote_costs);
    } else if (auto c = select_master_slave(sel.remote_costs, sel.local_costs)) {
        cell = Cell{c->col, c->row};
    }
    if (cell) {
        sel.best = InterfacePair{sel.local_indices[cell->row], sel.remote_indices[cell->col]};
        sel.best_cost = *sel.combined_cost(*sel.best);
    }
    return sel;
}

namespace {

struct Gate {
    Decision& d;
    const Channel& ch;
    Millis now;
    const UserDecisionOracle& oracle;

    /// Cost approval: automatic when within budget, otherwise the user decides.
    bool approve(const SwitchEstimate& est) {
        if (est.acceptable_cost) return true;
        d.prompted = true;
        d.cause = Cause::COST_PROMPT;
        return oracle && oracle(ch.id, est.cost_rate, now) == UserDecision::ACCEPT;
    }
};

bool dwell_elapsed(const Channel& ch, Millis now, const DwellConfig& dwell) {
    return !ch.last_switch_time || now - *ch.last_switch_time >= dwell.t_dwell;
}

}  // namespace

Decision evaluate_event(const Channel& channel, Millis now, const EvaluationContext& ctx,
                        const UserDecisionOracle& oracle, const DwellConfig& dwell) {
    Decision d;
    d.selection = select_channel(channel.request, ctx);
    d.stability_count = channel.stability_count;
    d.pending = channel.pending;
    const auto& best = d.selection.best;
    const auto& qos = channel.request.qos;
    Gate gate{d, channel, now, oracle};
    auto stay = [&](Cause cause, std::string detail) {
        d.action = {ActionKind::STAY, channel.pair};
        d.cause = cause;
        d.detail = std::move(detail);
    };

    if (channel.pair) d.current_throughput = pair_throughput(*channel.pair, ctx.local, ctx.remote);

    switch (channel.state) {
        case ChannelState::TERMINATED:
            stay(Cause::CONTEXT_EVENT, "terminated");
            return d;

        case ChannelState::ESTABLISHING: {
            d.stability_count = 0;
            d.pending.reset();
            if (!best) {
                d.action = {ActionKind::SUSPEND, std::nullopt};
                d.cause = Cause::NO_CANDIDATE;
                d.detail = "no valid connection";
                return d;
            }
            d.estimate = estimate_switch(std::nullopt, *best, ctx.local, ctx.remote, qos, ctx.delays);
            d.cause = Cause::ESTABLISH;
            if (gate.approve(*d.estimate)) {
                d.action = {ActionKind::ESTABLISH, best};
                d.detail = d.prompted ? "user accepted cost" : "best available";
            } else {
                d.action = {ActionKind::SUSPEND, std::nullopt};
                d.detail = "user rejected cost";
            }
            return d;
        }

        case ChannelState::SUSPENDED: {
            d.stability_count = 0;
            d.pending.reset();
            if (!best) {
                stay(Cause::NO_CANDIDATE, "no valid connection");
                return d;
            }
            if (!dwell_elapsed(channel, now, dwell)) {
                stay(Cause::CONTEXT_EVENT, "dwell");
                d.retry_at = *channel.last_switch_time + dwell.t_dwell;
                return d;
            }
            d.estimate = estimate_switch(std::nullopt, *best, ctx.local, ctx.remote, qos, ctx.delays);
            d.cause = Cause::CONTEXT_EVENT;
            if (gate.approve(*d.estimate)) {
                d.action = {ActionKind::RESUME, best};
                d.detail = d.prompted ? "user accepted cost" : "candidate available";
            } else {
                d.action = {ActionKind::STAY, std::nullopt};
                d.detail = "user rejected cost";
            }
            return d;
        }

        case ChannelState::ACTIVE:
            break;
    }

    const InterfacePair current = *channel.pair;
    if (!best) {
        d.action = {ActionKind::SUSPEND, std::nullopt};
        d.cause = Cause::NO_CANDIDATE;
        d.detail = "no valid connection";
        d.stability_count = 0;
        d.pending.reset();
        return d;
    }
    if (*best == current) {
        d.stability_count = 0;
        d.pending.reset();
        stay(Cause::CONTEXT_EVENT, "current is best");
        return d;
    }

    d.stability_count = (channel.pending == best) ? channel.stability_count + 1 : 1;
    d.pending = best;
    if (d.stability_count < dwell.k_stable) {
        stay(Cause::CONTEXT_EVENT, "stability " + std::to_string(d.stability_count) + "/" +
                                       std::to_string(dwell.k_stable));
        return d;
    }
    if (!dwell_elapsed(channel, now, dwell)) {
        stay(Cause::CONTEXT_EVENT, "dwell");
        d.retry_at = *channel.last_switch_time + dwell.t_dwell;
        return d;
    }

    d.estimate = estimate_switch(current, *best, ctx.local, ctx.remote, qos, ctx.delays);
    const bool above_threshold = d.current_throughput >= qos.acceptable_throughput();
    if (!d.estimate->acceptable_qos && above_threshold) {
        stay(Cause::QOS_GUARD, "switch impact unacceptable");
        return d;
    }
    d.cause = Cause::CONTEXT_EVENT;
    if (gate.approve(*d.estimate)) {
        d.action = {ActionKind::SWITCH, best};
        d.detail = d.prompted ? "user accepted cost" : "better connection";
    } else {
        d.action = {ActionKind::SUSPEND, std::nullopt};
        d.detail = "user rejected cost";
    }
    return d;
}

Channel apply_transition(Channel channel, const Action& action, Millis now) {
    auto illegal = [&]() -> IllegalTransition {
        return IllegalTransition(std::string(to_string(action.kind)) + " from " +
                                 std::string(to_string(channel.state)));
    };
    auto enter_active = [&] {
        if (!action.pair) throw illegal();
        channel.state = ChannelState::ACTIVE;
        channel.pair = action.pair;
        channel.last_switch_time = now;
        channel.stability_count = 0;
        channel.pending.reset();
    };

    switch (action.kind) {
        case ActionKind::STAY:
            return channel;
        case ActionKind::ESTABLISH:
            if (channel.state != ChannelState::ESTABLISHING) throw illegal();
            enter_active();
            return channel;
        case ActionKind::SWITCH:
            if (channel.state != ChannelState::ACTIVE) throw illegal();
            enter_active();
            return channel;
        case ActionKind::RESUME:
            if (channel.state != ChannelState::SUSPENDED) throw illegal();
            enter_active();
            return channel;
        case ActionKind::SUSPEND:
            if (channel.state != ChannelState::ESTABLISHING && channel.state != ChannelState::ACTIVE)
                throw illegal();
            channel.state = ChannelState::SUSPENDED;
            channel.pair.reset();
            channel.stability_count = 0;
            channel.pending.reset();
            return channel;
        case ActionKind::TERMINATE:
            if (channel.state != ChannelState::ACTIVE && channel.state != ChannelState::SUSPENDED)
                throw illegal();
            channel.state = ChannelState::TERMINATED;
            channel.pair.reset();
            return channel;
    }
    throw illegal();
}

Channel commit(Channel channel, const Decision& decision, Millis now) {
    if (decision.action.kind == ActionKind::STAY) {
        channel.stability_count = decision.stability_count;
        channel.pending = decision.pending;
        return channel;
    }
    return apply_transition(std::move(channel), decision.action, now);
}

}  // namespace conman
