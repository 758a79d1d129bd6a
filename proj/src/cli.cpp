#include "conman/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "conman/channel.hpp"
#include "conman/error.hpp"
#include "conman/json_io.hpp"
#include "conman/netsim.hpp"

namespace conman::cli {

namespace {

/// Unreadable file.
struct IoError : Error {
    using Error::Error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path);
    out << content;
    if (!out) throw IoError("write failed for " + path);
}

void configure_logging() {
    auto logger = spdlog::get("conman");
    if (!logger) logger = spdlog::stderr_color_st("conman");
    const char* env = std::getenv("CONMAN_LOG");
    const std::string level = env ? env : "off";
    logger->set_level(level == "debug"  ? spdlog::level::debug
                      : level == "info" ? spdlog::level::info
                                        : spdlog::level::off);
    spdlog::set_default_logger(logger);
}

/// Maps library errors onto exit codes, one message line per problem.
template <typename F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const ValidationError& e) {
        for (const auto& v : e.violations()) err << v << '\n';
        return kValidationFailure;
    } catch (const ReferenceError& e) {
        err << e.what() << '\n';
        return kValidationFailure;
    } catch (const OrderError& e) {
        err << e.what() << '\n';
        return kValidationFailure;
    } catch (const SyntaxError& e) {
        err << "syntax error: " << e.what() << '\n';
        return kInputError;
    } catch (const SchemaError& e) {
        err << "schema error: " << e.what() << '\n';
        return kInputError;
    } catch (const IoError& e) {
        err << e.what() << '\n';
        return kInputError;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kInternalError;
    }
}

int cmd_run(const std::string& scenario_path, const std::string& trace_path,
            const std::string& metrics_path, const std::string& report, std::ostream& out,
            std::ostream& err) {
    return guarded(err, [&] {
        const Scenario scenario = load_scenario(read_file(scenario_path));
        spdlog::info("running {} application(s), {} event(s)", scenario.applications.size(),
                     scenario.events.size());
        const SimResult result = run_simulation(scenario);
        const std::string trace = trace_to_jsonl(result.trace);
        if (trace_path.empty()) out << trace;
        else write_file(trace_path, trace);
        const auto metrics = metrics_to_json(result);
        if (!metrics_path.empty()) write_file(metrics_path, metrics.dump(2) + "\n");

        if (report == "json") {
            out << metrics.dump() << '\n';
        } else if (report == "text") {
            for (const auto& m : result.metrics) {
                out << m.channel << ": " << m.switch_count << " switch(es), " << m.suspend_count
                    << " suspension(s), active " << m.active_ms << " ms, suspended "
                    << m.suspended_ms << " ms, below QoS threshold " << m.qos_violation_ms
                    << " ms, mean cost rate " << m.mean_cost_rate << '\n';
            }
        }
        return int{kOk};
    });
}

int cmd_validate(const std::string& path, const std::string& kind, std::ostream& out,
                 std::ostream& err) {
    return guarded(err, [&] {
        const std::string text = read_file(path);
        try {
            if (kind == "policy") parse_policy_set(text);
            else load_scenario(text);
        } catch (const ValidationError& e) {
            for (const auto& v : e.violations()) out << v << '\n';
            return int{kValidationFailure};
        }
        return int{kOk};
    });
}

/// Either one {"policies": [...]} document for both hosts or one per host id.
std::map<std::string, PolicySet> load_policies(const nlohmann::json& doc,
                                               const std::array<HostContextView, 2>& hosts) {
    std::map<std::string, PolicySet> out;
    if (doc.is_object() && doc.contains("policies")) {
        const PolicySet shared = policy_set_from_json(doc);
        for (const auto& h : hosts) out[h.host_id] = shared;
        return out;
    }
    if (!doc.is_object()) throw SchemaError("policy file: expected an object");
    std::vector<std::string> violations;
    for (const auto& [host, set] : doc.items()) {
        if (host != hosts[0].host_id && host != hosts[1].host_id)
            throw ReferenceError("policy file: unknown host '" + host + "'");
        try {
            out[host] = policy_set_from_json(set);
        } catch (const ValidationError& e) {
            for (const auto& v : e.violations()) violations.push_back("host " + host + ": " + v);
        }
    }
    if (!violations.empty()) throw ValidationError(std::move(violations));
    return out;
}

int cmd_eval(const std::string& snapshot_path, const std::string& policies_path,
             const ChannelRequest& request, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto snap = parse_json_text(read_file(snapshot_path));
        if (!snap.is_object() || !snap.contains("hosts") || !snap.at("hosts").is_array() ||
            snap.at("hosts").size() != 2)
            throw SchemaError("snapshot: expected {\"hosts\": [view, view]}");
        std::array<HostContextView, 2> hosts{view_from_json(snap.at("hosts")[0]),
                                             view_from_json(snap.at("hosts")[1])};
        FactorCatalog catalog = FactorCatalog::defaults();
        DelayTable delays;
        if (snap.contains("config")) {
            const auto& c = snap.at("config");
            if (c.contains("factors")) catalog = catalog_from_json(c.at("factors"));
            const bool use_defaults = c.value("use_default_delays", true);
            delays = c.contains("delays") ? delays_from_json(c.at("delays"), use_defaults)
                                          : delays_from_json(nlohmann::json::array(), use_defaults);
        }
        const auto policies = load_policies(parse_json_text(read_file(policies_path)), hosts);
        static const PolicySet kEmpty;
        auto set_for = [&](const std::string& h) -> const PolicySet& {
            auto it = policies.find(h);
            return it == policies.end() ? kEmpty : it->second;
        };

        const EvaluationContext ctx{hosts[0], hosts[1], set_for(hosts[0].host_id),
                                    set_for(hosts[1].host_id), catalog, delays};
        const Selection sel = select_channel(request, ctx);
        if (!sel.best) {
            out << "no_valid_connection\n";
            return int{kValidationFailure};
        }
        ojson j;
        j["mmp"] = {{hosts[0].host_id, sel.local_mmp.id}, {hosts[1].host_id, sel.remote_mmp.id}};
        j["mode"] = to_string(sel.mode);
        j["costs"] = {{hosts[0].host_id, to_json(sel.local_raw)},
                      {hosts[1].host_id, to_json(sel.remote_raw)}};
        j["selected"] = to_json(*sel.best);
        j["cost"] = sel.best_cost;
        out << j.dump() << '\n';
        return int{kOk};
    });
}

}  // namespace

std::optional<ChannelRequest> parse_request(std::string_view spec) {
    ChannelRequest req;
    bool have_tc = false;
    bool have_dir = false;
    while (!spec.empty()) {
        const auto comma = spec.find(',');
        const auto part = spec.substr(0, comma);
        spec = comma == std::string_view::npos ? std::string_view{} : spec.substr(comma + 1);
        const auto eq = part.find('=');
        if (eq == std::string_view::npos) return std::nullopt;
        const auto key = part.substr(0, eq);
        const auto value = part.substr(eq + 1);
        if (key == "tc") {
            auto tc = parse_traffic_class(value);
            if (!tc || have_tc) return std::nullopt;
            req.traffic_class = *tc;
            have_tc = true;
        } else if (key == "dir") {
            auto d = parse_direction(value);
            if (!d || have_dir) return std::nullopt;
            req.direction = *d;
            have_dir = true;
        } else if (key == "app") {
            if (value.empty()) return std::nullopt;
            req.application_id = std::string(value);
        } else {
            return std::nullopt;
        }
    }
    if (!have_tc || !have_dir) return std::nullopt;
    return req;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    configure_logging();

    CLI::App app{"Context-aware connectivity manager and two-host simulator", "conman"};
    app.require_subcommand(1);

    std::string scenario_path, trace_path, metrics_path, report;
    auto* run_cmd = app.add_subcommand("run", "Simulate a scenario file");
    run_cmd->add_option("scenario", scenario_path, "Scenario JSON")->required();
    run_cmd->add_option("--trace", trace_path, "Trace output (JSON Lines); stdout when omitted");
    run_cmd->add_option("--metrics", metrics_path, "Metrics output (JSON)");
    run_cmd->add_option("--report", report, "Summary on stdout")
        ->check(CLI::IsMember({"text", "json"}));

    std::string validate_path, kind = "scenario";
    auto* validate_cmd = app.add_subcommand("validate", "Check a policy or scenario file");
    validate_cmd->add_option("path", validate_path, "File to check")->required();
    validate_cmd->add_option("--kind", kind, "policy or scenario")
        ->check(CLI::IsMember({"policy", "scenario"}));

    std::string snapshot_path, policies_path, request_spec;
    auto* eval_cmd = app.add_subcommand("eval", "One selection pass over a context snapshot");
    eval_cmd->add_option("snapshot", snapshot_path, "Snapshot JSON with both host views")->required();
    eval_cmd->add_option("policies", policies_path, "Policy document")->required();
    eval_cmd->add_option("--request", request_spec, "e.g. tc=real_time,dir=send")->required();

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
        app.parse(argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << '\n' << app.help();
        return kInputError;
    }

    if (*run_cmd) return cmd_run(scenario_path, trace_path, metrics_path, report, out, err);
    if (*validate_cmd) return cmd_validate(validate_path, kind, out, err);

    auto request = parse_request(request_spec);
    if (!request) {
        err << "malformed --request \"" << request_spec << "\"\n" << eval_cmd->help();
        return kInputError;
    }
    return cmd_eval(snapshot_path, policies_path, *request, out, err);
}

}  // namespace conman::cli
