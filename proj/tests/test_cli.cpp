#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "conman/cli.hpp"
#include "conman/json_io.hpp"
#include "conman/netsim.hpp"
#include "oracles.hpp"

using namespace conman;
using oracle::scenario_path;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result call(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string temp_file(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("conman_test_" + name)).string();
}

}  // namespace

TEST_CASE("run prints a trace") {
    auto r = call({"run", scenario_path("minimal.json")});
    CHECK(r.code == cli::kOk);
    CHECK_FALSE(r.out.empty());
    CHECK(r.err.empty());
    std::istringstream lines(r.out);
    std::string first;
    std::getline(lines, first);
    CHECK(nlohmann::json::parse(first)["action"] == "ESTABLISH");
}

TEST_CASE("run matches the library trace exactly") {
    auto r = call({"run", scenario_path("wlan_fade.json")});
    auto sim = run_simulation(load_scenario(oracle::read_text(scenario_path("wlan_fade.json"))));
    CHECK(r.out == trace_to_jsonl(sim.trace));
}

TEST_CASE("run writes trace and metrics files") {
    const auto trace = temp_file("trace.jsonl"), metrics = temp_file("metrics.json");
    auto r = call({"run", scenario_path("suspend_resume.json"), "--trace", trace, "--metrics", metrics});
    CHECK(r.code == 0);
    CHECK(r.out.empty());
    CHECK_FALSE(oracle::read_text(trace).empty());
    auto m = nlohmann::json::parse(oracle::read_text(metrics));
    CHECK(m["channels"][0]["suspended_ms"] == 3000);
    std::filesystem::remove(trace);
    std::filesystem::remove(metrics);
}

TEST_CASE("run reports") {
    const auto trace = temp_file("report.jsonl");
    auto j = call({"run", scenario_path("flapping_slow.json"), "--trace", trace, "--report", "json"});
    CHECK(j.code == 0);
    CHECK(nlohmann::json::parse(j.out)["channels"][0]["switch_count"] == 5);
    auto t = call({"run", scenario_path("flapping_slow.json"), "--trace", trace, "--report", "text"});
    CHECK(t.code == 0);
    CHECK(t.out.rfind("voip: 5 switch(es), 0 suspension(s)", 0) == 0);
    CHECK(call({"run", scenario_path("minimal.json"), "--report", "xml"}).code == cli::kInputError);
    std::filesystem::remove(trace);
}

TEST_CASE("run exit codes for bad input") {
    auto missing = call({"run", scenario_path("does_not_exist.json")});
    CHECK(missing.code == cli::kInputError);
    CHECK_FALSE(missing.err.empty());

    auto weights = call({"run", scenario_path("invalid_weight_sum.json")});
    CHECK(weights.code == cli::kValidationFailure);
    CHECK(weights.err.find("a_weights") != std::string::npos);
    CHECK(weights.out.empty());

    CHECK(call({"run", scenario_path("invalid_unsorted.json")}).code == cli::kValidationFailure);
    CHECK(call({"run", scenario_path("invalid_reference.json")}).code == cli::kValidationFailure);

    const auto broken = temp_file("broken.json");
    std::ofstream(broken) << "{\"hosts\": [";
    auto syntax = call({"run", broken});
    CHECK(syntax.code == cli::kInputError);
    CHECK(syntax.err.find("syntax error") != std::string::npos);
    std::ofstream(broken) << "{\"hosts\": [], \"applications\": []}";
    auto schema = call({"run", broken});
    CHECK(schema.code == cli::kInputError);
    CHECK(schema.err.find("schema error") != std::string::npos);
    std::filesystem::remove(broken);
}

TEST_CASE("validate") {
    auto ok = call({"validate", scenario_path("policy_ok.json"), "--kind", "policy"});
    CHECK(ok.code == 0);
    CHECK(ok.out.empty());
    CHECK(ok.err.empty());

    auto two = call({"validate", scenario_path("policy_two_violations.json"), "--kind", "policy"});
    CHECK(two.code == cli::kValidationFailure);
    CHECK(two.out.find("policy 'p1'") != std::string::npos);
    CHECK(two.out.find("policy 'p2': duplicate target index:0") != std::string::npos);

    CHECK(call({"validate", scenario_path("minimal.json")}).code == 0);
    CHECK(call({"validate", scenario_path("invalid_weight_sum.json"), "--kind", "scenario"}).code ==
          cli::kValidationFailure);
    CHECK(call({"validate", scenario_path("policy_weight_09.json"), "--kind", "policy"}).code ==
          cli::kValidationFailure);

    auto kind = call({"validate", scenario_path("policy_ok.json"), "--kind", "bogus"});
    CHECK(kind.code == cli::kInputError);
}

TEST_CASE("eval selects a pair") {
    auto r = call({"eval", scenario_path("snapshot_pair.json"), scenario_path("eval_policies.json"), "--request",
                   "tc=real_time,dir=send"});
    REQUIRE(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["selected"] == nlohmann::json::array({1, 1}));
    CHECK(j["mode"] == "master_slave");
    CHECK(j["mmp"]["A"] == "a_cheap");
    CHECK(j["mmp"]["B"] == "b_wlan");
    CHECK(j["costs"]["B"]["entries"][0][0] == 1000000.0);
    CHECK(j["cost"].get<double>() == doctest::Approx(0.2 / 5));
}

TEST_CASE("eval with nothing usable") {
    auto r = call({"eval", scenario_path("snapshot_down.json"), scenario_path("eval_policies.json"), "--request",
                   "tc=real_time,dir=send"});
    CHECK(r.code == cli::kValidationFailure);
    CHECK(r.out.find("no_valid_connection") != std::string::npos);
}

TEST_CASE("eval argument errors") {
    auto bad = call({"eval", scenario_path("snapshot_pair.json"), scenario_path("eval_policies.json"), "--request",
                     "tc=warp"});
    CHECK(bad.code == cli::kInputError);
    CHECK(bad.err.find("malformed --request") != std::string::npos);
    CHECK(call({"eval", scenario_path("snapshot_pair.json")}).code == cli::kInputError);
    CHECK(call({"eval", scenario_path("minimal.json"), scenario_path("eval_policies.json"), "--request",
                "tc=real_time,dir=send"})
              .code == cli::kInputError);
}

TEST_CASE("eval agrees with the first decision of a simulation over the same state") {
    auto snapshot = nlohmann::json::parse(oracle::read_text(scenario_path("snapshot_pair.json")));
    auto policies = nlohmann::json::parse(oracle::read_text(scenario_path("eval_policies.json")));
    nlohmann::json scenario;
    for (auto h : snapshot["hosts"]) {
        h["id"] = h["host_id"];
        h.erase("host_id");
        scenario["hosts"].push_back(h);
    }
    scenario["policies"] = policies;
    scenario["applications"] = {{{"id", "app"},
                                 {"host", "A"},
                                 {"traffic_class", "real_time"},
                                 {"direction", "send"},
                                 {"qos", {{"min_throughput", 1}, {"max_delay", 1000}, {"max_cost_rate", 10}, {"max_disruption", 1000}}},
                                 {"start", 0},
                                 {"stop", 1000}}};
    auto sim = run_simulation(scenario_from_json(scenario));
    const auto& first = sim.trace.front();
    REQUIRE(first.action == ActionKind::ESTABLISH);

    auto r = call({"eval", scenario_path("snapshot_pair.json"), scenario_path("eval_policies.json"), "--request",
                   "tc=real_time,dir=send"});
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["selected"] == nlohmann::json(to_json(*first.new_pair)));
    CHECK(j["cost"].get<double>() == *first.cost);
    CHECK(j["mode"] == std::string(to_string(first.mode)));
    CHECK(j["mmp"]["A"] == first.mmp[0].second);
    CHECK(j["mmp"]["B"] == first.mmp[1].second);
}

TEST_CASE("request strings") {
    auto r = cli::parse_request("tc=real_time,dir=send");
    REQUIRE(r);
    CHECK(r->traffic_class == TrafficClass::REAL_TIME);
    CHECK(r->direction == Direction::SEND);
    auto named = cli::parse_request("dir=receive,tc=bulk_transfer,app=ftp");
    REQUIRE(named);
    CHECK(named->application_id == "ftp");
    CHECK(named->direction == Direction::RECEIVE);
    for (auto bad : {"", "tc=real_time", "dir=send", "tc=real_time,dir=sideways", "tc=real_time,dir=send,x=1",
                     "tc=real_time,tc=bulk_transfer,dir=send", "tc=real_time;dir=send", "tc=real_time,dir=send,app="})
        CHECK_FALSE(cli::parse_request(bad));
}

TEST_CASE("help and unknown commands") {
    CHECK(call({"--help"}).code == 0);
    CHECK(call({}).code == cli::kInputError);
    CHECK(call({"fly"}).code == cli::kInputError);
}
