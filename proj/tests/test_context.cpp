#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <random>
#include <thread>

#include "conman/context.hpp"
#include "conman/error.hpp"

using namespace conman;

namespace {

void two_hosts(ContextStore& s) {
    s.register_interface({"A", 0, TechType::parse("WLAN"), 11000, true});
    s.register_interface({"A", 1, TechType::parse("GPRS"), 200, true});
    s.register_interface({"B", 0, TechType::parse("WLAN"), 11000, true});
}

}  // namespace

TEST_CASE("first write becomes the latest value") {
    ContextStore s;
    s.put({"hostA.if0", "signal_strength", -60.0, 1000});
    auto t = s.query_latest("hostA.if0", "signal_strength");
    REQUIRE(t);
    CHECK(std::get<double>(t->value) == -60.0);
    CHECK(t->time == 1000);
}

TEST_CASE("writing into the past is a time regression") {
    ContextStore s;
    s.put({"hostA.if0", "signal_strength", -60.0, 1000});
    CHECK_THROWS_AS(s.put({"hostA.if0", "signal_strength", -61.0, 900}), TimeRegression);
    // other keys keep their own clocks
    CHECK_NOTHROW(s.put({"hostA.if1", "signal_strength", -61.0, 900}));
    // equal time is allowed and wins
    s.put({"hostA.if0", "signal_strength", -62.0, 1000});
    CHECK(std::get<double>(s.query_latest("hostA.if0", "signal_strength")->value) == -62.0);
}

TEST_CASE("string-valued user context round-trips") {
    ContextStore s;
    s.put({"Joe", "location", std::string("home"), 0});
    auto t = s.query_latest("Joe", "location");
    REQUIRE(t);
    CHECK(std::get<std::string>(t->value) == "home");
    CHECK_FALSE(as_number(t->value));
}

TEST_CASE("query returns the newest of several writes") {
    ContextStore s;
    s.put({"hostA.if0", "signal_strength", -60.0, 1000});
    s.put({"hostA.if0", "signal_strength", -70.0, 2000});
    CHECK(std::get<double>(s.query_latest("hostA.if0", "signal_strength")->value) == -70.0);
    CHECK(std::get<double>(s.query_at("hostA.if0", "signal_strength", 1500)->value) == -60.0);
    CHECK_FALSE(s.query_at("hostA.if0", "signal_strength", 999));
}

TEST_CASE("unknown keys are missing") {
    ContextStore s;
    CHECK_FALSE(s.query_latest("nobody", "nothing"));
}

TEST_CASE("a written tuple reads back unchanged") {
    ContextStore s;
    const ContextTuple t{"hostA.if1", "available", false, 5000};
    s.put(t);
    CHECK(s.query_latest("hostA.if1", "available") == t);
}

TEST_CASE("malformed tuples are rejected") {
    ContextStore s;
    CHECK_THROWS_AS(s.put({"", "f", 1.0, 0}), InvalidTuple);
    CHECK_THROWS_AS(s.put({"e", "", 1.0, 0}), InvalidTuple);
    CHECK_THROWS_AS(s.put({"e", "f", 1.0, -5}), InvalidTuple);
    CHECK_THROWS_AS(s.put({"e", "f", std::nan(""), 0}), InvalidTuple);
}

TEST_CASE("polling delivers once per elapsed interval") {
    ContextStore s;
    s.put({"A.if0", "signal_strength", -60.0, 0});
    std::vector<Millis> ticks;
    s.subscribe(ContextStore::Poll{1000}, "A.if0", "signal_strength",
                [&](const ContextStore::Delivery& d) {
                    ticks.push_back(d.time);
                    CHECK(d.tuple);
                });
    s.advance_to(3500);
    CHECK(ticks == std::vector<Millis>{1000, 2000, 3000});
    CHECK(s.clock() == 3500);
    CHECK(s.next_poll_due() == 4000);
}

TEST_CASE("polls deliver the value current at the tick") {
    ContextStore s;
    std::vector<double> seen;
    s.subscribe(ContextStore::Poll{100}, "e", "f", [&](const ContextStore::Delivery& d) {
        seen.push_back(d.tuple ? std::get<double>(d.tuple->value) : -1.0);
    });
    s.put({"e", "f", 1.0, 150});
    s.put({"e", "f", 2.0, 250});
    s.advance_to(300);
    CHECK(seen == std::vector<double>{-1.0, 1.0, 2.0});
}

TEST_CASE("event subscriptions filter by predicate") {
    ContextStore s;
    int calls = 0;
    double last = 0;
    s.subscribe(ContextStore::OnEvent{[](const ContextTuple& t) {
                    return std::get<double>(t.value) < -80.0;
                }},
                "A.if0", "signal_strength", [&](const ContextStore::Delivery& d) {
                    ++calls;
                    last = std::get<double>(d.tuple->value);
                });
    s.put({"A.if0", "signal_strength", -70.0, 10});
    s.put({"A.if0", "signal_strength", -85.0, 20});
    s.put({"A.if1", "signal_strength", -95.0, 20});
    CHECK(calls == 1);
    CHECK(last == -85.0);
}

TEST_CASE("zero or negative poll intervals are rejected") {
    ContextStore s;
    CHECK_THROWS_AS(s.subscribe(ContextStore::Poll{0}, "e", "f", {}), InvalidInterval);
    CHECK_THROWS_AS(s.subscribe(ContextStore::Poll{-10}, "e", "f", {}), InvalidInterval);
}

TEST_CASE("subscription ids increase and unsubscribe stops delivery") {
    ContextStore s;
    int calls = 0;
    auto a = s.subscribe(ContextStore::OnEvent{}, "e", "f", [&](const auto&) { ++calls; });
    auto b = s.subscribe(ContextStore::Poll{10}, "e", "f", [&](const auto&) { ++calls; });
    CHECK(b > a);
    s.put({"e", "f", 1.0, 0});
    CHECK(calls == 1);
    s.unsubscribe(a);
    s.unsubscribe(b);
    s.put({"e", "f", 2.0, 1});
    s.advance_to(100);
    CHECK(calls == 1);
}

TEST_CASE("event sinks run in registration order") {
    ContextStore s;
    std::vector<int> order;
    for (int k = 0; k < 4; ++k)
        s.subscribe(ContextStore::OnEvent{}, "e", "f", [&, k](const auto&) { order.push_back(k); });
    s.put({"e", "f", true, 0});
    CHECK(order == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("sinks may write back into the store") {
    ContextStore s;
    s.subscribe(ContextStore::OnEvent{}, "e", "f", [&](const ContextStore::Delivery& d) {
        s.put({"e", "echo", d.tuple->value, d.time});
    });
    s.put({"e", "f", 3.0, 7});
    REQUIRE(s.query_latest("e", "echo"));
    CHECK(std::get<double>(s.query_latest("e", "echo")->value) == 3.0);
}

TEST_CASE("fully written host snapshot") {
    ContextStore s;
    two_hosts(s);
    for (InterfaceIndex i : {0u, 1u}) {
        const auto e = interface_entity("A", i);
        s.put({e, "available", true, 10});
        s.put({e, "signal_strength", -50.0 - i, 10});
        s.put({e, "snr", 20.0, 10});
        s.put({e, "charge_rate", 0.5 * i, 10});
        s.put({e, "power_draw", 300.0, 10});
        s.put({e, "current_speed", 1000.0, 10});
    }
    auto v = s.snapshot_host("A", 50);
    CHECK(v.host_id == "A");
    CHECK(v.as_of == 50);
    REQUIRE(v.interfaces.size() == 2);
    CHECK(v.interfaces[0].descriptor.index == 0);
    CHECK(v.interfaces[1].descriptor.index == 1);
    CHECK(v.interfaces[1].available);
    CHECK(v.interfaces[1].signal_strength == -51.0);
    CHECK(v.interfaces[1].charge_rate == 0.5);
    CHECK(v.interfaces[0].current_speed == 1000.0);
}

TEST_CASE("never-written attributes take fail-closed defaults") {
    ContextStore s;
    two_hosts(s);
    auto v = s.snapshot_host("A", 0);
    for (const auto& i : v.interfaces) {
        CHECK_FALSE(i.available);
        CHECK(i.signal_strength == -120.0);
        CHECK(i.snr == 0.0);
        CHECK(i.charge_rate == 0.0);
        CHECK(i.power_draw == 0.0);
        CHECK(i.current_speed == 0.0);
    }
    CHECK(v.e2e.empty());
}

TEST_CASE("snapshots only see tuples at or before the requested time") {
    ContextStore s;
    two_hosts(s);
    s.put({"A.if0", "available", true, 100});
    s.put({"A.if0", "available", false, 200});
    CHECK_FALSE(s.snapshot_host("A", 99).interfaces[0].available);
    CHECK(s.snapshot_host("A", 150).interfaces[0].available);
    CHECK_FALSE(s.snapshot_host("A", 200).interfaces[0].available);
}

TEST_CASE("unknown host snapshot") {
    ContextStore s;
    two_hosts(s);
    CHECK_THROWS_AS(s.snapshot_host("nohost", 0), UnknownHost);
    CHECK_THROWS_AS(s.snapshot_host("A", 0, "nohost"), UnknownHost);
}

TEST_CASE("paths measured by the host itself") {
    ContextStore s;
    two_hosts(s);
    const auto e = path_entity("A", 1, "B", 0);
    CHECK(e == "A.if1~B.if0");
    s.put({e, "rtt", 250.0, 0});
    s.put({e, "bandwidth_up", 40.0, 0});
    s.put({e, "bandwidth_down", 90.0, 0});
    auto v = s.snapshot_host("A", 0);
    const auto* p = v.path({1, 0});
    REQUIRE(p);
    CHECK(p->rtt == 250.0);
    CHECK(p->bandwidth_up == 40.0);
    CHECK(p->bandwidth_down == 90.0);
    // unmeasured fields are pessimistic
    CHECK(p->packet_loss == 1.0);
    CHECK(p->jitter == kUnmeasuredDelayMs);
    CHECK_FALSE(v.path({0, 0}));
}

TEST_CASE("paths measured only by the peer are mirrored") {
    ContextStore s;
    two_hosts(s);
    const auto e = path_entity("B", 0, "A", 1);
    s.put({e, "rtt", 120.0, 0});
    s.put({e, "bandwidth_up", 40.0, 0});
    s.put({e, "bandwidth_down", 90.0, 0});
    auto v = s.snapshot_host("A", 0, "B");
    const auto* p = v.path({1, 0});
    REQUIRE(p);
    CHECK(p->rtt == 120.0);
    CHECK(p->bandwidth_up == 90.0);
    CHECK(p->bandwidth_down == 40.0);
}

TEST_CASE("latest-wins matches a brute-force scan") {
    std::mt19937_64 rng(0x5eed);
    for (int round = 0; round < 200; ++round) {
        ContextStore s;
        std::vector<ContextTuple> log;
        std::uniform_int_distribution<int> key(0, 3), step(0, 50), val(-100, 0);
        std::map<int, Millis> clocks;
        for (int w = 0; w < 40; ++w) {
            const int k = key(rng);
            clocks[k] += step(rng);
            ContextTuple t{"e" + std::to_string(k % 2), "f" + std::to_string(k / 2),
                           static_cast<double>(val(rng)), clocks[k]};
            s.put(t);
            log.push_back(t);
        }
        for (int k = 0; k < 4; ++k) {
            const std::string e = "e" + std::to_string(k % 2), f = "f" + std::to_string(k / 2);
            const ContextTuple* want = nullptr;
            for (const auto& t : log)
                if (t.entity == e && t.feature == f && (!want || t.time >= want->time)) want = &t;
            auto got = s.query_latest(e, f);
            REQUIRE(bool(got) == bool(want));
            if (want) CHECK(*got == *want);

            const Millis probe = std::uniform_int_distribution<Millis>(0, 1000)(rng);
            const ContextTuple* want_at = nullptr;
            for (const auto& t : log)
                if (t.entity == e && t.feature == f && t.time <= probe &&
                    (!want_at || t.time >= want_at->time))
                    want_at = &t;
            auto got_at = s.query_at(e, f, probe);
            REQUIRE(bool(got_at) == bool(want_at));
            if (want_at) CHECK(*got_at == *want_at);
        }
    }
}

TEST_CASE("poll delivery count is floor(T / k)") {
    std::mt19937_64 rng(17);
    for (int round = 0; round < 300; ++round) {
        const Millis k = std::uniform_int_distribution<Millis>(1, 2000)(rng);
        const Millis T = std::uniform_int_distribution<Millis>(0, 20000)(rng);
        ContextStore s;
        long count = 0;
        s.subscribe(ContextStore::Poll{k}, "e", "f", [&](const auto&) { ++count; });
        // advance in random increments; the total is what matters
        Millis now = 0;
        while (now < T) {
            now = std::min(T, now + std::uniform_int_distribution<Millis>(1, 3000)(rng));
            s.advance_to(now);
        }
        CHECK(count == T / k);
    }
}

TEST_CASE("snapshots of identical state are identical") {
    std::mt19937_64 rng(99);
    ContextStore s;
    two_hosts(s);
    std::uniform_real_distribution<double> u(-100, 0);
    for (Millis t = 0; t < 100; t += 10) {
        s.put({"A.if0", "signal_strength", u(rng), t});
        s.put({"A.if1", "available", (t / 10) % 2 == 0, t});
        s.put({"A.if0~B.if0", "rtt", -u(rng), t});
    }
    for (Millis at : {0, 35, 99, 500}) {
        CHECK(s.snapshot_host("A", at) == s.snapshot_host("A", at));
        CHECK(s.snapshot_host("B", at, "A") == s.snapshot_host("B", at, "A"));
    }
}

TEST_CASE("concurrent readers see a consistent latest value") {
    ContextStore s;
    two_hosts(s);
    s.put({"A.if0", "signal_strength", 0.0, 0});
    std::atomic<bool> bad{false};
    std::thread writer([&] {
        for (int t = 1; t <= 2000; ++t) s.put({"A.if0", "signal_strength", double(t), t});
    });
    std::vector<std::thread> readers;
    for (int r = 0; r < 3; ++r)
        readers.emplace_back([&] {
            double prev = -1;
            for (int k = 0; k < 2000; ++k) {
                auto t = s.query_latest("A.if0", "signal_strength");
                const double v = std::get<double>(t->value);
                if (v < prev || v != double(t->time)) bad = true;
                prev = v;
                static_cast<void>(s.snapshot_host("A", 1000));
            }
        });
    writer.join();
    for (auto& r : readers) r.join();
    CHECK_FALSE(bad);
}
