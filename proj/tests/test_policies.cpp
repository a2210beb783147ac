#include <doctest.h>

#include <cmath>
#include <set>

#include "gals/policies.hpp"

using namespace gals;

TEST_CASE("lfsr walks the full 16-bit cycle") {
    // Brute-force enumeration is the oracle here: period must be exactly
    // 2^16 - 1 from any seed, with every nonzero state visited once.
    Lfsr lfsr(0x0001);
    std::set<std::uint16_t> seen;
    std::uint64_t ones = 0, steps = 0;
    do {
        CHECK(seen.insert(lfsr.state()).second);
        ones += std::uint64_t(lfsr.step());
        ++steps;
    } while (lfsr.state() != 0x0001);
    CHECK(steps == 65535);
    CHECK(seen.size() == 65535);
    CHECK(ones == 32768);
    CHECK(steps - ones == 32767);
}

TEST_CASE("lfsr period is 65535 from arbitrary seeds") {
    for (std::uint16_t seed : {std::uint16_t(0xACE1), std::uint16_t(0xFFFF),
                               std::uint16_t(0x8000), std::uint16_t(0x1234)}) {
        Lfsr lfsr(seed);
        std::uint64_t steps = 0;
        do {
            lfsr.step();
            ++steps;
        } while (lfsr.state() != seed);
        CHECK(steps == 65535);
    }
}

TEST_CASE("lfsr rejects the zero state") {
    CHECK_THROWS_AS(Lfsr(0), Error);
}

TEST_CASE("thermal step") {
    ThermalModel m;
    m.t_ambient = 25;
    m.t_device = 25;
    m.r_th = 2.0;
    m.c_th = 0.5;

    SUBCASE("no power at ambient is equilibrium") {
        m.step(0, 1.0);
        CHECK(m.t_device == doctest::Approx(25.0));
    }

    SUBCASE("constant power settles at t_ambient + P*r_th") {
        m.p_static = 3.0;
        for (int i = 0; i < 10000; ++i) m.step(0, 0.01);
        CHECK(m.t_device == doctest::Approx(25.0 + 3.0 * 2.0).epsilon(1e-9));
    }

    SUBCASE("edge power contributes") {
        m.p_per_edge = 1e-9;
        m.step(1'000'000, 0.001);  // 1e9 edges/s -> 1 W
        // dT = dt * (P - 0) / c_th = 0.001 * 1 / 0.5
        CHECK(m.t_device == doctest::Approx(25.0 + 0.002));
    }
}

TEST_CASE("effective delay scaling") {
    ThermalModel m;
    m.t_ref = 25;
    m.delay_coeff = 0.002;

    m.t_device = 25;
    CHECK(m.effective_delay(10000) == 10000);

    m.t_device = 75;  // +50 C
    CHECK(m.effective_delay(10000) == 11000);

    m.t_device = 25.0 + 0.00004;  // rounding to nearest picosecond
    CHECK(m.effective_delay(10000) == 10000);

    // floored at 1 even under absurd cooling
    m.delay_coeff = 0.5;
    m.t_device = -1000;
    CHECK(m.effective_delay(10000) == 1);
}

TEST_CASE("fixed policy sends everything on its assigned channels") {
    PolicySpec spec;
    spec.channels[7] = 1;
    std::vector<EndpointView> eps{{7, LinkRole::Output, 2},
                                  {3, LinkRole::Input, 1}};
    PolicyState st = make_policy_state(spec, 1, "x");
    DecideContext ctx;
    auto acts = decide(spec, eps, ctx, st);
    REQUIRE(acts.size() == 2);
    CHECK(acts[0].send);
    CHECK(acts[0].channel == 1);
    CHECK(acts[1].send);
    CHECK(acts[1].channel == 0);
}

TEST_CASE("decide is pure given equal state") {
    PolicySpec spec;
    spec.kind = PolicyKind::Spread;
    spec.spread_link = 0;
    spec.spread_pair = {0, 1};
    spec.lfsr_seed = 0xACE1;
    std::vector<EndpointView> eps{{0, LinkRole::Loop, 2}};
    DecideContext ctx;

    PolicyState s1 = make_policy_state(spec, 1, "osc");
    PolicyState s2 = make_policy_state(spec, 1, "osc");
    for (int i = 0; i < 1000; ++i) {
        auto a1 = decide(spec, eps, ctx, s1);
        auto a2 = decide(spec, eps, ctx, s2);
        REQUIRE(a1[0].channel == a2[0].channel);
        REQUIRE(a1[0].send == a2[0].send);
    }
}

TEST_CASE("spread policy dithers by the LFSR bit") {
    PolicySpec spec;
    spec.kind = PolicyKind::Spread;
    spec.spread_link = 4;
    spec.spread_pair = {0, 1};
    spec.lfsr_seed = 0xACE1;
    std::vector<EndpointView> eps{{4, LinkRole::Output, 2},
                                  {5, LinkRole::Input, 1}};
    PolicyState st = make_policy_state(spec, 1, "x");

    Lfsr reference(0xACE1);
    for (int i = 0; i < 100; ++i) {
        int bit = reference.step();
        auto acts = decide(spec, eps, {}, st);
        CHECK(acts[0].channel == ChannelId(bit));
        CHECK(acts[1].channel == 0);
        CHECK(acts[0].send);
    }
}

TEST_CASE("adaptive policy picks the highest crossed threshold") {
    PolicySpec spec;
    spec.kind = PolicyKind::Adaptive;
    spec.adaptive_link = 0;
    spec.adaptive_default = 0;
    spec.thresholds = {{80.0, 1}, {100.0, 2}};
    std::vector<EndpointView> eps{{0, LinkRole::Loop, 3}};
    PolicyState st = make_policy_state(spec, 1, "x");

    DecideContext cool;
    cool.sensed_temperature = 25;
    CHECK(decide(spec, eps, cool, st)[0].channel == 0);

    DecideContext warm;
    warm.sensed_temperature = 85;  // threshold at 80 selects the slow channel
    CHECK(decide(spec, eps, warm, st)[0].channel == 1);

    DecideContext hot;
    hot.sensed_temperature = 120;
    CHECK(decide(spec, eps, hot, st)[0].channel == 2);
}

TEST_CASE("limited policy latches done and keeps communication tokens") {
    PolicySpec spec;
    spec.kind = PolicyKind::Limited;
    spec.limit = 2;
    std::vector<EndpointView> eps{{0, LinkRole::Output, 1},
                                  {1, LinkRole::Loop, 1}};
    PolicyState st = make_policy_state(spec, 1, "x");

    DecideContext c0;
    c0.reg = 0;
    auto a = decide(spec, eps, c0, st);
    CHECK(a[0].send);
    CHECK(a[1].send);

    DecideContext c2;
    c2.reg = 2;
    a = decide(spec, eps, c2, st);
    CHECK_FALSE(a[0].send);
    CHECK(a[1].send);

    // register wrapped back below the limit: the latch must hold
    DecideContext wrapped;
    wrapped.reg = 0;
    a = decide(spec, eps, wrapped, st);
    CHECK_FALSE(a[0].send);
    CHECK(a[1].send);
}

TEST_CASE("burst policy engages communication every k+1 firings") {
    PolicySpec spec;
    spec.kind = PolicyKind::Burst;
    spec.burst_length = 2;
    std::vector<EndpointView> eps{{0, LinkRole::Input, 1},
                                  {1, LinkRole::Output, 1},
                                  {2, LinkRole::Loop, 1}};
    PolicyState st = make_policy_state(spec, 1, "x");
    for (int round = 0; round < 3; ++round) {
        for (int i = 0; i < 2; ++i) {
            auto a = decide(spec, eps, {}, st);
            CHECK_FALSE(a[0].send);
            CHECK_FALSE(a[1].send);
            CHECK(a[2].send);
        }
        auto a = decide(spec, eps, {}, st);
        CHECK(a[0].send);
        CHECK(a[1].send);
        CHECK(a[2].send);
    }
}

TEST_CASE("policy channel selections are validated") {
    PolicySpec spec;
    spec.channels[0] = 3;
    std::vector<EndpointView> eps{{0, LinkRole::Output, 2}};
    PolicyState st = make_policy_state(spec, 1, "x");
    CHECK_THROWS_AS(decide(spec, eps, {}, st), Error);
}

TEST_CASE("thermal equilibrium solver finds the coupled fixed point") {
    ThermalModel m;
    m.t_ambient = 25;
    m.r_th = 20;
    m.p_static = 0.2;
    m.p_per_edge = 8e-7;
    m.delay_coeff = 0.002;
    m.t_ref = 25;

    Time d0 = us(1);
    auto rate = [&](double t) {
        ThermalModel probe = m;
        probe.t_device = t;
        return 1e12 / double(probe.effective_delay(d0));
    };
    double t_star = solve_thermal_equilibrium(m, rate);
    double residual =
        std::abs(m.power(rate(t_star)) * m.r_th - (t_star - m.t_ambient));
    CHECK(residual < 1e-6);
    CHECK(t_star > m.t_ambient);
}
