#include <doctest.h>

#include <random>

#include "gals/core.hpp"
#include "testutil.hpp"

using namespace gals;

namespace {

Link simple_link(std::size_t fwd = 1, std::size_t bwd = 1,
                 LinkSide xnor = LinkSide::A) {
    Link l;
    l.id = 0;
    l.name = "l";
    l.kind = LinkKind::Communication;
    l.endpoint_a = 0;
    l.endpoint_b = 1;
    for (std::size_t i = 0; i < fwd; ++i)
        l.fwd_channels.push_back({ChannelId(i), ns(4)});
    for (std::size_t i = 0; i < bwd; ++i)
        l.bwd_channels.push_back({ChannelId(i), ns(1)});
    l.xnor_side = xnor;
    return l;
}

}  // namespace

TEST_CASE("evaluate_parity") {
    std::vector<std::uint8_t> zeros{0, 0};
    std::vector<std::uint8_t> one{1};
    std::vector<std::uint8_t> zero{0};

    // All flip-flops start at zero, so the XNOR side owns the token.
    CHECK(evaluate_parity(zeros, zeros, ParityConvention::Xnor) == 1);
    CHECK(evaluate_parity(zeros, zeros, ParityConvention::Xor) == 0);
    CHECK(evaluate_parity(one, zero, ParityConvention::Xor) == 1);
    CHECK(evaluate_parity(one, zero, ParityConvention::Xnor) == 0);
    CHECK(evaluate_parity({}, {}, ParityConvention::Xnor) == 1);
}

TEST_CASE("token location tracks one toggle end to end") {
    Link link = simple_link();
    LinkState s = initial_link_state(link);

    CHECK(token_location(link, s) == TokenLocation::AtA);

    Time arrival = toggle_channel(link, s, Direction::AtoB, 0, 0);
    CHECK(arrival == ns(4));
    CHECK(token_location(link, s) == TokenLocation::InFlight);

    deliver_transition(link, s);
    CHECK(token_location(link, s) == TokenLocation::AtB);

    // and back again
    arrival = toggle_channel(link, s, Direction::BtoA, 0, arrival);
    CHECK(arrival == ns(4) + ns(1));
    deliver_transition(link, s);
    CHECK(token_location(link, s) == TokenLocation::AtA);
}

TEST_CASE("token starts at the XNOR side") {
    Link link = simple_link(1, 1, LinkSide::B);
    LinkState s = initial_link_state(link);
    CHECK(token_location(link, s) == TokenLocation::AtB);
}

TEST_CASE("toggle preconditions") {
    Link link = simple_link();
    LinkState s = initial_link_state(link);

    // b does not hold the token
    try {
        toggle_channel(link, s, Direction::BtoA, 0, 0);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == Error::Code::TokenNotHeld);
    }

    toggle_channel(link, s, Direction::AtoB, 0, 0);
    try {
        toggle_channel(link, s, Direction::AtoB, 0, 0);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == Error::Code::TransitionInFlight);
    }

    LinkState fresh = initial_link_state(link);
    try {
        toggle_channel(link, fresh, Direction::AtoB, 7, 0);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == Error::Code::UnknownChannel);
    }
}

TEST_CASE("corrupted both-present state is a protocol violation") {
    Link link = simple_link();
    LinkState s = initial_link_state(link);
    s.received_a[0] = 1;  // hand corruption: both parities now odd
    CHECK_THROWS_AS(token_location(link, s), Error);
}

TEST_CASE("closed loop token returns to the owner") {
    Link l;
    l.id = 0;
    l.name = "loop";
    l.kind = LinkKind::ClosedLoop;
    l.endpoint_a = l.endpoint_b = 0;
    l.fwd_channels.push_back({0, ns(10)});
    LinkState s = initial_link_state(l);

    CHECK(token_location(l, s) == TokenLocation::AtA);
    toggle_channel(l, s, Direction::AtoB, 0, 0);
    CHECK(token_location(l, s) == TokenLocation::InFlight);
    deliver_transition(l, s);
    CHECK(token_location(l, s) == TokenLocation::AtA);

    CHECK_THROWS_AS(toggle_channel(l, s, Direction::BtoA, 0, 0), Error);
}

TEST_CASE("toggle round-trip holds for any accumulated flip-flop state") {
    // Parity signaling stays valid whatever values the T flip-flops have
    // accumulated, so scramble them and walk the token around.
    std::mt19937 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t nf = 1 + rng() % 3, nb = 1 + rng() % 3;
        Link link = simple_link(nf, nb);
        LinkState s = initial_link_state(link);
        // Random consistent quiescent state: received mirrors the driver.
        for (std::size_t i = 0; i < nf; ++i)
            s.received_b[i] = s.ff_a[i] = rng() & 1;
        for (std::size_t i = 0; i < nb; ++i)
            s.received_a[i] = s.ff_b[i] = rng() & 1;

        TokenLocation at = token_location(link, s);
        REQUIRE(at != TokenLocation::InFlight);
        Direction out = at == TokenLocation::AtA ? Direction::AtoB
                                                 : Direction::BtoA;
        ChannelId c1 = ChannelId(rng() % link.channels(out).size());
        toggle_channel(link, s, out, c1, 0);
        CHECK(token_location(link, s) == TokenLocation::InFlight);
        deliver_transition(link, s);
        TokenLocation there = token_location(link, s);
        CHECK(there != at);
        CHECK(there != TokenLocation::InFlight);

        Direction back = out == Direction::AtoB ? Direction::BtoA
                                                : Direction::AtoB;
        ChannelId c2 = ChannelId(rng() % link.channels(back).size());
        toggle_channel(link, s, back, c2, 0);
        deliver_transition(link, s);
        CHECK(token_location(link, s) == at);
    }
}

TEST_CASE("validate_topology bundling checks") {
    using test::Builder;

    SUBCASE("channel slower than datapath passes") {
        Builder b;
        ApbId src = b.apb("src", LogicKind::CounterSource);
        ApbId dst = b.apb("dst", LogicKind::RecordingSink);
        LinkId l = b.comm("l0", src, dst, {ps(5000)}, {ps(1000)});
        b.datapath(src, l, ps(4000));
        ValidationReport r = validate_topology(b.build());
        CHECK(r.ok());
        CHECK(r.warnings.empty());
    }

    SUBCASE("channel faster than datapath warns with slack") {
        Builder b;
        ApbId src = b.apb("src", LogicKind::CounterSource);
        ApbId dst = b.apb("dst", LogicKind::RecordingSink);
        LinkId l = b.comm("l0", src, dst, {ps(3000)}, {ps(1000)});
        b.datapath(src, l, ps(4000));
        ValidationReport r = validate_topology(b.build());
        CHECK(r.ok());
        REQUIRE(r.warnings.size() == 1);
        CHECK(r.warnings[0].code == IssueCode::BundlingWarning);
        CHECK(r.warnings[0].slack == ps(-1000));
    }

    SUBCASE("equal delay also warns (strictly-greater rule)") {
        Builder b;
        ApbId src = b.apb("src", LogicKind::CounterSource);
        ApbId dst = b.apb("dst", LogicKind::RecordingSink);
        LinkId l = b.comm("l0", src, dst, {ps(4000)}, {ps(1000)});
        b.datapath(src, l, ps(4000));
        ValidationReport r = validate_topology(b.build());
        REQUIRE(r.warnings.size() == 1);
        CHECK(r.warnings[0].slack == 0);
    }
}

TEST_CASE("validate_topology deadlock risk") {
    using test::Builder;

    // A token-retaining policy with no loop stalls after one firing.
    PolicySpec limited;
    limited.kind = PolicyKind::Limited;
    limited.limit = 3;

    SUBCASE("retaining APB without loop is flagged") {
        Builder b;
        ApbId src = b.apb("src", LogicKind::CounterSource, limited);
        ApbId dst = b.apb("dst", LogicKind::RecordingSink);
        LinkId l = b.comm("l0", src, dst, {ns(5)}, {ns(1)});
        b.datapath(src, l, ns(4));
        ValidationReport r = validate_topology(b.build());
        CHECK(r.ok());
        REQUIRE(r.warnings.size() == 1);
        CHECK(r.warnings[0].code == IssueCode::DeadlockRisk);
    }

    SUBCASE("same APB with a loop is fine") {
        Builder b;
        ApbId src = b.apb("src", LogicKind::CounterSource, limited);
        ApbId dst = b.apb("dst", LogicKind::RecordingSink);
        LinkId l = b.comm("l0", src, dst, {ns(5)}, {ns(1)});
        LinkId lp = b.loop("lp", src, {ns(2)});
        b.datapath(src, l, ns(4));
        b.datapath(src, lp, ns(1));
        ValidationReport r = validate_topology(b.build());
        CHECK(r.ok());
        CHECK(r.warnings.empty());
    }
}

TEST_CASE("validate_topology malformed networks") {
    using test::Builder;

    SUBCASE("dangling endpoint") {
        Builder b;
        b.apb("a", LogicKind::CounterSource);
        Network net = b.net;
        Link l;
        l.id = 0;
        l.name = "bad";
        l.endpoint_a = 0;
        l.endpoint_b = 9;
        l.fwd_channels.push_back({0, ns(1)});
        l.bwd_channels.push_back({0, ns(1)});
        net.links.push_back(l);
        net.rebuild_endpoints();
        CHECK_FALSE(validate_topology(net).ok());
    }

    SUBCASE("missing datapath declaration") {
        Builder b;
        ApbId src = b.apb("src", LogicKind::CounterSource);
        b.apb("dst", LogicKind::RecordingSink);
        b.comm("l0", src, 1, {ns(5)}, {ns(1)});
        CHECK_FALSE(validate_topology(b.build()).ok());
    }

    SUBCASE("zero-delay channel") {
        Builder b;
        ApbId src = b.apb("src", LogicKind::CounterSource);
        b.apb("dst", LogicKind::RecordingSink);
        LinkId l = b.comm("l0", src, 1, {ps(0)}, {ns(1)});
        b.datapath(src, l, ps(0));
        CHECK_FALSE(validate_topology(b.build()).ok());
    }

    SUBCASE("policy references a missing channel") {
        Builder b;
        PolicySpec pol;
        pol.channels[0] = 5;
        ApbId src = b.apb("src", LogicKind::CounterSource, pol);
        b.apb("dst", LogicKind::RecordingSink);
        LinkId l = b.comm("l0", src, 1, {ns(5)}, {ns(1)});
        b.datapath(src, l, ns(4));
        CHECK_FALSE(validate_topology(b.build()).ok());
    }

    SUBCASE("report is pure") {
        Builder b;
        ApbId src = b.apb("src", LogicKind::CounterSource);
        b.apb("dst", LogicKind::RecordingSink);
        LinkId l = b.comm("l0", src, 1, {ps(3000)}, {ns(1)});
        b.datapath(src, l, ps(4000));
        Network net = b.build();
        ValidationReport r1 = validate_topology(net);
        ValidationReport r2 = validate_topology(net);
        REQUIRE(r1.warnings.size() == r2.warnings.size());
        for (std::size_t i = 0; i < r1.warnings.size(); ++i) {
            CHECK(r1.warnings[i].message == r2.warnings[i].message);
            CHECK(r1.warnings[i].slack == r2.warnings[i].slack);
        }
    }
}

TEST_CASE("logic function catalog") {
    Word mask = 0xFF;
    CHECK(eval_logic({LogicKind::CounterSource, {}, {}}, 7, {}, mask) == 8);
    CHECK(eval_logic({LogicKind::CounterSource, {}, {}}, 255, {}, mask) == 0);
    std::vector<Word> ins{42};
    CHECK(eval_logic({LogicKind::Passthrough, {}, {}}, 7, ins, mask) == 42);
    CHECK(eval_logic({LogicKind::RecordingSink, {}, {}}, 7, ins, mask) == 42);
    std::vector<Word> two{3, 4};
    CHECK(eval_logic({LogicKind::Accumulator, {}, {}}, 10, two, mask) == 17);

    LogicSpec table;
    table.kind = LogicKind::CustomTable;
    table.table.rows = {{{0, 1}, 5}, {{5, 1}, 0}};
    table.table.fallback = 9;
    std::vector<Word> in1{1};
    CHECK(eval_logic(table, 0, in1, mask) == 5);
    CHECK(eval_logic(table, 5, in1, mask) == 0);
    CHECK(eval_logic(table, 3, in1, mask) == 9);
}
