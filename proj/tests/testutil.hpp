#pragma once

#include <deque>
#include <random>
#include <string>
#include <vector>

#include "gals/core.hpp"
#include "gals/engine.hpp"

namespace gals::test {

// Small fluent builder for hand-made topologies.
struct Builder {
    Network net;

    ApbId apb(const std::string& name, LogicKind logic,
              PolicySpec policy = {}, unsigned width = 16, Word init = 0,
              Time overhead = 0) {
        Apb a;
        a.id = ApbId(net.apbs.size());
        a.name = name;
        a.gprm = a.id;
        a.width = width;
        a.initial = init;
        a.logic.kind = logic;
        a.policy = std::move(policy);
        a.gprm_overhead = overhead;
        net.apbs.push_back(std::move(a));
        return ApbId(net.apbs.size() - 1);
    }

    LinkId comm(const std::string& name, ApbId from, ApbId to,
                std::vector<Time> fwd, std::vector<Time> bwd,
                LinkSide xnor = LinkSide::A) {
        Link l;
        l.id = LinkId(net.links.size());
        l.name = name;
        l.kind = LinkKind::Communication;
        l.endpoint_a = from;
        l.endpoint_b = to;
        for (std::size_t i = 0; i < fwd.size(); ++i)
            l.fwd_channels.push_back({ChannelId(i), fwd[i]});
        for (std::size_t i = 0; i < bwd.size(); ++i)
            l.bwd_channels.push_back({ChannelId(i), bwd[i]});
        l.xnor_side = xnor;
        net.links.push_back(std::move(l));
        return LinkId(net.links.size() - 1);
    }

    LinkId loop(const std::string& name, ApbId owner, std::vector<Time> delays) {
        Link l;
        l.id = LinkId(net.links.size());
        l.name = name;
        l.kind = LinkKind::ClosedLoop;
        l.endpoint_a = owner;
        l.endpoint_b = owner;
        for (std::size_t i = 0; i < delays.size(); ++i)
            l.fwd_channels.push_back({ChannelId(i), delays[i]});
        net.links.push_back(std::move(l));
        return LinkId(net.links.size() - 1);
    }

    void datapath(ApbId apb, LinkId link, Time worst) {
        net.apbs[apb].datapath_delays[link] = worst;
    }

    Network build() {
        net.rebuild_endpoints();
        return net;
    }
};

// Self-clocked oscillator: one APB whose only endpoint is a closed loop.
inline Network oscillator(Time loop_delay, Time overhead = 0,
                          Time loop_datapath = 1) {
    Builder b;
    ApbId osc = b.apb("osc", LogicKind::CounterSource, {}, 32, 0, overhead);
    LinkId l = b.loop("loop0", osc, {loop_delay});
    b.datapath(osc, l, loop_datapath);
    return b.build();
}

struct Pipeline {
    Network net;
    ApbId source = 0;
    ApbId sink = 0;
    LinkId first_link = 0;
    LinkId last_link = 0;
};

// source -> stage_1 .. stage_n -> sink, counter feeding a recording sink.
// Every datapath is declared below the slowest forward channel, so the
// topology validates clean.
inline Pipeline pipeline(std::size_t stages, Time fwd = ns(5), Time bwd = ns(1),
                         Time datapath = ns(4)) {
    Builder b;
    Pipeline p;
    p.source = b.apb("src", LogicKind::CounterSource, {}, 32);
    std::vector<ApbId> chain{p.source};
    for (std::size_t i = 0; i < stages; ++i)
        chain.push_back(
            b.apb("stage" + std::to_string(i), LogicKind::Passthrough, {}, 32));
    p.sink = b.apb("sink", LogicKind::RecordingSink, {}, 32);
    chain.push_back(p.sink);
    for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
        LinkId l = b.comm("l" + std::to_string(i), chain[i], chain[i + 1],
                          {fwd}, {bwd});
        b.datapath(chain[i], l, datapath);
        if (i == 0) p.first_link = l;
        p.last_link = l;
    }
    p.net = b.build();
    return p;
}

// Replays the token-movement log and keeps an operational position per link,
// independent of the parity equations. Flags any illegal move.
class TokenTracker {
public:
    explicit TokenTracker(const Network& net) {
        for (const auto& link : net.links)
            loc_.push_back(link.xnor_side == LinkSide::A ? TokenLocation::AtA
                                                         : TokenLocation::AtB);
    }

    // Consumes new records; returns false on an illegal movement.
    bool advance(const Trace& trace) {
        for (; cursor_ < trace.tokens.size(); ++cursor_) {
            const TokenRecord& r = trace.tokens[cursor_];
            if (loc_[r.link] != r.from) return false;
            bool departure = r.to == TokenLocation::InFlight;
            bool arrival = r.from == TokenLocation::InFlight;
            if (departure == arrival) return false;
            loc_[r.link] = r.to;
        }
        return true;
    }

    TokenLocation location(LinkId link) const { return loc_[link]; }

private:
    std::vector<TokenLocation> loc_;
    std::size_t cursor_ = 0;
};

// Plain-queue FIFO oracle over a pipeline trace: every value departing the
// source must reach the sink exactly once, in order.
struct FifoOracle {
    // sink register history must be a prefix of the sent sequence, and the
    // backlog can never exceed the pipeline's token capacity.
    static bool check(const Network& net, const Trace& trace, ApbId source,
                      ApbId sink, LinkId first_link, std::size_t capacity,
                      std::string* why = nullptr) {
        std::deque<Word> queue;
        // Values depart the source at each forward toggle of its output link;
        // the value is the register clocked at that same instant.
        std::size_t reg_cursor = 0;
        std::vector<std::pair<Time, Word>> sent;
        for (const auto& rec : trace.tokens) {
            if (rec.link != first_link || rec.to != TokenLocation::InFlight ||
                rec.from != TokenLocation::AtA)
                continue;
            while (reg_cursor < trace.registers.size() &&
                   (trace.registers[reg_cursor].apb != source ||
                    trace.registers[reg_cursor].time < rec.time))
                ++reg_cursor;
            if (reg_cursor >= trace.registers.size() ||
                trace.registers[reg_cursor].time != rec.time) {
                if (why) *why = "no source register update at departure time";
                return false;
            }
            sent.emplace_back(rec.time, trace.registers[reg_cursor].value);
        }
        for (const auto& [t, v] : sent) queue.push_back(v);

        std::size_t received = 0;
        for (const auto& rec : trace.registers) {
            if (rec.apb != sink) continue;
            if (queue.empty()) {
                if (why) *why = "sink fired with no outstanding item";
                return false;
            }
            if (queue.front() != rec.value) {
                if (why)
                    *why = "sink got " + std::to_string(rec.value) +
                           ", expected " + std::to_string(queue.front());
                return false;
            }
            queue.pop_front();
            ++received;
        }
        (void)net;
        if (queue.size() > capacity) {
            if (why)
                *why = "backlog " + std::to_string(queue.size()) +
                       " exceeds pipeline capacity " + std::to_string(capacity);
            return false;
        }
        return true;
    }
};

}  // namespace gals::test
