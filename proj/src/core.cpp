#include "gals/core.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

namespace gals {

const char* Error::code_name(Code c) {
    switch (c) {
        case Code::TokenNotHeld: return "token-not-held";
        case Code::TransitionInFlight: return "transition-in-flight";
        case Code::ProtocolViolation: return "protocol-violation";
        case Code::StallDecision: return "stall-decision";
        case Code::MalformedNetwork: return "malformed-network";
        case Code::UnknownChannel: return "unknown-channel";
        case Code::UnknownSink: return "unknown-sink";
        case Code::InsufficientLength: return "insufficient-length";
        case Code::BandOutOfRange: return "band-out-of-range";
        case Code::MismatchedSpectra: return "mismatched-spectra";
        case Code::UnsupportedShape: return "unsupported-shape";
        case Code::ZeroState: return "zero-state";
        case Code::Config: return "config";
    }
    return "unknown";
}

LinkState initial_link_state(const Link& link) {
    LinkState s;
    s.ff_a.assign(link.fwd_channels.size(), 0);
    s.received_b.assign(
        link.kind == LinkKind::Communication ? link.fwd_channels.size() : 0, 0);
    s.ff_b.assign(link.bwd_channels.size(), 0);
    // For loops the forward wires come back to the sender itself.
    s.received_a.assign(link.kind == LinkKind::ClosedLoop
                            ? link.fwd_channels.size()
                            : link.bwd_channels.size(),
                        0);
    return s;
}

Word eval_logic(const LogicSpec& spec, Word own, std::span<const Word> inputs,
                Word mask) {
    Word next = own;
    switch (spec.kind) {
        case LogicKind::CounterSource:
            next = own + 1;
            break;
        case LogicKind::RecordingSink:
        case LogicKind::Passthrough:
            next = inputs.empty() ? own : inputs[0];
            break;
        case LogicKind::Accumulator:
            next = std::accumulate(inputs.begin(), inputs.end(), own);
            break;
        case LogicKind::CustomTable: {
            next = spec.table.fallback;
            for (const auto& [key, value] : spec.table.rows) {
                if (key.size() != inputs.size() + 1 || key[0] != own) continue;
                if (std::equal(key.begin() + 1, key.end(), inputs.begin(),
                               inputs.end())) {
                    next = value;
                    break;
                }
            }
            break;
        }
        case LogicKind::CustomFn:
            next = spec.custom(own, inputs);
            break;
    }
    return next & mask;
}

const Apb* Network::find_apb(const std::string& name) const {
    for (const auto& a : apbs)
        if (a.name == name) return &a;
    return nullptr;
}

const Link* Network::find_link(const std::string& name) const {
    for (const auto& l : links)
        if (l.name == name) return &l;
    return nullptr;
}

void Network::rebuild_endpoints() {
    gprms.assign(apbs.size(), Gprm{});
    for (std::size_t i = 0; i < apbs.size(); ++i) gprms[i].id = GprmId(i);
    for (const auto& link : links) {
        if (link.kind == LinkKind::ClosedLoop) {
            if (link.endpoint_a < gprms.size())
                gprms[link.endpoint_a].endpoints.push_back(
                    {link.id, LinkRole::Loop});
            continue;
        }
        if (link.endpoint_a < gprms.size())
            gprms[link.endpoint_a].endpoints.push_back(
                {link.id, LinkRole::Output});
        if (link.endpoint_b < gprms.size())
            gprms[link.endpoint_b].endpoints.push_back(
                {link.id, LinkRole::Input});
    }
}

int evaluate_parity(std::span<const std::uint8_t> own_ffs,
                    std::span<const std::uint8_t> received,
                    ParityConvention convention) {
    int p = convention == ParityConvention::Xnor ? 1 : 0;
    for (auto b : own_ffs) p ^= (b & 1);
    for (auto b : received) p ^= (b & 1);
    return p;
}

int parity_at(const Link& link, const LinkState& state, LinkSide side) {
    if (side == LinkSide::A)
        return evaluate_parity(state.ff_a, state.received_a,
                               link.convention(LinkSide::A));
    return evaluate_parity(state.ff_b, state.received_b,
                           link.convention(LinkSide::B));
}

TokenLocation token_location(const Link& link, const LinkState& state) {
    int pa = parity_at(link, state, LinkSide::A);
    if (link.kind == LinkKind::ClosedLoop)
        return pa ? TokenLocation::AtA : TokenLocation::InFlight;
    int pb = parity_at(link, state, LinkSide::B);
    if (pa && pb)
        throw Error(Error::Code::ProtocolViolation,
                    "link '" + link.name +
                        "': both endpoints report token presence");
    if (pa) return TokenLocation::AtA;
    if (pb) return TokenLocation::AtB;
    return TokenLocation::InFlight;
}

Time toggle_channel(const Link& link, LinkState& state, Direction dir,
                    ChannelId channel, Time now) {
    const auto& chans = link.channels(dir);
    if (channel >= chans.size())
        throw Error(Error::Code::UnknownChannel,
                    "link '" + link.name + "': no channel " +
                        std::to_string(channel) + " in this direction");
    return toggle_channel(link, state, dir, channel, now, chans[channel].delay);
}

Time toggle_channel(const Link& link, LinkState& state, Direction dir,
                    ChannelId channel, Time now, Time effective_delay) {
    if (link.kind == LinkKind::ClosedLoop && dir != Direction::AtoB)
        throw Error(Error::Code::UnknownChannel,
                    "link '" + link.name + "': loops are forward-only");
    const auto& chans = link.channels(dir);
    if (channel >= chans.size())
        throw Error(Error::Code::UnknownChannel,
                    "link '" + link.name + "': no channel " +
                        std::to_string(channel) + " in this direction");
    if (state.in_flight)
        throw Error(Error::Code::TransitionInFlight,
                    "link '" + link.name + "': transition already in flight");

    TokenLocation held =
        dir == Direction::AtoB ? TokenLocation::AtA : TokenLocation::AtB;
    if (token_location(link, state) != held)
        throw Error(Error::Code::TokenNotHeld,
                    "link '" + link.name + "': sender does not hold the token");

    auto& ffs = dir == Direction::AtoB ? state.ff_a : state.ff_b;
    ffs[channel] ^= 1;
    Time arrival = now + effective_delay;
    state.in_flight = InFlightTransition{dir, channel, arrival};
    return arrival;
}

InFlightTransition deliver_transition(const Link& link, LinkState& state) {
    if (!state.in_flight)
        throw Error(Error::Code::ProtocolViolation,
                    "link '" + link.name + "': nothing in flight to deliver");
    InFlightTransition t = *state.in_flight;
    auto& wires = link.kind == LinkKind::ClosedLoop
                      ? state.received_a
                      : (t.direction == Direction::AtoB ? state.received_b
                                                        : state.received_a);
    wires[t.channel] ^= 1;
    state.in_flight.reset();
    return t;
}

namespace {

void malformed(ValidationReport& report, const std::string& message) {
    report.errors.push_back({IssueCode::MalformedNetwork, message, 0});
}

}  // namespace

ValidationReport validate_topology(const Network& network) {
    ValidationReport report;

    std::set<std::string> apb_names;
    for (const auto& apb : network.apbs) {
        if (!apb_names.insert(apb.name).second)
            malformed(report, "duplicate APB name '" + apb.name + "'");
        if (apb.width == 0 || apb.width > 64)
            malformed(report, "APB '" + apb.name + "': register width " +
                                  std::to_string(apb.width) +
                                  " outside 1..64");
    }

    std::set<std::string> link_names;
    for (const auto& link : network.links) {
        std::string where = "link '" + link.name + "'";
        if (!link_names.insert(link.name).second)
            malformed(report, "duplicate link name '" + link.name + "'");
        if (link.endpoint_a >= network.apbs.size() ||
            link.endpoint_b >= network.apbs.size()) {
            malformed(report, where + ": endpoint references unknown GPRM");
            continue;
        }
        if (link.fwd_channels.empty())
            malformed(report, where + ": no forward channels");
        if (link.kind == LinkKind::Communication) {
            if (link.bwd_channels.empty())
                malformed(report, where +
                                      ": communication link has no backward "
                                      "channels");
            if (link.endpoint_a == link.endpoint_b)
                malformed(report,
                          where + ": communication link joins a GPRM to itself");
        } else {
            if (!link.bwd_channels.empty())
                malformed(report, where + ": closed loop has backward channels");
            if (link.endpoint_a != link.endpoint_b)
                malformed(report, where + ": closed loop endpoints differ");
            if (link.xnor_side != LinkSide::A)
                malformed(report, where + ": loop token must start at the GPRM");
        }
        for (const auto& ch : link.fwd_channels)
            if (ch.delay <= 0)
                malformed(report, where + ": forward channel " +
                                      std::to_string(ch.id) +
                                      " has non-positive delay");
        for (const auto& ch : link.bwd_channels)
            if (ch.delay <= 0)
                malformed(report, where + ": backward channel " +
                                      std::to_string(ch.id) +
                                      " has non-positive delay");
    }
    if (!report.errors.empty()) return report;

    // Per-endpoint checks need consistent role tables.
    Network net = network;
    net.rebuild_endpoints();

    for (const auto& apb : net.apbs) {
        const Gprm& gprm = net.gprms[apb.gprm];
        std::string where = "APB '" + apb.name + "'";

        bool has_loop = false;
        for (const auto& ep : gprm.endpoints) {
            const Link& link = net.links[ep.link];
            if (ep.role == LinkRole::Loop) has_loop = true;

            if (ep.role == LinkRole::Input) continue;
            auto it = apb.datapath_delays.find(ep.link);
            if (it == apb.datapath_delays.end()) {
                malformed(report, where + ": no worst-case datapath delay "
                                          "declared for link '" +
                                          link.name + "'");
                continue;
            }
            Time worst = it->second;
            // Bundled-data constraint: the control transition must outlast the
            // slowest datapath it announces.
            for (const auto& ch : link.fwd_channels) {
                if (ch.delay <= worst) {
                    std::ostringstream msg;
                    msg << where << ": link '" << link.name << "' channel "
                        << ch.id << " delay " << ch.delay
                        << " ps does not exceed worst-case datapath " << worst
                        << " ps";
                    report.warnings.push_back({IssueCode::BundlingWarning,
                                               msg.str(), ch.delay - worst});
                }
            }
        }

        // Channel references inside the policy.
        auto driven_count = [&](LinkId id) -> std::optional<std::uint32_t> {
            for (const auto& ep : gprm.endpoints) {
                if (ep.link != id) continue;
                const Link& link = net.links[ep.link];
                return ep.role == LinkRole::Input
                           ? std::uint32_t(link.bwd_channels.size())
                           : std::uint32_t(link.fwd_channels.size());
            }
            return std::nullopt;
        };
        auto check_channel = [&](LinkId id, ChannelId ch,
                                 const std::string& what) {
            auto n = driven_count(id);
            if (!n)
                malformed(report, where + ": policy " + what +
                                      " references a link this GPRM does not "
                                      "control");
            else if (ch >= *n)
                malformed(report, where + ": policy " + what +
                                      " references missing channel " +
                                      std::to_string(ch));
        };
        const PolicySpec& pol = apb.policy;
        for (const auto& [lid, ch] : pol.channels)
            check_channel(lid, ch, "channel assignment");
        if (pol.kind == PolicyKind::Spread) {
            check_channel(pol.spread_link, pol.spread_pair.first, "spread pair");
            check_channel(pol.spread_link, pol.spread_pair.second, "spread pair");
            check_channel(pol.spread_link, pol.reference_channel,
                          "reference channel");
        }
        if (pol.kind == PolicyKind::Adaptive) {
            check_channel(pol.adaptive_link, pol.adaptive_default,
                          "adaptive default");
            for (const auto& [temp, ch] : pol.thresholds)
                check_channel(pol.adaptive_link, ch, "adaptive threshold");
        }

        // An APB that may retain every communication token can only keep
        // firing if a loop keeps losing and recovering a token for it.
        bool has_comm = false;
        for (const auto& ep : gprm.endpoints)
            if (ep.role != LinkRole::Loop) has_comm = true;
        if (pol.may_retain_all_communication_tokens() && has_comm && !has_loop)
            report.warnings.push_back(
                {IssueCode::DeadlockRisk,
                 where + ": policy may retain all communication tokens but the "
                         "GPRM has no closed loop; it will stall after that "
                         "firing",
                 0});
        if (gprm.endpoints.empty())
            malformed(report, where + ": GPRM controls no links");
    }

    return report;
}

}  // namespace gals
