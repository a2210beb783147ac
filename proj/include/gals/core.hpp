#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gals/policies.hpp"
#include "gals/types.hpp"

namespace gals {

// A parity-encoded token channel bundle. Communication links join two GPRMs
// and carry the shared token in either direction over selectable delay
// channels; closed loops join a GPRM to itself and only run forward.
struct Link {
    LinkId id = 0;
    std::string name;
    LinkKind kind = LinkKind::Communication;
    GprmId endpoint_a = 0;  // Output side for communication links
    GprmId endpoint_b = 0;  // Input side; equals endpoint_a for loops
    std::vector<Channel> fwd_channels;  // a -> b
    std::vector<Channel> bwd_channels;  // b -> a, empty for loops
    LinkSide xnor_side = LinkSide::A;   // token holder at reset

    ParityConvention convention(LinkSide side) const {
        return side == xnor_side ? ParityConvention::Xnor : ParityConvention::Xor;
    }
    const std::vector<Channel>& channels(Direction dir) const {
        return dir == Direction::AtoB ? fwd_channels : bwd_channels;
    }
    GprmId sender(Direction dir) const {
        return dir == Direction::AtoB ? endpoint_a : endpoint_b;
    }
    GprmId receiver(Direction dir) const {
        return dir == Direction::AtoB ? endpoint_b : endpoint_a;
    }

    bool operator==(const Link&) const = default;
};

struct InFlightTransition {
    Direction direction = Direction::AtoB;
    ChannelId channel = 0;
    Time arrival = 0;

    bool operator==(const InFlightTransition&) const = default;
};

// Wire-level state of one link. ff_a drives the forward channels, ff_b the
// backward ones; received_* are the wire values visible at each endpoint
// after the channel delay. For loops, received_a carries the returned copies
// of ff_a and the b-side vectors stay empty.
struct LinkState {
    std::vector<std::uint8_t> ff_a;
    std::vector<std::uint8_t> ff_b;
    std::vector<std::uint8_t> received_a;
    std::vector<std::uint8_t> received_b;
    std::optional<InFlightTransition> in_flight;

    bool operator==(const LinkState&) const = default;
};

LinkState initial_link_state(const Link& link);

struct Endpoint {
    LinkId link = 0;
    LinkRole role = LinkRole::Output;

    bool operator==(const Endpoint&) const = default;
};

// Rendezvous module: fires a clock pulse exactly when every controlled
// endpoint holds its token. `reset_hold` and the clock-edge record live in
// the simulation state, not here; this is pure topology.
struct Gprm {
    GprmId id = 0;
    std::vector<Endpoint> endpoints;  // in declaration order

    bool operator==(const Gprm&) const = default;
};

// Built-in logic-function catalog. CustomFn is API-level only; the config
// format expresses small custom functions as truth tables.
enum class LogicKind {
    CounterSource,  // next = own + 1
    RecordingSink,  // next = first input snapshot
    Passthrough,    // next = first input snapshot
    Accumulator,    // next = own + sum of input snapshots
    CustomTable,    // truth-table lookup on (own, inputs...)
    CustomFn,
};

struct CustomTable {
    // Each row matches an exact (own register, input snapshots...) tuple.
    std::vector<std::pair<std::vector<Word>, Word>> rows;
    Word fallback = 0;

    bool operator==(const CustomTable&) const = default;
};

using CustomLogicFn = std::function<Word(Word, std::span<const Word>)>;

struct LogicSpec {
    LogicKind kind = LogicKind::Passthrough;
    CustomTable table;     // CustomTable only
    CustomLogicFn custom;  // CustomFn only

    bool operator==(const LogicSpec& other) const {
        return kind == other.kind && table == other.table;
    }
};

Word eval_logic(const LogicSpec& spec, Word own, std::span<const Word> inputs,
                Word mask);

// Autonomous processing block: a registered logic function plus the flow
// control policy and declared worst-case datapath delays, one per Output or
// Loop endpoint.
struct Apb {
    ApbId id = 0;
    std::string name;
    GprmId gprm = 0;
    unsigned width = 16;
    Word initial = 0;
    LogicSpec logic;
    PolicySpec policy;
    std::map<LinkId, Time> datapath_delays;
    Time gprm_overhead = 0;  // added to every outgoing transition's departure

    Word mask() const {
        return width >= 64 ? ~Word{0} : ((Word{1} << width) - 1);
    }

    bool operator==(const Apb& other) const {
        return id == other.id && name == other.name && gprm == other.gprm &&
               width == other.width && initial == other.initial &&
               logic == other.logic && policy == other.policy &&
               datapath_delays == other.datapath_delays &&
               gprm_overhead == other.gprm_overhead;
    }
};

struct Network {
    std::vector<Apb> apbs;    // index == ApbId == GprmId
    std::vector<Link> links;  // index == LinkId
    std::vector<Gprm> gprms;  // derived; endpoints in link declaration order

    const Apb* find_apb(const std::string& name) const;
    const Link* find_link(const std::string& name) const;

    // Recomputes gprms from apbs/links. Call after assembling by hand.
    void rebuild_endpoints();

    bool operator==(const Network& other) const {
        return apbs == other.apbs && links == other.links;
    }
};

// --- Parity and token operations -------------------------------------------

// Exclusive-or of all bits, inverted under the Xnor convention. 1 means the
// token is present at this side.
int evaluate_parity(std::span<const std::uint8_t> own_ffs,
                    std::span<const std::uint8_t> received,
                    ParityConvention convention);

int parity_at(const Link& link, const LinkState& state, LinkSide side);

// Derived deterministically from the parity equations. Throws
// ProtocolViolation if both endpoints claim the token; that state is
// unreachable from legal transitions.
TokenLocation token_location(const Link& link, const LinkState& state);

// Inverts the sender flip-flop for `channel` and records the in-flight
// transition; arrival = now + delay. The default overload uses the channel's
// nominal delay; the explicit one lets the caller apply environment scaling.
Time toggle_channel(const Link& link, LinkState& state, Direction dir,
                    ChannelId channel, Time now);
Time toggle_channel(const Link& link, LinkState& state, Direction dir,
                    ChannelId channel, Time now, Time effective_delay);

// Completes the in-flight transition: flips the received wire at the
// destination side. Returns the transition that was delivered.
InFlightTransition deliver_transition(const Link& link, LinkState& state);

// --- Static validation ------------------------------------------------------

enum class IssueCode {
    MalformedNetwork,
    BundlingWarning,
    DeadlockRisk,
};

struct ValidationIssue {
    IssueCode code = IssueCode::MalformedNetwork;
    std::string message;
    // Static bundling slack (channel delay minus worst-case datapath delay),
    // meaningful for BundlingWarning only.
    Time slack = 0;
};

struct ValidationReport {
    std::vector<ValidationIssue> errors;    // MalformedNetwork findings
    std::vector<ValidationIssue> warnings;  // bundling + deadlock risks

    bool ok() const { return errors.empty(); }
    bool clean() const { return errors.empty() && warnings.empty(); }
};

// Pure: the same network yields the identical report. Flags, per Output or
// Loop endpoint, every channel whose delay does not exceed the declared
// worst-case datapath delay, and every token-retaining APB that lacks the
// closed loop it would need to keep firing.
ValidationReport validate_topology(const Network& network);

}  // namespace gals
