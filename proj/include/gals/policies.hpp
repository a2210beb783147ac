#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "gals/types.hpp"

namespace gals {

// 16-bit Fibonacci LFSR with taps (16, 15, 13, 4), maximal length: every
// nonzero seed walks all 65535 states before repeating. The output bit is the
// pre-shift low bit.
class Lfsr {
public:
    static constexpr std::uint16_t kTapMask = 0xD008;  // bits 16, 15, 13, 4

    explicit Lfsr(std::uint16_t seed) : reg_(seed) {
        if (seed == 0)
            throw Error(Error::Code::ZeroState, "LFSR seed must be nonzero");
    }

    std::uint16_t state() const { return reg_; }

    int step() {
        int out = reg_ & 1;
        std::uint16_t fb = static_cast<std::uint16_t>(
            __builtin_popcount(reg_ & kTapMask) & 1);
        reg_ = static_cast<std::uint16_t>((reg_ >> 1) | (fb << 15));
        if (reg_ == 0)
            throw Error(Error::Code::ZeroState, "LFSR reached zero state");
        return out;
    }

private:
    std::uint16_t reg_;
};

// Lumped first-order thermal model of the device package. Power is static
// leakage plus a per-clock-edge switching charge; heat leaves through a single
// thermal resistance (step-changeable to model a cooling-fan failure).
// Channel delays stretch linearly with temperature around t_ref.
struct ThermalModel {
    double t_ambient = 25.0;     // deg C
    double t_device = 25.0;      // deg C, state variable
    double r_th = 1.0;           // deg C per watt
    double c_th = 1.0;           // joules per deg C
    double p_static = 0.0;       // watts
    double p_per_edge = 0.0;     // joules per clock edge
    double delay_coeff = 0.002;  // fractional delay increase per deg C
    double t_ref = 25.0;         // deg C at which nominal delays hold

    double power(double edges_per_second) const {
        return p_static + p_per_edge * edges_per_second;
    }

    // Explicit first-order update over a window of dt seconds in which
    // `edges` clock edges were observed.
    void step(std::int64_t edges, double dt_seconds);

    // Nominal delay d0 scaled by (1 + k*(T - t_ref)), rounded to the nearest
    // picosecond and floored at 1.
    Time effective_delay(Time d0) const;
};

Time effective_delay(Time d0, const ThermalModel& model);

// What a flow-control decision tells the GPRM to do with one endpoint.
struct EndpointAction {
    bool send = false;
    ChannelId channel = 0;
};

// Endpoint summary handed to the flow-control logic: enough to pick channels
// without pulling in the whole topology.
struct EndpointView {
    LinkId link = 0;
    LinkRole role = LinkRole::Output;
    std::uint32_t channel_count = 0;  // channels this GPRM drives on the link
};

struct PolicyState;

// Everything the flow-control logic may look at when deciding. Sensor
// readings count as policy inputs; the state advances exactly once per firing.
struct DecideContext {
    Word reg = 0;
    std::span<const Word> inputs;     // input-link snapshots, endpoint order
    double sensed_temperature = 0.0;  // deg C, thermal model plus sensor noise
};

using CustomDecideFn = std::function<std::vector<EndpointAction>(
    const DecideContext&, std::span<const EndpointView>, PolicyState&)>;

enum class PolicyKind {
    Fixed,     // always send every token, fixed channel per endpoint
    Spread,    // Fixed, but one endpoint dithers between a channel pair by LFSR bit
    Adaptive,  // Fixed, but one endpoint picks its channel from a temperature table
    Limited,   // send on communication endpoints until the register reaches a
               // limit, then keep them and cycle only loop endpoints
    Burst,     // k loop-only firings, then one firing that engages everything
    Custom,    // arbitrary decision function (API-level only, not configurable)
};

struct PolicySpec {
    PolicyKind kind = PolicyKind::Fixed;

    // Channel choice per endpoint; endpoints not listed use channel 0.
    std::map<LinkId, ChannelId> channels;

    // Spread
    LinkId spread_link = 0;
    std::pair<ChannelId, ChannelId> spread_pair{0, 0};
    std::optional<std::uint16_t> lfsr_seed;  // derived from the master seed if unset
    ChannelId reference_channel = 0;         // fixed-mode stand-in for comparisons

    // Adaptive
    LinkId adaptive_link = 0;
    ChannelId adaptive_default = 0;
    std::vector<std::pair<double, ChannelId>> thresholds;  // (deg C, channel), ascending

    // Limited
    Word limit = 0;

    // Burst
    std::uint64_t burst_length = 0;

    CustomDecideFn custom;  // PolicyKind::Custom only

    // True when the policy can legally keep every communication token at some
    // firing; such APBs need a closed loop or they will eventually stall.
    bool may_retain_all_communication_tokens() const;

    bool operator==(const PolicySpec& other) const;
};

struct PolicyState {
    std::optional<Lfsr> lfsr;
    std::uint64_t firing_counter = 0;
    bool done = false;  // Limited latch; survives register wrap-around
};

PolicyState make_policy_state(const PolicySpec& spec, std::uint64_t master_seed,
                              const std::string& apb_name);

// One flow-control decision: a total Send/Keep assignment over the GPRM's
// endpoints, in endpoint order. Pure given the state; the state advances here
// and nowhere else.
std::vector<EndpointAction> decide(const PolicySpec& spec,
                                   std::span<const EndpointView> endpoints,
                                   const DecideContext& ctx, PolicyState& state);

// Scalar fixed point of the coupled thermal loop: T = t_ambient +
// P(rate(T)) * r_th, solved by damped iteration. `rate_of` maps device
// temperature to clock-edge rate (edges per second).
double solve_thermal_equilibrium(const ThermalModel& model,
                                 const std::function<double(double)>& rate_of,
                                 double tolerance = 1e-9);

}  // namespace gals
