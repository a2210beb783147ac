#include "gals/policies.hpp"

#include <cmath>

namespace gals {

void ThermalModel::step(std::int64_t edges, double dt_seconds) {
    double p = power(double(edges) / dt_seconds);
    t_device += dt_seconds * (p - (t_device - t_ambient) / r_th) / c_th;
}

Time ThermalModel::effective_delay(Time d0) const {
    double factor = 1.0 + delay_coeff * (t_device - t_ref);
    Time d = Time(std::llround(double(d0) * factor));
    return d < 1 ? 1 : d;
}

Time effective_delay(Time d0, const ThermalModel& model) {
    return model.effective_delay(d0);
}

bool PolicySpec::may_retain_all_communication_tokens() const {
    switch (kind) {
        case PolicyKind::Fixed:
        case PolicyKind::Spread:
        case PolicyKind::Adaptive:
            return false;  // these send on every endpoint at every firing
        case PolicyKind::Limited:
        case PolicyKind::Burst:
        case PolicyKind::Custom:
            return true;
    }
    return true;
}

bool PolicySpec::operator==(const PolicySpec& other) const {
    // Custom decision functions are API-level and not comparable.
    return kind == other.kind && channels == other.channels &&
           spread_link == other.spread_link && spread_pair == other.spread_pair &&
           lfsr_seed == other.lfsr_seed &&
           reference_channel == other.reference_channel &&
           adaptive_link == other.adaptive_link &&
           adaptive_default == other.adaptive_default &&
           thresholds == other.thresholds && limit == other.limit &&
           burst_length == other.burst_length;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

ChannelId assigned_channel(const PolicySpec& spec, LinkId link) {
    auto it = spec.channels.find(link);
    return it == spec.channels.end() ? 0 : it->second;
}

void check_channel(const EndpointView& ep, ChannelId ch) {
    if (ch >= ep.channel_count)
        throw Error(Error::Code::UnknownChannel,
                    "policy selected channel " + std::to_string(ch) +
                        " on link " + std::to_string(ep.link) + " which has " +
                        std::to_string(ep.channel_count) + " channels");
}

}  // namespace

PolicyState make_policy_state(const PolicySpec& spec, std::uint64_t master_seed,
                              const std::string& apb_name) {
    PolicyState state;
    if (spec.kind == PolicyKind::Spread) {
        std::uint16_t seed;
        if (spec.lfsr_seed) {
            seed = *spec.lfsr_seed;  // Lfsr rejects an explicit zero
        } else {
            seed = std::uint16_t(splitmix64(master_seed ^ fnv1a(apb_name)));
            if (seed == 0) seed = 0xACE1;
        }
        state.lfsr.emplace(seed);
    }
    return state;
}

std::vector<EndpointAction> decide(const PolicySpec& spec,
                                   std::span<const EndpointView> endpoints,
                                   const DecideContext& ctx,
                                   PolicyState& state) {
    if (spec.kind == PolicyKind::Custom)
        return spec.custom(ctx, endpoints, state);

    std::vector<EndpointAction> actions(endpoints.size());
    for (std::size_t i = 0; i < endpoints.size(); ++i) {
        const EndpointView& ep = endpoints[i];
        ChannelId ch = assigned_channel(spec, ep.link);
        check_channel(ep, ch);
        actions[i] = {true, ch};
    }

    switch (spec.kind) {
        case PolicyKind::Fixed:
            break;
        case PolicyKind::Spread: {
            int bit = state.lfsr->step();
            ChannelId ch = bit ? spec.spread_pair.second : spec.spread_pair.first;
            for (std::size_t i = 0; i < endpoints.size(); ++i) {
                if (endpoints[i].link != spec.spread_link) continue;
                check_channel(endpoints[i], ch);
                actions[i].channel = ch;
            }
            break;
        }
        case PolicyKind::Adaptive: {
            ChannelId ch = spec.adaptive_default;
            for (const auto& [temp, candidate] : spec.thresholds)
                if (ctx.sensed_temperature >= temp) ch = candidate;
            for (std::size_t i = 0; i < endpoints.size(); ++i) {
                if (endpoints[i].link != spec.adaptive_link) continue;
                check_channel(endpoints[i], ch);
                actions[i].channel = ch;
            }
            break;
        }
        case PolicyKind::Limited: {
            // Latch rather than compare each time: the register may wrap.
            if (ctx.reg >= spec.limit) state.done = true;
            for (std::size_t i = 0; i < endpoints.size(); ++i)
                if (endpoints[i].role != LinkRole::Loop && state.done)
                    actions[i].send = false;
            break;
        }
        case PolicyKind::Burst: {
            bool engage =
                state.firing_counter % (spec.burst_length + 1) == spec.burst_length;
            for (std::size_t i = 0; i < endpoints.size(); ++i)
                if (endpoints[i].role != LinkRole::Loop)
                    actions[i].send = engage;
            break;
        }
        case PolicyKind::Custom:
            break;
    }

    state.firing_counter += 1;
    return actions;
}

double solve_thermal_equilibrium(const ThermalModel& model,
                                 const std::function<double(double)>& rate_of,
                                 double tolerance) {
    double t = model.t_ambient;
    for (int i = 0; i < 10000; ++i) {
        double target = model.t_ambient + model.power(rate_of(t)) * model.r_th;
        double next = t + 0.5 * (target - t);
        if (std::abs(next - t) < tolerance) return next;
        t = next;
    }
    return t;
}

}  // namespace gals
