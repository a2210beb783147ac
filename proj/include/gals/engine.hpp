#pragma once

#include <cstdint>
#include <optional>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include "gals/core.hpp"
#include "gals/policies.hpp"
#include "gals/types.hpp"

namespace gals {

enum class EventKind { Release, EnvironmentStep, ParityArrival };

// Queue entries are totally ordered by (time, kind priority, subject GPRM,
// sequence). Release < EnvironmentStep < ParityArrival at equal times, and
// simultaneous arrivals resolve in ascending id of the receiving GPRM, so the
// final state never depends on insertion order.
struct Event {
    Time time = 0;
    EventKind kind = EventKind::Release;
    GprmId subject = 0;  // released / receiving GPRM; 0 for environment steps
    std::uint64_t seq = 0;
    LinkId link = 0;
    Direction direction = Direction::AtoB;
    ChannelId channel = 0;
};

struct EdgeRecord {
    Time time = 0;
    GprmId gprm = 0;
};

struct RegisterRecord {
    Time time = 0;
    ApbId apb = 0;
    Word value = 0;
};

struct TokenRecord {
    Time time = 0;
    LinkId link = 0;
    TokenLocation from = TokenLocation::AtA;
    TokenLocation to = TokenLocation::InFlight;
    ChannelId channel = 0;
};

struct ViolationRecord {
    Time time = 0;
    LinkId link = 0;
    ChannelId channel = 0;
    Time slack = 0;  // arrival minus data-valid time; negative when violated
};

struct ThermalRecord {
    Time time = 0;
    double temperature = 0.0;
    std::int64_t edges_in_window = 0;
};

// Everything the post-processing stages need: clock edges, register
// histories, token movements, bundling violations, and the thermal series.
// All lists are append-only and time-sorted.
struct Trace {
    std::vector<EdgeRecord> edges;
    std::vector<std::vector<Time>> edges_by_gprm;
    std::vector<RegisterRecord> registers;
    std::vector<TokenRecord> tokens;
    std::vector<ViolationRecord> violations;
    std::vector<ThermalRecord> thermal;
    std::vector<std::uint64_t> delivered;             // per APB, forward data arrivals
    std::vector<std::vector<Time>> delivery_times;    // per APB
    Time end_time = 0;  // time of the last processed event
};

// Scheduled change of the package thermal resistance (fan failure and the
// like). Applied at the first environment step at or after `at`.
struct RthStep {
    Time at = 0;
    double r_th = 0.0;
};

struct EnvironmentConfig {
    ThermalModel thermal;
    Time step_interval = ms(1);
    std::vector<RthStep> schedule;
    double sensor_noise = 0.0;  // deg C, uniform, for Adaptive policies

    bool operator==(const EnvironmentConfig& other) const;
};

struct SimOptions {
    std::uint64_t seed = 1;
};

struct RunLimit {
    std::optional<Time> until;             // process events with time <= until
    std::optional<std::uint64_t> max_events;  // total processed events

    static RunLimit time(Time t) { return {t, std::nullopt}; }
    static RunLimit events(std::uint64_t n) { return {std::nullopt, n}; }
};

// Deterministic single-threaded event kernel. One instance owns one run; it
// may be resumed with a larger limit. No operation may be invoked
// concurrently on the same instance.
class Simulation {
public:
    // Validates the topology and builds the reset state: all flip-flops zero,
    // tokens at the XNOR sides, every GPRM held in reset with a Release event
    // queued at t = 0. Throws MalformedNetwork if validation fails.
    Simulation(Network network, SimOptions options = {},
               std::optional<EnvironmentConfig> env = std::nullopt);

    // Processes the minimal queued event and fires whatever became ready.
    // Returns the processed event, or nullopt when the queue is empty.
    std::optional<Event> step();

    // Steps until the limit is hit or the queue drains. Re-entrant: can be
    // resumed with a larger limit.
    void run_until(const RunLimit& limit);

    bool quiescent() const { return queue_.empty(); }

    const Network& network() const { return network_; }
    const Trace& trace() const { return trace_; }
    Time now() const { return now_; }
    std::uint64_t events_processed() const { return events_processed_; }

    Word register_value(ApbId apb) const { return registers_[apb]; }
    const LinkState& link_state(LinkId link) const { return link_states_[link]; }
    bool in_reset(GprmId gprm) const { return reset_hold_[gprm]; }
    const ThermalModel* thermal() const {
        return env_ ? &env_->thermal : nullptr;
    }

    TokenLocation token_at(LinkId link) const {
        return token_location(network_.links[link], link_states_[link]);
    }

private:
    struct EventOrder {
        bool operator()(const Event& a, const Event& b) const;
    };

    struct LinkPayload {
        Word in_flight_value = 0;
        Time in_flight_valid = 0;  // also used for loop completion times
        Word snapshot = 0;         // last value delivered to the consumer
    };

    bool can_fire(GprmId g) const;
    void try_fire(GprmId g);
    void fire(GprmId g);
    void handle_arrival(const Event& ev);
    void handle_environment_step(const Event& ev);
    void push_event(Event ev);
    Time scaled_delay(Time nominal) const;
    double sensed_temperature();

    Network network_;
    SimOptions options_;
    std::optional<EnvironmentConfig> env_;

    Time now_ = 0;
    std::uint64_t seq_ = 0;
    std::uint64_t events_processed_ = 0;
    std::priority_queue<Event, std::vector<Event>, EventOrder> queue_;

    std::vector<LinkState> link_states_;
    std::vector<LinkPayload> payloads_;
    std::vector<Word> registers_;
    std::vector<bool> reset_hold_;
    std::vector<PolicyState> policy_states_;
    std::vector<std::vector<Word>> input_scratch_;  // per APB, reused per firing

    std::mt19937_64 sensor_rng_;
    std::size_t next_rth_step_ = 0;
    std::int64_t edges_at_last_env_step_ = 0;

    Trace trace_;
};

// CSV export, one file per record class, uniform five-column schema
// (time_ps, kind, gprm_or_link, detail, value). Bit-exact for equal inputs.
std::string edges_csv(const Trace& trace, const Network& net);
std::string registers_csv(const Trace& trace, const Network& net);
std::string tokens_csv(const Trace& trace, const Network& net);
std::string violations_csv(const Trace& trace, const Network& net);

}  // namespace gals
