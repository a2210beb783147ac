#include "gals/engine.hpp"

#include <algorithm>
#include <sstream>

namespace gals {

bool EnvironmentConfig::operator==(const EnvironmentConfig& other) const {
    auto key = [](const ThermalModel& m) {
        return std::tie(m.t_ambient, m.t_device, m.r_th, m.c_th, m.p_static,
                        m.p_per_edge, m.delay_coeff, m.t_ref);
    };
    auto sched = [](const std::vector<RthStep>& s) {
        std::vector<std::pair<Time, double>> v;
        for (const auto& e : s) v.emplace_back(e.at, e.r_th);
        return v;
    };
    return key(thermal) == key(other.thermal) &&
           step_interval == other.step_interval &&
           sched(schedule) == sched(other.schedule) &&
           sensor_noise == other.sensor_noise;
}

bool Simulation::EventOrder::operator()(const Event& a, const Event& b) const {
    // std::priority_queue pops the max, so "greater" means "later".
    auto key = [](const Event& e) {
        return std::tuple(e.time, int(e.kind), e.subject, e.seq);
    };
    return key(a) > key(b);
}

Simulation::Simulation(Network network, SimOptions options,
                       std::optional<EnvironmentConfig> env)
    : network_(std::move(network)), options_(options), env_(std::move(env)) {
    network_.rebuild_endpoints();
    ValidationReport report = validate_topology(network_);
    if (!report.ok()) {
        std::ostringstream msg;
        msg << "network failed validation:";
        for (const auto& e : report.errors) msg << "\n  " << e.message;
        throw Error(Error::Code::MalformedNetwork, msg.str());
    }

    std::size_t n_apbs = network_.apbs.size();
    std::size_t n_links = network_.links.size();

    link_states_.reserve(n_links);
    payloads_.assign(n_links, {});
    for (const auto& link : network_.links)
        link_states_.push_back(initial_link_state(link));
    // A consumer that fires before any delivery sees the producer's initial
    // register, the value its data wires carry out of reset.
    for (const auto& link : network_.links)
        if (link.kind == LinkKind::Communication)
            payloads_[link.id].snapshot = network_.apbs[link.endpoint_a].initial;

    registers_.reserve(n_apbs);
    reset_hold_.assign(n_apbs, true);
    policy_states_.reserve(n_apbs);
    input_scratch_.assign(n_apbs, {});
    for (const auto& apb : network_.apbs) {
        registers_.push_back(apb.initial & apb.mask());
        policy_states_.push_back(
            make_policy_state(apb.policy, options_.seed, apb.name));
    }

    trace_.edges_by_gprm.assign(n_apbs, {});
    trace_.delivered.assign(n_apbs, 0);
    trace_.delivery_times.assign(n_apbs, {});

    sensor_rng_.seed(options_.seed ^ 0x5EED5EED5EED5EEDull);

    for (GprmId g = 0; g < n_apbs; ++g)
        push_event({0, EventKind::Release, g, 0, 0, Direction::AtoB, 0});
    if (env_) {
        std::stable_sort(
            env_->schedule.begin(), env_->schedule.end(),
            [](const RthStep& x, const RthStep& y) { return x.at < y.at; });
        push_event({env_->step_interval, EventKind::EnvironmentStep, 0, 0, 0,
                    Direction::AtoB, 0});
    }
}

void Simulation::push_event(Event ev) {
    ev.seq = seq_++;
    queue_.push(ev);
}

Time Simulation::scaled_delay(Time nominal) const {
    return env_ ? env_->thermal.effective_delay(nominal) : nominal;
}

double Simulation::sensed_temperature() {
    if (!env_) return 0.0;
    double t = env_->thermal.t_device;
    if (env_->sensor_noise > 0.0) {
        std::uniform_real_distribution<double> d(-env_->sensor_noise,
                                                 env_->sensor_noise);
        t += d(sensor_rng_);
    }
    return t;
}

bool Simulation::can_fire(GprmId g) const {
    if (reset_hold_[g]) return false;
    const Gprm& gprm = network_.gprms[g];
    for (const auto& ep : gprm.endpoints) {
        const Link& link = network_.links[ep.link];
        LinkSide side =
            link.kind == LinkKind::ClosedLoop || link.endpoint_a == g
                ? LinkSide::A
                : LinkSide::B;
        if (!parity_at(link, link_states_[ep.link], side)) return false;
    }
    return true;
}

void Simulation::try_fire(GprmId g) {
    // A firing sends at least one token away, so this runs at most once per
    // enabling event; the loop is a guard, not a fixpoint search.
    while (can_fire(g)) fire(g);
}

void Simulation::fire(GprmId g) {
    const Apb& apb = network_.apbs[g];
    const Gprm& gprm = network_.gprms[g];

    trace_.edges.push_back({now_, g});
    trace_.edges_by_gprm[g].push_back(now_);

    // Pre-firing arguments: the register and input snapshots as they were
    // when the clock edge hit. Both the logic function and the flow control
    // logic see exactly these.
    auto& inputs = input_scratch_[g];
    inputs.clear();
    std::vector<EndpointView> views;
    views.reserve(gprm.endpoints.size());
    for (const auto& ep : gprm.endpoints) {
        const Link& link = network_.links[ep.link];
        if (ep.role == LinkRole::Input)
            inputs.push_back(payloads_[ep.link].snapshot);
        std::uint32_t driven = ep.role == LinkRole::Input
                                   ? std::uint32_t(link.bwd_channels.size())
                                   : std::uint32_t(link.fwd_channels.size());
        views.push_back({ep.link, ep.role, driven});
    }
    Word before = registers_[g];

    Word next = eval_logic(apb.logic, before, inputs, apb.mask());
    registers_[g] = next;
    trace_.registers.push_back({now_, g, next});

    DecideContext ctx{before, inputs, sensed_temperature()};
    std::vector<EndpointAction> actions =
        decide(apb.policy, views, ctx, policy_states_[g]);

    bool any_send = false;
    for (std::size_t i = 0; i < gprm.endpoints.size(); ++i) {
        if (!actions[i].send) continue;
        any_send = true;
        const Endpoint& ep = gprm.endpoints[i];
        const Link& link = network_.links[ep.link];
        LinkState& ls = link_states_[ep.link];

        Direction dir =
            ep.role == LinkRole::Input ? Direction::BtoA : Direction::AtoB;
        ChannelId ch = actions[i].channel;
        Time nominal = link.channels(dir).at(ch).delay;
        Time departure = now_ + apb.gprm_overhead;
        Time arrival =
            toggle_channel(link, ls, dir, ch, departure, scaled_delay(nominal));

        TokenLocation from = dir == Direction::AtoB ? TokenLocation::AtA
                                                    : TokenLocation::AtB;
        trace_.tokens.push_back({now_, ep.link, from, TokenLocation::InFlight, ch});

        if (ep.role == LinkRole::Output) {
            // The freshly clocked register value rides with the token; it is
            // not stable at the consumer until the datapath settles.
            payloads_[ep.link].in_flight_value = next;
            payloads_[ep.link].in_flight_valid =
                now_ + apb.datapath_delays.at(ep.link);
        } else if (ep.role == LinkRole::Loop) {
            payloads_[ep.link].in_flight_valid =
                now_ + apb.datapath_delays.at(ep.link);
        }

        push_event({arrival, EventKind::ParityArrival, link.receiver(dir), 0,
                    ep.link, dir, ch});
    }

    if (!any_send)
        throw Error(Error::Code::StallDecision,
                    "APB '" + apb.name + "' kept every token at t=" +
                        std::to_string(now_) +
                        " ps; it can never fire again");
}

void Simulation::handle_arrival(const Event& ev) {
    const Link& link = network_.links[ev.link];
    LinkState& ls = link_states_[ev.link];
    InFlightTransition t = deliver_transition(link, ls);

    TokenLocation to = link.kind == LinkKind::ClosedLoop
                           ? TokenLocation::AtA
                           : (t.direction == Direction::AtoB ? TokenLocation::AtB
                                                             : TokenLocation::AtA);
    trace_.tokens.push_back({now_, ev.link, TokenLocation::InFlight, to, t.channel});

    if (link.kind == LinkKind::ClosedLoop) {
        // Loop completion announces that the feedback datapath settled.
        if (now_ < payloads_[ev.link].in_flight_valid)
            trace_.violations.push_back(
                {now_, ev.link, t.channel,
                 now_ - payloads_[ev.link].in_flight_valid});
    } else if (t.direction == Direction::AtoB) {
        // Forward transition carries data: latch the snapshot and check the
        // bundled-data constraint. Backward transitions are bare update
        // requests and are never checked.
        LinkPayload& p = payloads_[ev.link];
        if (now_ < p.in_flight_valid)
            trace_.violations.push_back(
                {now_, ev.link, t.channel, now_ - p.in_flight_valid});
        p.snapshot = p.in_flight_value;
        ApbId consumer = link.endpoint_b;
        trace_.delivered[consumer] += 1;
        trace_.delivery_times[consumer].push_back(now_);
    }

    try_fire(ev.subject);
}

void Simulation::handle_environment_step(const Event& ev) {
    EnvironmentConfig& env = *env_;
    std::int64_t total = std::int64_t(trace_.edges.size());
    std::int64_t in_window = total - edges_at_last_env_step_;
    edges_at_last_env_step_ = total;

    double dt_seconds = double(env.step_interval) * 1e-12;
    env.thermal.step(in_window, dt_seconds);
    trace_.thermal.push_back({now_, env.thermal.t_device, in_window});

    // Scheduled package changes (fan failures) take effect at the first
    // environment step at or after their stamp, once the window closing here
    // has been integrated with the old resistance.
    while (next_rth_step_ < env.schedule.size() &&
           env.schedule[next_rth_step_].at <= now_) {
        env.thermal.r_th = env.schedule[next_rth_step_].r_th;
        ++next_rth_step_;
    }

    push_event({now_ + env.step_interval, EventKind::EnvironmentStep, 0, 0, 0,
                Direction::AtoB, 0});
    (void)ev;
}

std::optional<Event> Simulation::step() {
    if (queue_.empty()) return std::nullopt;
    Event ev = queue_.top();
    queue_.pop();
    now_ = ev.time;
    trace_.end_time = now_;
    events_processed_ += 1;

    switch (ev.kind) {
        case EventKind::Release:
            reset_hold_[ev.subject] = false;
            try_fire(ev.subject);
            break;
        case EventKind::ParityArrival:
            handle_arrival(ev);
            break;
        case EventKind::EnvironmentStep:
            handle_environment_step(ev);
            break;
    }
    return ev;
}

void Simulation::run_until(const RunLimit& limit) {
    while (!queue_.empty()) {
        if (limit.max_events && events_processed_ >= *limit.max_events) return;
        if (limit.until && queue_.top().time > *limit.until) return;
        step();
    }
}

namespace {

void csv_header(std::ostringstream& out) {
    out << "time_ps,kind,gprm_or_link,detail,value\n";
}

const char* location_name(TokenLocation l) {
    switch (l) {
        case TokenLocation::AtA: return "AtA";
        case TokenLocation::AtB: return "AtB";
        case TokenLocation::InFlight: return "InFlight";
    }
    return "?";
}

}  // namespace

std::string edges_csv(const Trace& trace, const Network& net) {
    std::ostringstream out;
    csv_header(out);
    std::vector<std::uint64_t> ordinal(net.apbs.size(), 0);
    for (const auto& e : trace.edges)
        out << e.time << ",edge," << net.apbs[e.gprm].name << ",,"
            << ordinal[e.gprm]++ << "\n";
    return out.str();
}

std::string registers_csv(const Trace& trace, const Network& net) {
    std::ostringstream out;
    csv_header(out);
    for (const auto& r : trace.registers)
        out << r.time << ",register," << net.apbs[r.apb].name << ",,"
            << r.value << "\n";
    return out.str();
}

std::string tokens_csv(const Trace& trace, const Network& net) {
    std::ostringstream out;
    csv_header(out);
    for (const auto& t : trace.tokens)
        out << t.time << ",token," << net.links[t.link].name << ","
            << location_name(t.from) << "->" << location_name(t.to) << ","
            << t.channel << "\n";
    return out.str();
}

std::string violations_csv(const Trace& trace, const Network& net) {
    std::ostringstream out;
    csv_header(out);
    for (const auto& v : trace.violations)
        out << v.time << ",violation," << net.links[v.link].name << ",ch"
            << v.channel << "," << v.slack << "\n";
    return out.str();
}

}  // namespace gals
