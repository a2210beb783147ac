#include "gals/driver.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "gals/analysis.hpp"

namespace gals {

namespace {

std::string one_line(std::string s) {
    std::replace(s.begin(), s.end(), '\n', ';');
    return s;
}

void print_error(const DriverOptions& opts, const std::string& category,
                 const std::string& message) {
    *opts.err << "error: " << category << ": " << one_line(message) << "\n";
}

struct Loaded {
    ConfigDocument doc;
    Network net;
};

Loaded load(const DriverOptions& opts) {
    Loaded l;
    l.doc = load_config(opts.config_path);
    if (opts.seed) l.doc.sim.seed = *opts.seed;
    l.net = build_network(l.doc, opts.config_path);
    return l;
}

RunLimit run_limit(const DriverOptions& opts, const SimConfig& sim) {
    if (opts.until) {
        const std::string& v = *opts.until;
        if (v.ends_with("ev"))
            return RunLimit::events(std::stoull(v.substr(0, v.size() - 2)));
        return RunLimit::time(parse_time(v, "--until", 0));
    }
    RunLimit limit;
    limit.until = sim.until_time;
    limit.max_events = sim.until_events;
    return limit;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(Error::Code::Config, "cannot write " + path.string());
    out << content;
}

void write_trace_csvs(const std::filesystem::path& dir, const Trace& trace,
                      const Network& net) {
    write_file(dir / "edges.csv", edges_csv(trace, net));
    write_file(dir / "registers.csv", registers_csv(trace, net));
    write_file(dir / "tokens.csv", tokens_csv(trace, net));
    write_file(dir / "violations.csv", violations_csv(trace, net));
}

bool is_pure_sink(const Network& net, ApbId apb) {
    bool has_input = false;
    for (const auto& ep : net.gprms[apb].endpoints) {
        if (ep.role == LinkRole::Input) has_input = true;
        if (ep.role == LinkRole::Output) return false;
    }
    return has_input;
}

// All clock edges in the network, already in processing order.
std::vector<Time> merged_edges(const Trace& trace) {
    std::vector<Time> times;
    times.reserve(trace.edges.size());
    for (const auto& e : trace.edges) times.push_back(e.time);
    return times;
}

Network with_spread_disabled(const Network& net) {
    Network fixed = net;
    for (auto& apb : fixed.apbs) {
        if (apb.policy.kind != PolicyKind::Spread) continue;
        apb.policy.channels[apb.policy.spread_link] =
            apb.policy.reference_channel;
        apb.policy.kind = PolicyKind::Fixed;
    }
    return fixed;
}

int run_command(const DriverOptions& opts, const char* category,
                const std::function<int()>& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        print_error(opts, "parse", e.what());
    } catch (const Error& e) {
        print_error(opts, Error::code_name(e.code()), e.what());
    } catch (const std::exception& e) {
        print_error(opts, category, e.what());
    }
    return 1;
}

}  // namespace

std::string resolve_out_dir(const DriverOptions& opts,
                            const std::string& command) {
    if (opts.out_dir) return *opts.out_dir;
    if (const char* env = std::getenv("GALSIM_OUT_DIR")) return env;
    std::string stem = std::filesystem::path(opts.config_path).stem().string();
    return (std::filesystem::path("out") / stem / command).string();
}

int cmd_validate(const DriverOptions& opts) {
    return run_command(opts, "validate", [&]() -> int {
        Loaded l = load(opts);
        ValidationReport report = validate_topology(l.net);
        for (const auto& e : report.errors)
            *opts.err << "error: validation: " << one_line(e.message) << "\n";
        for (const auto& w : report.warnings) {
            const char* tag =
                w.code == IssueCode::BundlingWarning ? "bundling" : "deadlock-risk";
            *opts.out << "warning: " << tag << ": " << one_line(w.message);
            if (w.code == IssueCode::BundlingWarning)
                *opts.out << " (slack " << w.slack << " ps)";
            *opts.out << "\n";
        }
        *opts.out << "validated " << opts.config_path << ": "
                  << report.errors.size() << " errors, "
                  << report.warnings.size() << " warnings\n";
        if (!report.ok()) return 1;
        if (opts.strict && !report.warnings.empty()) return 1;
        return 0;
    });
}

int cmd_run(const DriverOptions& opts) {
    return run_command(opts, "run", [&]() -> int {
        Loaded l = load(opts);
        Simulation sim(l.net, {l.doc.sim.seed}, l.doc.environment);
        sim.run_until(run_limit(opts, l.doc.sim));

        std::filesystem::path dir = resolve_out_dir(opts, "run");
        std::filesystem::create_directories(dir);
        write_trace_csvs(dir, sim.trace(), sim.network());

        const Trace& trace = sim.trace();
        *opts.out << "run " << opts.config_path
                  << ": events=" << sim.events_processed()
                  << " end=" << trace.end_time << "ps\n";
        for (const auto& apb : sim.network().apbs)
            *opts.out << "gprm " << apb.name
                      << ": edges=" << trace.edges_by_gprm[apb.id].size()
                      << " delivered=" << trace.delivered[apb.id] << "\n";
        std::uint64_t sunk = 0;
        for (const auto& apb : sim.network().apbs)
            if (is_pure_sink(sim.network(), apb.id))
                sunk += trace.delivered[apb.id];
        *opts.out << "delivered: " << sunk << "\n";
        *opts.out << "violations: " << trace.violations.size() << "\n";
        *opts.out << "wrote " << dir.string() << "\n";
        return 0;
    });
}

int cmd_spectrum(const DriverOptions& opts) {
    return run_command(opts, "spectrum", [&]() -> int {
        if (opts.compare != "fixed" && opts.compare != "spread")
            throw Error(Error::Code::Config,
                        "--compare must be 'fixed' or 'spread'");
        Loaded l = load(opts);

        bool has_spread = false;
        for (const auto& apb : l.net.apbs)
            if (apb.policy.kind == PolicyKind::Spread) has_spread = true;
        if (!has_spread)
            throw Error(Error::Code::Config,
                        "config defines no spread policy; nothing to compare");

        Network fixed_net = with_spread_disabled(l.net);
        const Network& variant_net =
            opts.compare == "spread" ? l.net : fixed_net;

        RunLimit limit = run_limit(opts, l.doc.sim);
        auto run_edges = [&](const Network& net, std::optional<ApbId> probe) {
            Simulation sim(net, {l.doc.sim.seed}, l.doc.environment);
            sim.run_until(limit);
            if (probe) return sim.trace().edges_by_gprm[*probe];
            return merged_edges(sim.trace());
        };
        std::optional<ApbId> probe;
        if (!l.doc.sim.probe.empty()) {
            const Apb* apb = l.net.find_apb(l.doc.sim.probe);
            if (!apb)
                throw Error(Error::Code::UnknownSink,
                            "probe APB '" + l.doc.sim.probe + "' not found");
            probe = apb->id;
        }
        std::vector<Time> ref_edges = run_edges(fixed_net, probe);
        std::vector<Time> var_edges = run_edges(variant_net, probe);

        // Equal edge counts keep the comparison about shape, not energy.
        std::size_t n = std::min(ref_edges.size(), var_edges.size());
        ref_edges.resize(n);
        var_edges.resize(n);

        const SpectrumConfig& sc = l.doc.sim.spectrum;
        Spectrum reference = clock_spectrum(ref_edges, sc.bin, sc.nfft);
        Spectrum variant = clock_spectrum(var_edges, sc.bin, sc.nfft);

        std::pair<double, double> band{sc.band_lo, sc.band_hi};
        if (band.first == 0 && band.second == 0)
            band = {reference.bin_hz, reference.sample_rate / 2.0};
        double reduction = peak_reduction(reference, variant, band);

        std::filesystem::path dir = resolve_out_dir(opts, "spectrum");
        std::filesystem::create_directories(dir);
        write_file(dir / "spectrum_fixed.csv", spectrum_csv(reference));
        write_file(dir / ("spectrum_" + opts.compare + ".csv"),
                   spectrum_csv(variant));

        *opts.out << "spectrum " << opts.config_path << ": edges=" << n
                  << " band=" << band.first << ".." << band.second << "Hz\n";
        *opts.out << std::setprecision(10) << "peak_reduction_db=" << reduction
                  << "\n";
        *opts.out << "wrote " << dir.string() << "\n";
        return 0;
    });
}

int cmd_thermal(const DriverOptions& opts) {
    return run_command(opts, "thermal", [&]() -> int {
        Loaded l = load(opts);
        if (!l.doc.environment)
            throw Error(Error::Code::Config,
                        "config has no environment section");

        Simulation sim(l.net, {l.doc.sim.seed}, l.doc.environment);
        sim.run_until(run_limit(opts, l.doc.sim));
        const Trace& trace = sim.trace();
        if (trace.thermal.empty())
            throw Error(Error::Code::InsufficientLength,
                        "run too short for one environment step");

        // Windowed item times: the probe APB if given, else every clock edge.
        std::vector<Time> items;
        if (!l.doc.sim.probe.empty()) {
            const Apb* apb = l.net.find_apb(l.doc.sim.probe);
            if (!apb)
                throw Error(Error::Code::UnknownSink,
                            "probe APB '" + l.doc.sim.probe + "' not found");
            bool has_input = false;
            for (const auto& ep : sim.network().gprms[apb->id].endpoints)
                if (ep.role == LinkRole::Input) has_input = true;
            items = has_input ? trace.delivery_times[apb->id]
                              : trace.edges_by_gprm[apb->id];
        } else {
            items = merged_edges(trace);
        }

        Time dt = l.doc.environment->step_interval;
        double dt_s = double(dt) * 1e-12;
        std::ostringstream csv;
        csv.precision(17);
        csv << "time_ps,temperature_c,throughput_items_per_s\n";
        std::size_t cursor = 0;
        std::vector<double> rates;
        for (const auto& rec : trace.thermal) {
            std::size_t begin = cursor;
            while (cursor < items.size() && items[cursor] < rec.time) ++cursor;
            double rate = double(cursor - begin) / dt_s;
            rates.push_back(rate);
            csv << rec.time << "," << rec.temperature << "," << rate << "\n";
        }

        std::filesystem::path dir = resolve_out_dir(opts, "thermal");
        std::filesystem::create_directories(dir);
        write_file(dir / "thermal.csv", csv.str());

        const ThermalModel& tm = sim.thermal() ? *sim.thermal()
                                               : l.doc.environment->thermal;
        double final_rate = rates.back();
        double residual = std::abs(tm.power(final_rate) * tm.r_th -
                                   (tm.t_device - tm.t_ambient));
        *opts.out << "thermal " << opts.config_path
                  << ": steps=" << trace.thermal.size() << "\n";
        *opts.out << std::setprecision(10)
                  << "final_temperature_c=" << tm.t_device << "\n"
                  << "steady_state_throughput_per_s=" << final_rate << "\n"
                  << "fixed_point_residual_c=" << residual << "\n";
        *opts.out << "wrote " << dir.string() << "\n";
        return 0;
    });
}

int cmd_resources(const DriverOptions& opts) {
    return run_command(opts, "resources", [&]() -> int {
        Loaded l = load(opts);
        std::uint32_t total_lut = 0, total_ff = 0;
        *opts.out << "GPRM                 IN OUT LOOP LUT4 T-FF NOTES\n";
        for (const auto& apb : l.net.apbs) {
            unsigned in = 0, out = 0, loops = 0;
            for (const auto& ep : l.net.gprms[apb.id].endpoints) {
                if (ep.role == LinkRole::Input) ++in;
                else if (ep.role == LinkRole::Output) ++out;
                else ++loops;
            }
            *opts.out << std::left << std::setw(20) << apb.name << std::right
                      << " " << std::setw(2) << in << " " << std::setw(3) << out
                      << " " << std::setw(4) << loops;
            try {
                ResourceEstimate est = resource_estimate(l.net, apb.id);
                total_lut += est.lut4;
                total_ff += est.t_ff;
                *opts.out << " " << std::setw(4) << est.lut4 << " "
                          << std::setw(4) << est.t_ff;
                for (std::size_t i = 0; i < est.notes.size(); ++i)
                    *opts.out << (i ? "; " : " ") << est.notes[i];
                *opts.out << "\n";
            } catch (const Error& e) {
                if (e.code() != Error::Code::UnsupportedShape) throw;
                *opts.out << "    -    - unsupported: " << one_line(e.what())
                          << "\n";
            }
        }
        *opts.out << "TOTAL                          " << std::setw(4)
                  << total_lut << " " << std::setw(4) << total_ff << "\n";
        return 0;
    });
}

}  // namespace gals
