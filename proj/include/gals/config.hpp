#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gals/core.hpp"
#include "gals/engine.hpp"
#include "gals/types.hpp"

namespace gals {

// Parse or semantic failure, addressed to the offending file and line.
class ConfigError : public Error {
public:
    ConfigError(std::string file, int line, const std::string& message)
        : Error(Error::Code::Config,
                file + ":" + std::to_string(line) + ": " + message),
          file_(std::move(file)), line_(line) {}

    const std::string& file() const { return file_; }
    int line() const { return line_; }

private:
    std::string file_;
    int line_;
};

// Config-level policy description; links are referenced by name until the
// network is built.
struct PolicyConfig {
    PolicyKind kind = PolicyKind::Fixed;
    std::map<std::string, ChannelId> channels;

    std::string spread_link;
    std::pair<ChannelId, ChannelId> spread_pair{0, 0};
    std::optional<std::uint16_t> lfsr_seed;
    ChannelId reference_channel = 0;

    std::string adaptive_link;
    ChannelId adaptive_default = 0;
    std::vector<std::pair<double, ChannelId>> thresholds;

    Word limit = 0;
    std::uint64_t burst_length = 0;

    bool operator==(const PolicyConfig&) const = default;
};

struct ApbConfig {
    std::string name;
    unsigned width = 16;
    Word initial = 0;
    LogicKind logic = LogicKind::Passthrough;
    CustomTable table;
    PolicyConfig policy;
    std::map<std::string, Time> datapath;  // link name -> worst-case delay
    Time overhead = 0;
    int line = 0;  // diagnostics only; ignored by equality

    bool operator==(const ApbConfig& o) const {
        return name == o.name && width == o.width && initial == o.initial &&
               logic == o.logic && table == o.table && policy == o.policy &&
               datapath == o.datapath && overhead == o.overhead;
    }
};

struct LinkConfig {
    std::string name;
    LinkKind kind = LinkKind::Communication;
    std::string from;  // owner for loops
    std::string to;    // empty for loops
    std::vector<Time> fwd_delays;
    std::vector<Time> bwd_delays;
    LinkSide xnor_side = LinkSide::A;  // A = "from" side
    int line = 0;

    bool operator==(const LinkConfig& o) const {
        return name == o.name && kind == o.kind && from == o.from &&
               to == o.to && fwd_delays == o.fwd_delays &&
               bwd_delays == o.bwd_delays && xnor_side == o.xnor_side;
    }
};

struct SpectrumConfig {
    Time bin = ns(1);
    std::size_t nfft = 1 << 16;
    double band_lo = 0.0;  // 0,0 = whole spectrum minus DC
    double band_hi = 0.0;

    bool operator==(const SpectrumConfig&) const = default;
};

struct SimConfig {
    std::uint64_t seed = 1;
    std::optional<Time> until_time;
    std::optional<std::uint64_t> until_events;
    Time window = ms(1);      // throughput window
    std::string probe;        // APB whose items are counted; empty = all edges
    SpectrumConfig spectrum;

    bool operator==(const SimConfig&) const = default;
};

struct ConfigDocument {
    std::vector<ApbConfig> apbs;
    std::vector<LinkConfig> links;
    std::optional<EnvironmentConfig> environment;
    SimConfig sim;

    bool operator==(const ConfigDocument&) const = default;
};

// "1.5ns", "10ms", "4000ps" -> picoseconds. Rejects anything that does not
// land on a whole picosecond.
Time parse_time(const std::string& text, const std::string& file, int line);

ConfigDocument parse_config(const std::string& text, const std::string& file);
ConfigDocument load_config(const std::string& path);

// Canonical text form; parse(serialize(doc)) == doc.
std::string serialize(const ConfigDocument& doc);

// Resolves names to ids and assembles the runtime network. Throws ConfigError
// for unresolved references; the result still goes through validate_topology.
Network build_network(const ConfigDocument& doc,
                      const std::string& file = "<config>");

}  // namespace gals
