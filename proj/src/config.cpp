#include "gals/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace gals {

namespace {

struct Tok {
    std::string key;    // empty for positional tokens
    std::string value;
};

struct Line {
    int no = 0;
    std::vector<std::string> raw;
};

std::vector<Line> tokenize(const std::string& text) {
    std::vector<Line> lines;
    std::istringstream in(text);
    std::string line;
    int no = 0;
    while (std::getline(in, line)) {
        ++no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        Line out{no, {}};
        std::string word;
        while (ls >> word) out.raw.push_back(word);
        if (!out.raw.empty()) lines.push_back(std::move(out));
    }
    return lines;
}

Tok split_kv(const std::string& word) {
    auto eq = word.find('=');
    if (eq == std::string::npos) return {"", word};
    return {word.substr(0, eq), word.substr(eq + 1)};
}

[[noreturn]] void fail(const std::string& file, int line, const std::string& msg) {
    throw ConfigError(file, line, msg);
}

std::uint64_t parse_u64(const std::string& s, const std::string& file, int line) {
    try {
        std::size_t used = 0;
        std::uint64_t v = std::stoull(s, &used, 0);
        if (used != s.size()) fail(file, line, "trailing junk in number '" + s + "'");
        return v;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        fail(file, line, "expected a number, got '" + s + "'");
    }
}

double parse_double(const std::string& s, const std::string& file, int line) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) fail(file, line, "trailing junk in number '" + s + "'");
        return v;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        fail(file, line, "expected a number, got '" + s + "'");
    }
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

Time parse_time(const std::string& text, const std::string& file, int line) {
    static const std::pair<const char*, long double> units[] = {
        {"ps", 1.0L}, {"ns", 1e3L}, {"us", 1e6L}, {"ms", 1e9L}, {"s", 1e12L}};
    for (const auto& [suffix, scale] : units) {
        std::string_view sv(text);
        std::string_view suf(suffix);
        if (sv.size() <= suf.size() || !sv.ends_with(suf)) continue;
        // "ns" also ends with "s"; match the longest unit first.
        if (suf == "s" && sv.size() >= 2 && !std::isdigit(sv[sv.size() - 2]) &&
            sv[sv.size() - 2] != '.')
            continue;
        std::string mantissa(sv.substr(0, sv.size() - suf.size()));
        try {
            std::size_t used = 0;
            long double m = std::stold(mantissa, &used);
            if (used != mantissa.size() || mantissa.empty()) break;
            long double scaled = m * scale;
            Time t = Time(llroundl(scaled));
            if (fabsl(scaled - (long double)t) > 1e-6L)
                fail(file, line,
                     "'" + text + "' is not a whole number of picoseconds");
            if (t < 0) fail(file, line, "negative time '" + text + "'");
            return t;
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception&) {
            break;
        }
    }
    fail(file, line,
         "expected a time with unit ps/ns/us/ms/s, got '" + text + "'");
}

namespace {

ChannelId parse_channel(const std::string& s, const std::string& file, int line) {
    return ChannelId(parse_u64(s, file, line));
}

void parse_policy(ApbConfig& apb, const Line& ln, const std::string& file) {
    if (ln.raw.size() < 2) fail(file, ln.no, "policy needs a kind");
    PolicyConfig& pol = apb.policy;
    const std::string& kind = ln.raw[1];
    if (kind == "fixed") pol.kind = PolicyKind::Fixed;
    else if (kind == "spread") pol.kind = PolicyKind::Spread;
    else if (kind == "adaptive") pol.kind = PolicyKind::Adaptive;
    else if (kind == "limited") pol.kind = PolicyKind::Limited;
    else if (kind == "burst") pol.kind = PolicyKind::Burst;
    else fail(file, ln.no, "unknown policy kind '" + kind + "'");

    for (std::size_t i = 2; i < ln.raw.size(); ++i) {
        auto [key, value] = split_kv(ln.raw[i]);
        if (key.empty())
            fail(file, ln.no, "expected key=value, got '" + value + "'");
        if (key == "link") {
            if (pol.kind == PolicyKind::Spread) pol.spread_link = value;
            else if (pol.kind == PolicyKind::Adaptive) pol.adaptive_link = value;
            else fail(file, ln.no, "'link=' is only for spread/adaptive");
        } else if (key == "pair" && pol.kind == PolicyKind::Spread) {
            auto comma = value.find(',');
            if (comma == std::string::npos)
                fail(file, ln.no, "pair needs two channels: pair=<a>,<b>");
            pol.spread_pair = {
                parse_channel(value.substr(0, comma), file, ln.no),
                parse_channel(value.substr(comma + 1), file, ln.no)};
        } else if (key == "ref" && pol.kind == PolicyKind::Spread) {
            pol.reference_channel = parse_channel(value, file, ln.no);
        } else if (key == "seed" && pol.kind == PolicyKind::Spread) {
            pol.lfsr_seed = std::uint16_t(parse_u64(value, file, ln.no));
        } else if (key == "default" && pol.kind == PolicyKind::Adaptive) {
            pol.adaptive_default = parse_channel(value, file, ln.no);
        } else if (key == "at" && pol.kind == PolicyKind::Adaptive) {
            std::istringstream vs(value);
            std::string item;
            while (std::getline(vs, item, ',')) {
                auto colon = item.find(':');
                if (colon == std::string::npos)
                    fail(file, ln.no, "thresholds are <temp>:<channel>");
                pol.thresholds.emplace_back(
                    parse_double(item.substr(0, colon), file, ln.no),
                    parse_channel(item.substr(colon + 1), file, ln.no));
            }
        } else if (key == "limit" && pol.kind == PolicyKind::Limited) {
            pol.limit = parse_u64(value, file, ln.no);
        } else if (key == "length" && pol.kind == PolicyKind::Burst) {
            pol.burst_length = parse_u64(value, file, ln.no);
        } else {
            // anything else is a per-endpoint channel assignment
            pol.channels[key] = parse_channel(value, file, ln.no);
        }
    }
    std::sort(pol.thresholds.begin(), pol.thresholds.end());
}

void parse_apb_entry(ApbConfig& apb, const Line& ln, const std::string& file) {
    const std::string& head = ln.raw[0];
    if (head == "register") {
        for (std::size_t i = 1; i < ln.raw.size(); ++i) {
            auto [key, value] = split_kv(ln.raw[i]);
            if (key == "width")
                apb.width = unsigned(parse_u64(value, file, ln.no));
            else if (key == "init")
                apb.initial = parse_u64(value, file, ln.no);
            else
                fail(file, ln.no, "register takes width= and init=");
        }
    } else if (head == "logic") {
        if (ln.raw.size() < 2) fail(file, ln.no, "logic needs a function name");
        const std::string& fn = ln.raw[1];
        if (fn == "counter-source") apb.logic = LogicKind::CounterSource;
        else if (fn == "recording-sink") apb.logic = LogicKind::RecordingSink;
        else if (fn == "passthrough") apb.logic = LogicKind::Passthrough;
        else if (fn == "accumulator") apb.logic = LogicKind::Accumulator;
        else if (fn == "custom-table") apb.logic = LogicKind::CustomTable;
        else fail(file, ln.no, "unknown logic function '" + fn + "'");
        for (std::size_t i = 2; i < ln.raw.size(); ++i) {
            auto [key, value] = split_kv(ln.raw[i]);
            if (key == "default" && apb.logic == LogicKind::CustomTable)
                apb.table.fallback = parse_u64(value, file, ln.no);
            else
                fail(file, ln.no, "unexpected '" + ln.raw[i] + "' after logic");
        }
    } else if (head == "table") {
        if (apb.logic != LogicKind::CustomTable)
            fail(file, ln.no, "table rows need 'logic custom-table' first");
        std::vector<Word> key;
        Word out = 0;
        bool seen_arrow = false;
        for (std::size_t i = 1; i < ln.raw.size(); ++i) {
            if (ln.raw[i] == "->") {
                seen_arrow = true;
                continue;
            }
            Word v = parse_u64(ln.raw[i], file, ln.no);
            if (seen_arrow) out = v;
            else key.push_back(v);
        }
        if (!seen_arrow || key.empty())
            fail(file, ln.no, "table row is: table <own> [<in>...] -> <next>");
        apb.table.rows.emplace_back(std::move(key), out);
    } else if (head == "policy") {
        parse_policy(apb, ln, file);
    } else if (head == "datapath") {
        for (std::size_t i = 1; i < ln.raw.size(); ++i) {
            auto [key, value] = split_kv(ln.raw[i]);
            if (key.empty())
                fail(file, ln.no, "datapath entries are <link>=<time>");
            apb.datapath[key] = parse_time(value, file, ln.no);
        }
    } else if (head == "overhead") {
        if (ln.raw.size() != 2) fail(file, ln.no, "overhead takes one time");
        apb.overhead = parse_time(ln.raw[1], file, ln.no);
    } else {
        fail(file, ln.no, "unknown apb entry '" + head + "'");
    }
}

void parse_link_entry(LinkConfig& link, const Line& ln, const std::string& file) {
    const std::string& head = ln.raw[0];
    auto times = [&](std::vector<Time>& out) {
        out.clear();
        for (std::size_t i = 1; i < ln.raw.size(); ++i)
            out.push_back(parse_time(ln.raw[i], file, ln.no));
        if (out.empty()) fail(file, ln.no, head + " needs at least one delay");
    };
    if (head == "kind") {
        if (ln.raw.size() != 2) fail(file, ln.no, "kind takes one value");
        if (ln.raw[1] == "communication") link.kind = LinkKind::Communication;
        else if (ln.raw[1] == "closed-loop") link.kind = LinkKind::ClosedLoop;
        else fail(file, ln.no, "kind is communication or closed-loop");
    } else if (head == "from") {
        if (ln.raw.size() != 4 || ln.raw[2] != "to")
            fail(file, ln.no, "expected: from <apb> to <apb>");
        link.from = ln.raw[1];
        link.to = ln.raw[3];
        link.kind = LinkKind::Communication;
    } else if (head == "owner") {
        if (ln.raw.size() != 2) fail(file, ln.no, "owner takes one APB name");
        link.from = ln.raw[1];
        link.to.clear();
        link.kind = LinkKind::ClosedLoop;
    } else if (head == "fwd" || head == "channels") {
        times(link.fwd_delays);
    } else if (head == "bwd") {
        times(link.bwd_delays);
    } else if (head == "xnor") {
        if (ln.raw.size() != 2) fail(file, ln.no, "xnor takes 'from' or 'to'");
        if (ln.raw[1] == "from") link.xnor_side = LinkSide::A;
        else if (ln.raw[1] == "to") link.xnor_side = LinkSide::B;
        else fail(file, ln.no, "xnor takes 'from' or 'to'");
    } else {
        fail(file, ln.no, "unknown link entry '" + head + "'");
    }
}

void parse_environment_entry(EnvironmentConfig& env, bool& t_device_set,
                             const Line& ln, const std::string& file) {
    const std::string& head = ln.raw[0];
    auto one = [&]() -> const std::string& {
        if (ln.raw.size() != 2) fail(file, ln.no, head + " takes one value");
        return ln.raw[1];
    };
    if (head == "t_ambient") env.thermal.t_ambient = parse_double(one(), file, ln.no);
    else if (head == "t_device") {
        env.thermal.t_device = parse_double(one(), file, ln.no);
        t_device_set = true;
    } else if (head == "t_ref") env.thermal.t_ref = parse_double(one(), file, ln.no);
    else if (head == "r_th") env.thermal.r_th = parse_double(one(), file, ln.no);
    else if (head == "c_th") env.thermal.c_th = parse_double(one(), file, ln.no);
    else if (head == "p_static") env.thermal.p_static = parse_double(one(), file, ln.no);
    else if (head == "p_per_edge") env.thermal.p_per_edge = parse_double(one(), file, ln.no);
    else if (head == "k") env.thermal.delay_coeff = parse_double(one(), file, ln.no);
    else if (head == "dt") env.step_interval = parse_time(one(), file, ln.no);
    else if (head == "sensor_noise") env.sensor_noise = parse_double(one(), file, ln.no);
    else if (head == "fail") {
        RthStep step;
        bool have_at = false, have_rth = false;
        for (std::size_t i = 1; i < ln.raw.size(); ++i) {
            auto [key, value] = split_kv(ln.raw[i]);
            if (key == "at") {
                step.at = parse_time(value, file, ln.no);
                have_at = true;
            } else if (key == "r_th") {
                step.r_th = parse_double(value, file, ln.no);
                have_rth = true;
            } else {
                fail(file, ln.no, "fail takes at=<time> r_th=<value>");
            }
        }
        if (!have_at || !have_rth)
            fail(file, ln.no, "fail takes at=<time> r_th=<value>");
        env.schedule.push_back(step);
    } else {
        fail(file, ln.no, "unknown environment entry '" + head + "'");
    }
}

void parse_sim_entry(SimConfig& sim, const Line& ln, const std::string& file) {
    const std::string& head = ln.raw[0];
    auto one = [&]() -> const std::string& {
        if (ln.raw.size() != 2) fail(file, ln.no, head + " takes one value");
        return ln.raw[1];
    };
    if (head == "seed") {
        sim.seed = parse_u64(one(), file, ln.no);
    } else if (head == "until") {
        const std::string& v = one();
        if (v.ends_with("ev"))
            sim.until_events = parse_u64(v.substr(0, v.size() - 2), file, ln.no);
        else
            sim.until_time = parse_time(v, file, ln.no);
    } else if (head == "window") {
        sim.window = parse_time(one(), file, ln.no);
    } else if (head == "probe") {
        sim.probe = one();
    } else if (head == "spectrum") {
        for (std::size_t i = 1; i < ln.raw.size(); ++i) {
            auto [key, value] = split_kv(ln.raw[i]);
            if (key == "bin") sim.spectrum.bin = parse_time(value, file, ln.no);
            else if (key == "nfft")
                sim.spectrum.nfft = std::size_t(parse_u64(value, file, ln.no));
            else if (key == "band") {
                auto comma = value.find(',');
                if (comma == std::string::npos)
                    fail(file, ln.no, "band=<lo_hz>,<hi_hz>");
                sim.spectrum.band_lo =
                    parse_double(value.substr(0, comma), file, ln.no);
                sim.spectrum.band_hi =
                    parse_double(value.substr(comma + 1), file, ln.no);
            } else {
                fail(file, ln.no, "spectrum takes bin= nfft= band=");
            }
        }
    } else {
        fail(file, ln.no, "unknown sim entry '" + head + "'");
    }
}

}  // namespace

ConfigDocument parse_config(const std::string& text, const std::string& file) {
    ConfigDocument doc;
    enum class Section { None, Apb, Link, Environment, Sim };
    Section section = Section::None;
    bool t_device_set = false;

    for (const Line& ln : tokenize(text)) {
        if (section == Section::None) {
            if (ln.raw.back() != "{")
                fail(file, ln.no, "expected a section header ending in '{'");
            const std::string& kind = ln.raw[0];
            if (kind == "apb") {
                if (ln.raw.size() != 3) fail(file, ln.no, "apb <name> {");
                doc.apbs.push_back({});
                doc.apbs.back().name = ln.raw[1];
                doc.apbs.back().line = ln.no;
                section = Section::Apb;
            } else if (kind == "link") {
                if (ln.raw.size() != 3) fail(file, ln.no, "link <name> {");
                doc.links.push_back({});
                doc.links.back().name = ln.raw[1];
                doc.links.back().line = ln.no;
                section = Section::Link;
            } else if (kind == "environment") {
                if (ln.raw.size() != 2) fail(file, ln.no, "environment {");
                if (doc.environment)
                    fail(file, ln.no, "duplicate environment section");
                doc.environment.emplace();
                section = Section::Environment;
            } else if (kind == "sim") {
                if (ln.raw.size() != 2) fail(file, ln.no, "sim {");
                section = Section::Sim;
            } else {
                fail(file, ln.no, "unknown section '" + kind + "'");
            }
            continue;
        }
        if (ln.raw.size() == 1 && ln.raw[0] == "}") {
            if (section == Section::Environment && !t_device_set)
                doc.environment->thermal.t_device = doc.environment->thermal.t_ambient;
            if (section == Section::Link && doc.links.back().from.empty())
                fail(file, ln.no, "link '" + doc.links.back().name +
                                      "' needs 'from <apb> to <apb>' or "
                                      "'owner <apb>'");
            section = Section::None;
            t_device_set = false;
            continue;
        }
        switch (section) {
            case Section::Apb:
                parse_apb_entry(doc.apbs.back(), ln, file);
                break;
            case Section::Link:
                parse_link_entry(doc.links.back(), ln, file);
                break;
            case Section::Environment:
                parse_environment_entry(*doc.environment, t_device_set, ln, file);
                break;
            case Section::Sim:
                parse_sim_entry(doc.sim, ln, file);
                break;
            case Section::None:
                break;
        }
    }
    if (section != Section::None)
        fail(file, 0, "unterminated section at end of file");
    return doc;
}

ConfigDocument load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError(path, 0, "cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

namespace {

std::string time_str(Time t) { return std::to_string(t) + "ps"; }

void serialize_policy(std::ostream& out, const PolicyConfig& pol) {
    out << "  policy ";
    switch (pol.kind) {
        case PolicyKind::Fixed: out << "fixed"; break;
        case PolicyKind::Spread:
            out << "spread link=" << pol.spread_link << " pair="
                << pol.spread_pair.first << "," << pol.spread_pair.second
                << " ref=" << pol.reference_channel;
            if (pol.lfsr_seed) out << " seed=" << *pol.lfsr_seed;
            break;
        case PolicyKind::Adaptive: {
            out << "adaptive link=" << pol.adaptive_link
                << " default=" << pol.adaptive_default;
            if (!pol.thresholds.empty()) {
                out << " at=";
                for (std::size_t i = 0; i < pol.thresholds.size(); ++i) {
                    if (i) out << ",";
                    out << fmt_double(pol.thresholds[i].first) << ":"
                        << pol.thresholds[i].second;
                }
            }
            break;
        }
        case PolicyKind::Limited: out << "limited limit=" << pol.limit; break;
        case PolicyKind::Burst: out << "burst length=" << pol.burst_length; break;
        case PolicyKind::Custom: out << "fixed"; break;  // not reachable from configs
    }
    for (const auto& [link, ch] : pol.channels) out << " " << link << "=" << ch;
    out << "\n";
}

}  // namespace

std::string serialize(const ConfigDocument& doc) {
    std::ostringstream out;
    for (const auto& apb : doc.apbs) {
        out << "apb " << apb.name << " {\n";
        out << "  register width=" << apb.width << " init=" << apb.initial
            << "\n";
        out << "  logic ";
        switch (apb.logic) {
            case LogicKind::CounterSource: out << "counter-source"; break;
            case LogicKind::RecordingSink: out << "recording-sink"; break;
            case LogicKind::Passthrough: out << "passthrough"; break;
            case LogicKind::Accumulator: out << "accumulator"; break;
            case LogicKind::CustomTable:
                out << "custom-table default=" << apb.table.fallback;
                break;
            case LogicKind::CustomFn: out << "passthrough"; break;  // API-only
        }
        out << "\n";
        for (const auto& [key, value] : apb.table.rows) {
            out << "  table";
            for (Word w : key) out << " " << w;
            out << " -> " << value << "\n";
        }
        serialize_policy(out, apb.policy);
        if (!apb.datapath.empty()) {
            out << "  datapath";
            for (const auto& [link, t] : apb.datapath)
                out << " " << link << "=" << time_str(t);
            out << "\n";
        }
        if (apb.overhead != 0) out << "  overhead " << time_str(apb.overhead) << "\n";
        out << "}\n";
    }
    for (const auto& link : doc.links) {
        out << "link " << link.name << " {\n";
        if (link.kind == LinkKind::Communication) {
            out << "  kind communication\n";
            out << "  from " << link.from << " to " << link.to << "\n";
            out << "  fwd";
            for (Time t : link.fwd_delays) out << " " << time_str(t);
            out << "\n  bwd";
            for (Time t : link.bwd_delays) out << " " << time_str(t);
            out << "\n";
            out << "  xnor " << (link.xnor_side == LinkSide::A ? "from" : "to")
                << "\n";
        } else {
            out << "  kind closed-loop\n";
            out << "  owner " << link.from << "\n";
            out << "  channels";
            for (Time t : link.fwd_delays) out << " " << time_str(t);
            out << "\n";
        }
        out << "}\n";
    }
    if (doc.environment) {
        const EnvironmentConfig& env = *doc.environment;
        out << "environment {\n";
        out << "  t_ambient " << fmt_double(env.thermal.t_ambient) << "\n";
        out << "  t_device " << fmt_double(env.thermal.t_device) << "\n";
        out << "  t_ref " << fmt_double(env.thermal.t_ref) << "\n";
        out << "  r_th " << fmt_double(env.thermal.r_th) << "\n";
        out << "  c_th " << fmt_double(env.thermal.c_th) << "\n";
        out << "  p_static " << fmt_double(env.thermal.p_static) << "\n";
        out << "  p_per_edge " << fmt_double(env.thermal.p_per_edge) << "\n";
        out << "  k " << fmt_double(env.thermal.delay_coeff) << "\n";
        out << "  dt " << time_str(env.step_interval) << "\n";
        if (env.sensor_noise != 0)
            out << "  sensor_noise " << fmt_double(env.sensor_noise) << "\n";
        for (const auto& step : env.schedule)
            out << "  fail at=" << time_str(step.at)
                << " r_th=" << fmt_double(step.r_th) << "\n";
        out << "}\n";
    }
    out << "sim {\n";
    out << "  seed " << doc.sim.seed << "\n";
    if (doc.sim.until_time) out << "  until " << time_str(*doc.sim.until_time) << "\n";
    if (doc.sim.until_events) out << "  until " << *doc.sim.until_events << "ev\n";
    out << "  window " << time_str(doc.sim.window) << "\n";
    if (!doc.sim.probe.empty()) out << "  probe " << doc.sim.probe << "\n";
    out << "  spectrum bin=" << time_str(doc.sim.spectrum.bin)
        << " nfft=" << doc.sim.spectrum.nfft;
    if (doc.sim.spectrum.band_lo != 0 || doc.sim.spectrum.band_hi != 0)
        out << " band=" << fmt_double(doc.sim.spectrum.band_lo) << ","
            << fmt_double(doc.sim.spectrum.band_hi);
    out << "\n}\n";
    return out.str();
}

Network build_network(const ConfigDocument& doc, const std::string& file) {
    Network net;
    std::map<std::string, ApbId> apb_ids;
    std::map<std::string, LinkId> link_ids;

    for (const auto& ac : doc.apbs) {
        if (apb_ids.count(ac.name))
            throw ConfigError(file, ac.line,
                              "duplicate APB '" + ac.name + "'");
        apb_ids[ac.name] = ApbId(net.apbs.size());
        Apb apb;
        apb.id = ApbId(net.apbs.size());
        apb.name = ac.name;
        apb.gprm = apb.id;
        apb.width = ac.width;
        apb.initial = ac.initial;
        apb.logic.kind = ac.logic;
        apb.logic.table = ac.table;
        apb.gprm_overhead = ac.overhead;
        net.apbs.push_back(std::move(apb));
    }

    for (const auto& lc : doc.links) {
        if (link_ids.count(lc.name))
            throw ConfigError(file, lc.line,
                              "duplicate link '" + lc.name + "'");
        auto resolve = [&](const std::string& name) {
            auto it = apb_ids.find(name);
            if (it == apb_ids.end())
                throw ConfigError(file, lc.line,
                                  "link '" + lc.name + "' references unknown APB '" +
                                      name + "'");
            return it->second;
        };
        Link link;
        link.id = LinkId(net.links.size());
        link.name = lc.name;
        link.kind = lc.kind;
        link.endpoint_a = resolve(lc.from);
        link.endpoint_b =
            lc.kind == LinkKind::ClosedLoop ? link.endpoint_a : resolve(lc.to);
        link.xnor_side =
            lc.kind == LinkKind::ClosedLoop ? LinkSide::A : lc.xnor_side;
        for (std::size_t i = 0; i < lc.fwd_delays.size(); ++i)
            link.fwd_channels.push_back({ChannelId(i), lc.fwd_delays[i]});
        for (std::size_t i = 0; i < lc.bwd_delays.size(); ++i)
            link.bwd_channels.push_back({ChannelId(i), lc.bwd_delays[i]});
        link_ids[lc.name] = link.id;
        net.links.push_back(std::move(link));
    }

    for (std::size_t i = 0; i < doc.apbs.size(); ++i) {
        const ApbConfig& ac = doc.apbs[i];
        Apb& apb = net.apbs[i];
        auto resolve_link = [&](const std::string& name) {
            auto it = link_ids.find(name);
            if (it == link_ids.end())
                throw ConfigError(file, ac.line,
                                  "APB '" + ac.name + "' references unknown link '" +
                                      name + "'");
            return it->second;
        };
        apb.policy.kind = ac.policy.kind;
        for (const auto& [name, ch] : ac.policy.channels)
            apb.policy.channels[resolve_link(name)] = ch;
        if (ac.policy.kind == PolicyKind::Spread) {
            apb.policy.spread_link = resolve_link(ac.policy.spread_link);
            apb.policy.spread_pair = ac.policy.spread_pair;
            apb.policy.lfsr_seed = ac.policy.lfsr_seed;
            apb.policy.reference_channel = ac.policy.reference_channel;
        }
        if (ac.policy.kind == PolicyKind::Adaptive) {
            apb.policy.adaptive_link = resolve_link(ac.policy.adaptive_link);
            apb.policy.adaptive_default = ac.policy.adaptive_default;
            apb.policy.thresholds = ac.policy.thresholds;
        }
        apb.policy.limit = ac.policy.limit;
        apb.policy.burst_length = ac.policy.burst_length;
        for (const auto& [name, t] : ac.datapath)
            apb.datapath_delays[resolve_link(name)] = t;
    }

    net.rebuild_endpoints();
    return net;
}

}  // namespace gals
