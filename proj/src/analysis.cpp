#include "gals/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace gals {

ThroughputSeries throughput(const Trace& trace, const Network& net, Time window,
                            ApbId apb) {
    if (window <= 0)
        throw Error(Error::Code::InsufficientLength,
                    "throughput window must be positive");
    if (apb >= net.apbs.size())
        throw Error(Error::Code::UnknownSink,
                    "no APB with id " + std::to_string(apb));

    // Sinks count delivered items; self-clocked blocks with no inputs count
    // one item per clock edge.
    bool has_input = false;
    for (const auto& ep : net.gprms[apb].endpoints)
        if (ep.role == LinkRole::Input) has_input = true;
    const std::vector<Time>& times =
        has_input ? trace.delivery_times[apb] : trace.edges_by_gprm[apb];

    ThroughputSeries series;
    series.window = window;
    std::size_t n_windows = std::size_t(trace.end_time / window) + 1;
    std::vector<std::uint64_t> counts(n_windows, 0);
    for (Time t : times) counts[std::size_t(t / window)] += 1;
    series.points.reserve(n_windows);
    for (std::size_t k = 0; k < n_windows; ++k)
        series.points.emplace_back(Time(k) * window,
                                   double(counts[k]) * 1e12 / double(window));
    return series;
}

void fft_radix2(std::vector<std::complex<double>>& data, bool inverse) {
    std::size_t n = data.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw Error(Error::Code::InsufficientLength,
                    "transform length must be a power of two");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(data[i], data[j]);
    }
    // Twiddles come straight from polar() per index rather than by repeated
    // multiplication; rounding stays at machine epsilon for any length.
    std::vector<std::complex<double>> twiddle(n / 2);
    double sign = inverse ? 2.0 : -2.0;
    for (std::size_t k = 0; k < n / 2; ++k)
        twiddle[k] = std::polar(1.0, sign * std::numbers::pi * double(k) / double(n));
    for (std::size_t len = 2; len <= n; len <<= 1) {
        std::size_t stride = n / len;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < len / 2; ++k) {
                std::complex<double> u = data[i + k];
                std::complex<double> v = data[i + k + len / 2] * twiddle[k * stride];
                data[i + k] = u + v;
                data[i + k + len / 2] = u - v;
            }
        }
    }
    if (inverse)
        for (auto& x : data) x /= double(n);
}

Spectrum clock_spectrum(const std::vector<Time>& edges, Time bin,
                        std::size_t nfft) {
    if (bin <= 0)
        throw Error(Error::Code::InsufficientLength, "bin must be positive");
    if (nfft < 2 || (nfft & (nfft - 1)) != 0)
        throw Error(Error::Code::InsufficientLength,
                    "nfft must be a power of two >= 2");
    if (edges.empty())
        throw Error(Error::Code::InsufficientLength, "no edges to transform");
    Time last = *std::max_element(edges.begin(), edges.end());
    if (last < bin)
        throw Error(Error::Code::InsufficientLength,
                    "trace shorter than one bin");
    std::size_t occupied = std::size_t(last / bin) + 1;
    if (occupied > nfft)
        throw Error(Error::Code::InsufficientLength,
                    "nfft " + std::to_string(nfft) + " smaller than " +
                        std::to_string(occupied) + " occupied bins");

    std::vector<std::complex<double>> x(nfft, 0.0);
    for (Time t : edges) x[std::size_t(t / bin)] += 1.0;
    double mean = double(edges.size()) / double(nfft);
    for (auto& v : x) v -= mean;

    fft_radix2(x);

    Spectrum s;
    s.sample_rate = 1e12 / double(bin);
    s.bin_hz = s.sample_rate / double(nfft);
    s.power.resize(nfft / 2 + 1);
    for (std::size_t k = 0; k <= nfft / 2; ++k) s.power[k] = std::norm(x[k]);
    return s;
}

double peak_reduction(const Spectrum& reference, const Spectrum& spread,
                      std::pair<double, double> band_hz) {
    if (reference.bin_hz != spread.bin_hz ||
        reference.sample_rate != spread.sample_rate ||
        reference.power.size() != spread.power.size())
        throw Error(Error::Code::MismatchedSpectra,
                    "spectra differ in resolution or length");
    auto [lo, hi] = band_hz;
    double nyquist = reference.sample_rate / 2.0;
    if (lo < 0 || hi < lo || lo > nyquist)
        throw Error(Error::Code::BandOutOfRange,
                    "band does not intersect the spectrum");
    std::size_t k_lo = std::size_t(std::ceil(lo / reference.bin_hz));
    std::size_t k_hi = std::min(std::size_t(std::floor(hi / reference.bin_hz)),
                                reference.power.size() - 1);
    if (k_lo > k_hi)
        throw Error(Error::Code::BandOutOfRange, "band covers no bins");

    double ref_max = 0.0, spread_max = 0.0;
    for (std::size_t k = k_lo; k <= k_hi; ++k) {
        ref_max = std::max(ref_max, reference.power[k]);
        spread_max = std::max(spread_max, spread.power[k]);
    }
    if (ref_max == 0.0 && spread_max == 0.0) return 0.0;
    if (spread_max == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(ref_max / spread_max);
}

namespace {

struct WireCount {
    std::uint32_t driven = 0;    // T flip-flops this GPRM toggles
    std::uint32_t received = 0;  // wires arriving from the far side
    bool multi_channel_output = false;
    bool has_loop = false;
    bool single_channel_everywhere = true;
};

std::uint32_t lut4_chain(std::uint32_t vars) {
    // One LUT4 covers four inputs; each further LUT absorbs the previous
    // output plus three new inputs.
    if (vars <= 4) return 1;
    return 1 + (vars - 4 + 2) / 3;
}

ResourceEstimate estimate_from_counts(const WireCount& w, bool always_send,
                                      bool catalog_shape) {
    if (w.driven == 0 && w.received == 0)
        throw Error(Error::Code::UnsupportedShape,
                    "GPRM controls no links; nothing to estimate");

    ResourceEstimate est;
    bool share = always_send && !w.has_loop && w.single_channel_everywhere;
    // Always-send single-channel shapes toggle every flip-flop together, so
    // one T flip-flop can drive all the wires.
    est.t_ff = share ? 1 : w.driven;
    std::uint32_t vars = w.received + (share ? 1 : w.driven);
    est.lut4 = lut4_chain(vars);

    if (w.multi_channel_output)
        est.notes.push_back(
            "multi-channel output: destination GPRM needs one additional LUT "
            "input");
    if (!catalog_shape)
        est.notes.push_back(
            "extrapolated beyond the measured catalog shapes; no flip-flop "
            "sharing assumed unless the shape is canonical always-send");
    return est;
}

bool is_catalog_shape(const GprmShape& s) {
    auto eq = [&](std::uint32_t in, std::vector<std::uint32_t> out,
                  std::vector<std::uint32_t> loop) {
        return s.inputs == in && s.output_channels == out &&
               s.loop_channels == loop;
    };
    return eq(1, {1}, {}) || eq(1, {2}, {}) || eq(2, {1}, {}) ||
           eq(1, {1, 1}, {}) || eq(1, {1}, {1}) || eq(1, {1}, {2});
}

}  // namespace

ResourceEstimate resource_estimate(const GprmShape& shape) {
    WireCount w;
    w.driven += shape.inputs;    // one backward flip-flop per input
    w.received += shape.inputs;  // one forward wire per input (single-channel)
    for (std::uint32_t chs : shape.output_channels) {
        if (chs == 0)
            throw Error(Error::Code::UnsupportedShape,
                        "output with zero channels");
        w.driven += chs;
        w.received += 1;  // single backward update-request wire
        if (chs > 1) {
            w.multi_channel_output = true;
            w.single_channel_everywhere = false;
        }
    }
    for (std::uint32_t chs : shape.loop_channels) {
        if (chs == 0)
            throw Error(Error::Code::UnsupportedShape,
                        "loop with zero channels");
        w.driven += chs;
        w.received += chs;  // loop wires come back to the sender
        w.has_loop = true;
        if (chs > 1) w.single_channel_everywhere = false;
    }
    return estimate_from_counts(w, /*always_send=*/true, is_catalog_shape(shape));
}

ResourceEstimate resource_estimate(const Network& net, GprmId gprm) {
    if (gprm >= net.gprms.size())
        throw Error(Error::Code::UnsupportedShape,
                    "no GPRM with id " + std::to_string(gprm));
    const Gprm& g = net.gprms[gprm];
    const Apb& apb = net.apbs[gprm];

    WireCount w;
    GprmShape shape;
    for (const auto& ep : g.endpoints) {
        const Link& link = net.links[ep.link];
        auto fwd = std::uint32_t(link.fwd_channels.size());
        auto bwd = std::uint32_t(link.bwd_channels.size());
        switch (ep.role) {
            case LinkRole::Input:
                shape.inputs += 1;
                w.driven += bwd;
                w.received += fwd;
                if (bwd > 1) w.single_channel_everywhere = false;
                break;
            case LinkRole::Output:
                shape.output_channels.push_back(fwd);
                w.driven += fwd;
                w.received += bwd;
                if (fwd > 1) {
                    w.multi_channel_output = true;
                    w.single_channel_everywhere = false;
                }
                if (bwd > 1) w.single_channel_everywhere = false;
                break;
            case LinkRole::Loop:
                shape.loop_channels.push_back(fwd);
                w.driven += fwd;
                w.received += fwd;
                w.has_loop = true;
                if (fwd > 1) w.single_channel_everywhere = false;
                break;
        }
    }
    // Sharing needs a policy that provably toggles everything together.
    bool always_send = apb.policy.kind == PolicyKind::Fixed;
    return estimate_from_counts(w, always_send, is_catalog_shape(shape));
}

std::string spectrum_csv(const Spectrum& spectrum) {
    std::ostringstream out;
    out.precision(17);
    out << "frequency_hz,power\n";
    for (std::size_t k = 0; k < spectrum.power.size(); ++k)
        out << double(k) * spectrum.bin_hz << "," << spectrum.power[k] << "\n";
    return out.str();
}

std::string throughput_csv(const ThroughputSeries& series) {
    std::ostringstream out;
    out.precision(17);
    out << "window_start_ps,items_per_s\n";
    for (const auto& [start, rate] : series.points)
        out << start << "," << rate << "\n";
    return out.str();
}

}  // namespace gals
