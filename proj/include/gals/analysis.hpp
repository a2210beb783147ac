#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "gals/engine.hpp"
#include "gals/types.hpp"

namespace gals {

struct ThroughputSeries {
    Time window = 0;  // ps
    // (window start, items per second); windows tile the span without overlap
    std::vector<std::pair<Time, double>> points;
};

// Items delivered to `apb` per window, normalized to items/second. APBs with
// no input endpoints (self-clocked sources and oscillators) count one item
// per clock edge.
ThroughputSeries throughput(const Trace& trace, const Network& net, Time window,
                            ApbId apb);

struct Spectrum {
    double bin_hz = 0.0;
    double sample_rate = 0.0;
    std::vector<double> power;  // one-sided |X[k]|^2, k = 0 .. nfft/2

    std::size_t nfft() const { return power.empty() ? 0 : 2 * (power.size() - 1); }
};

// In-place iterative radix-2 transform. n must be a power of two.
void fft_radix2(std::vector<std::complex<double>>& data, bool inverse = false);

// Bins the edge times into an impulse train (count per `bin` picoseconds),
// removes the mean, transforms, and returns the one-sided power. Rectangular
// window; nfft must be a power of two covering every occupied bin.
Spectrum clock_spectrum(const std::vector<Time>& edges, Time bin,
                        std::size_t nfft);

// 10*log10(max reference power in band / max spread power in band).
double peak_reduction(const Spectrum& reference, const Spectrum& spread,
                      std::pair<double, double> band_hz);

// --- GPRM resource estimation ------------------------------------------------

struct GprmShape {
    std::uint32_t inputs = 0;                  // single-channel receive assumed
    std::vector<std::uint32_t> output_channels;  // per output, driven channels
    std::vector<std::uint32_t> loop_channels;    // per loop, driven channels
};

struct ResourceEstimate {
    std::uint32_t lut4 = 0;
    std::uint32_t t_ff = 0;
    std::vector<std::string> notes;
};

// LUT/flip-flop cost of one rendezvous module. Canonical always-send shapes
// (no loop, single-channel everywhere) merge all driven flip-flops into one;
// anything else keeps one T flip-flop per driven channel. The clock function
// maps onto a chain of 4-input LUTs over the visible wires.
ResourceEstimate resource_estimate(const GprmShape& shape);

// Network-aware variant: uses the real received-wire counts and the flow
// policy to decide whether flip-flop sharing applies.
ResourceEstimate resource_estimate(const Network& net, GprmId gprm);

// --- CSV rendering ------------------------------------------------------------

std::string spectrum_csv(const Spectrum& spectrum);
std::string throughput_csv(const ThroughputSeries& series);

}  // namespace gals
