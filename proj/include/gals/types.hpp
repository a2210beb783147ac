#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace gals {

// All simulation time is integer picoseconds. Integer time gives a total,
// reproducible event order; there is no floating-point time anywhere.
using Time = std::int64_t;

constexpr Time ps(std::int64_t v) { return v; }
constexpr Time ns(std::int64_t v) { return v * 1'000; }
constexpr Time us(std::int64_t v) { return v * 1'000'000; }
constexpr Time ms(std::int64_t v) { return v * 1'000'000'000; }

// APBs and their rendezvous modules are paired one-to-one, so they share an
// id space: ApbId k owns GprmId k.
using ApbId = std::uint32_t;
using GprmId = std::uint32_t;
using LinkId = std::uint32_t;
using ChannelId = std::uint32_t;

// Register contents. Widths up to 64 bits, masked by the owning APB.
using Word = std::uint64_t;

enum class LinkKind { Communication, ClosedLoop };

// Which side of a link evaluates the inverted parity function and therefore
// holds the token after reset.
enum class LinkSide { A, B };

enum class ParityConvention { Xor, Xnor };

// Role a link endpoint plays for the GPRM that controls it.
enum class LinkRole { Output, Input, Loop };

enum class TokenLocation { AtA, AtB, InFlight };

enum class Direction { AtoB, BtoA };

struct Channel {
    ChannelId id = 0;
    Time delay = 0;  // > 0; a zero-delay channel would allow unbounded event rates

    bool operator==(const Channel&) const = default;
};

class Error : public std::runtime_error {
public:
    enum class Code {
        TokenNotHeld,
        TransitionInFlight,
        ProtocolViolation,
        StallDecision,
        MalformedNetwork,
        UnknownChannel,
        UnknownSink,
        InsufficientLength,
        BandOutOfRange,
        MismatchedSpectra,
        UnsupportedShape,
        ZeroState,
        Config,
    };

    Error(Code code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    Code code() const { return code_; }

    static const char* code_name(Code c);

private:
    Code code_;
};

}  // namespace gals
