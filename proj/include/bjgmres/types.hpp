#pragma once

#include <cstdint>

namespace bjgmres {

using index_t = std::int64_t;

enum class Norm { Two, Inf, One };

/// Unit roundoff of IEEE-754 binary32 / binary64.
inline constexpr double kRoundoffSingle = 0x1p-24;
inline constexpr double kRoundoffDouble = 0x1p-53;

enum class PrecisionMode { DoubleOnly, Hybrid };

/// Which precision the Krylov loop runs in. binary64 is always the master
/// storage precision; Hybrid runs the inner iteration in binary32.
struct PrecisionPolicy {
    PrecisionMode mode = PrecisionMode::DoubleOnly;

    bool hybrid() const { return mode == PrecisionMode::Hybrid; }
    double working_roundoff() const {
        return hybrid() ? kRoundoffSingle : kRoundoffDouble;
    }
};

} // namespace bjgmres
