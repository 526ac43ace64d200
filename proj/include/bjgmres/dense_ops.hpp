#pragma once

#include <cmath>
#include <cstdlib>
#include <span>
#include <vector>

#include "bjgmres/types.hpp"

namespace bjgmres {

/// Norms accumulate in binary64 regardless of the input precision so that
/// convergence tests stay meaningful on binary32 data.
template <class T>
double vector_norm(std::span<const T> x, Norm which) {
    double acc = 0.0;
    switch (which) {
        case Norm::Two:
            for (T v : x) {
                const double d = static_cast<double>(v);
                acc += d * d;
            }
            return std::sqrt(acc);
        case Norm::Inf:
            for (T v : x) acc = std::max(acc, std::abs(static_cast<double>(v)));
            return acc;
        case Norm::One:
            for (T v : x) acc += std::abs(static_cast<double>(v));
            return acc;
    }
    return acc;
}

template <class T>
double norm2(std::span<const T> x) {
    return vector_norm(x, Norm::Two);
}

/// Inner product accumulated in binary64.
template <class T>
double dot(std::span<const T> a, std::span<const T> b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i)
        acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    return acc;
}

/// Round-to-nearest-even per entry (the hardware double->float conversion).
inline std::vector<float> to_single(std::span<const double> x) {
    std::vector<float> y(x.size());
    for (size_t i = 0; i < x.size(); ++i) y[i] = static_cast<float>(x[i]);
    return y;
}

/// Upcasts are exact.
inline std::vector<double> to_double(std::span<const float> x) {
    std::vector<double> y(x.size());
    for (size_t i = 0; i < x.size(); ++i) y[i] = static_cast<double>(x[i]);
    return y;
}

inline std::vector<double> to_double(std::span<const double> x) {
    return {x.begin(), x.end()};
}

} // namespace bjgmres
