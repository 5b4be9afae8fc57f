#pragma once

#include <cstdint>

namespace zld {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Above this height t*log n is reduced in quad precision.
constexpr double kQuadPhaseHeight = 1e8;

// t*log(n) mod 2pi in [0, 2pi)
double phase_tlog(double t, std::uint64_t n);

// x mod 2pi in [0, 2pi) for a long double argument
double reduce_2pi(long double x);

// cos(2 pi u) for u in [0, 1), branchless odd polynomial after folding; abs error below 2e-15
inline double cos_2pi(double u)
{
    const double z = (u > 0.5 ? u - 0.5 : 0.5 - u) - 0.25;
    const double x = kTwoPi * z, x2 = x * x;
    double p = -1.0 / 121645100408832000.0;
    p = p * x2 + 1.0 / 355687428096000.0;
    p = p * x2 - 1.0 / 1307674368000.0;
    p = p * x2 + 1.0 / 6227020800.0;
    p = p * x2 - 1.0 / 39916800.0;
    p = p * x2 + 1.0 / 362880.0;
    p = p * x2 - 1.0 / 5040.0;
    p = p * x2 + 1.0 / 120.0;
    p = p * x2 - 1.0 / 6.0;
    return x + x * x2 * p;
}

// log n in long double, from a shared table for small n
long double log_ld(std::uint64_t n);

}  // namespace zld
