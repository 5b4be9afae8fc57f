#pragma once

#include <cstdint>

namespace zld {

// Counter based randomness.  Every draw is a pure function of (seed, index),
// so samples can be produced in any order by any number of workers.

inline std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t hash2(std::uint64_t a, std::uint64_t b)
{
    return mix64(mix64(a) ^ (b * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL));
}

// uniform on [0,1) with 53 random bits
inline double u01(std::uint64_t seed, std::uint64_t index)
{
    return static_cast<double>(hash2(seed, index) >> 11) * 0x1.0p-53;
}

// independent stream for sample i of a seeded experiment
inline std::uint64_t substream(std::uint64_t seed, std::uint64_t i)
{
    return hash2(seed ^ 0x5851f42d4c957f2dULL, i);
}

}  // namespace zld
