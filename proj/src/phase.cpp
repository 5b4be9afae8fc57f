#include "zld/phase.hpp"

#include <cmath>
#include <mutex>
#include <vector>

extern "C" {
#include <quadmath.h>
}

namespace zld {

namespace {

constexpr std::uint64_t kLogTable = 1u << 18;
constexpr long double kTwoPiL = 6.283185307179586476925286766559005768L;

const std::vector<long double>& log_table()
{
    static std::vector<long double> v;
    static std::once_flag once;
    std::call_once(once, [] {
        v.resize(kLogTable);
        v[0] = 0;
        for (std::uint64_t n = 1; n < kLogTable; ++n) v[n] = std::log(static_cast<long double>(n));
    });
    return v;
}

double phase_quad(double t, std::uint64_t n)
{
    const __float128 twopi = 2 * M_PIq;
    __float128 x = static_cast<__float128>(t) * logq(static_cast<__float128>(n));
    x = fmodq(x, twopi);
    if (x < 0) x += twopi;
    double r = static_cast<double>(x);
    return r >= kTwoPi ? 0.0 : r;
}

}  // namespace

long double log_ld(std::uint64_t n)
{
    if (n < kLogTable) return log_table()[n];
    return std::log(static_cast<long double>(n));
}

double reduce_2pi(long double x)
{
    long double r = x - kTwoPiL * std::floor(x / kTwoPiL);
    double d = static_cast<double>(r);
    if (d < 0) d += kTwoPi;
    return d >= kTwoPi ? 0.0 : d;
}

double phase_tlog(double t, std::uint64_t n)
{
    if (n <= 1) return 0.0;
    if (std::fabs(t) >= kQuadPhaseHeight) return phase_quad(t, n);
    return reduce_2pi(static_cast<long double>(t) * log_ld(n));
}

}  // namespace zld
