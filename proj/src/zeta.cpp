#include "zld/zeta.hpp"

#include <array>
#include <cmath>
#include <mutex>
#include <string>

#include <boost/math/constants/constants.hpp>
#include <boost/math/special_functions/bernoulli.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

extern "C" {
#include <quadmath.h>
}

#include "zld/errors.hpp"
#include "zld/phase.hpp"
#include "zld/rng.hpp"

namespace zld {

namespace {

// the series division amplifies rounding by ~4^n, hence the wide type
using mpf = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<200>>;

// Power series in z = p - 1/2 of the Riemann-Siegel corrections C0..C4,
// built from Psi(z) = -cos(2 pi z^2 - 5 pi/8) / cos(2 pi z).
struct RsSeries {
    std::array<std::vector<double>, 5> c;
};

RsSeries build_rs_series()
{
    constexpr int D = 200;
    const mpf pi = boost::math::constants::pi<mpf>();
    const mpf two_pi = 2 * pi;
    std::vector<mpf> num(D + 1, mpf(0)), den(D + 1, mpf(0));
    const mpf c58 = cos(5 * pi / 8), s58 = sin(5 * pi / 8);
    // cos(2 pi z^2) and sin(2 pi z^2)
    mpf pw = 1, fact = 1;
    for (int j = 0; 2 * j <= D; ++j) {
        if (j > 0) {
            pw *= two_pi;
            fact *= j;
        }
        const int deg = 2 * j;
        const mpf term = pw / fact;  // (2pi)^j / j! multiplies z^{2j}
        // j even -> cos part, j odd -> sin part, sign (-1)^{floor(j/2)}
        const int sgn = ((j / 2) % 2 == 0) ? 1 : -1;
        if (j % 2 == 0)
            num[deg] -= c58 * sgn * term;
        else
            num[deg] -= s58 * sgn * term;
    }
    pw = 1;
    fact = 1;
    for (int j = 0; j <= D; ++j) {
        if (j > 0) {
            pw *= two_pi;
            fact *= j;
        }
        if (j % 2) continue;
        const int sgn = ((j / 2) % 2 == 0) ? 1 : -1;
        den[j] = sgn * pw / fact;
    }
    std::vector<mpf> q(D + 1);
    for (int n = 0; n <= D; ++n) {
        mpf acc = num[n];
        for (int j = 1; j <= n; ++j) acc -= den[j] * q[n - j];
        q[n] = acc / den[0];
    }
    constexpr int E = D - 12;
    auto deriv = [&](int j) {
        std::vector<mpf> d(E + 1);
        for (int n = 0; n <= E; ++n) {
            mpf f = 1;
            for (int k = n + 1; k <= n + j; ++k) f *= k;
            d[n] = q[n + j] * f;
        }
        return d;
    };
    std::array<std::vector<mpf>, 13> P;
    for (int j = 0; j <= 12; ++j) P[j] = deriv(j);
    const mpf p2 = pi * pi, p4 = p2 * p2, p6 = p4 * p2, p8 = p4 * p4;
    std::array<std::vector<mpf>, 5> C;
    for (auto& v : C) v.assign(E + 1, mpf(0));
    for (int n = 0; n <= E; ++n) {
        C[0][n] = P[0][n];
        C[1][n] = -P[3][n] / (96 * p2);
        C[2][n] = P[2][n] / (64 * p2) + P[6][n] / (18432 * p4);
        C[3][n] = -P[1][n] / (64 * p2) - P[5][n] / (3840 * p4) - P[9][n] / (5308416 * p6);
        C[4][n] = P[0][n] / (128 * p2) + 19 * P[4][n] / (24576 * p4) + 11 * P[8][n] / (5898240 * p6) +
                  P[12][n] / (2038431744 * p8);
    }
    RsSeries out;
    for (int k = 0; k < 5; ++k) {
        int last = 0;
        for (int n = 0; n <= E; ++n) {
            const double mag = std::fabs(C[k][n].convert_to<double>()) * std::pow(0.5, n);
            if (mag > 1e-24) last = n;
        }
        out.c[k].resize(last + 1);
        for (int n = 0; n <= last; ++n) out.c[k][n] = C[k][n].convert_to<double>();
    }
    return out;
}

const RsSeries& rs_series()
{
    static RsSeries s;
    static std::once_flag once;
    std::call_once(once, [] { s = build_rs_series(); });
    return s;
}

double horner(const std::vector<double>& c, double z)
{
    double acc = 0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * z + *it;
    return acc;
}

long double theta_ld(long double t)
{
    const long double pi = 3.141592653589793238462643383279502884L;
    const long double it = 1 / t, it2 = it * it;
    return t / 2 * std::log(t / (2 * pi)) - t / 2 - pi / 8 +
           it * (1.0L / 48 + it2 * (7.0L / 5760 + it2 * (31.0L / 80640 + it2 * (127.0L / 430080))));
}

__float128 theta_q(double td)
{
    const __float128 t = td;
    const __float128 it = 1 / t, it2 = it * it;
    return t / 2 * logq(t / (2 * M_PIq)) - t / 2 - M_PIq / 8 +
           it * (__float128(1) / 48 + it2 * (__float128(7) / 5760 + it2 * (__float128(31) / 80640 +
                                                                            it2 * (__float128(127) / 430080))));
}

void check_height(double t)
{
    if (!std::isfinite(t)) throw DomainError("zeta: non-finite height");
    if (t < 2) throw DomainError("zeta: height must be >= 2");
    if (t > kMaxHeight)
        throw ResourceError("zeta: height " + std::to_string(t) + " above max height 1e12");
}

}  // namespace

double siegel_theta(double t) { return static_cast<double>(theta_ld(t)); }

double siegel_theta_mod(double t)
{
    if (t >= kQuadPhaseHeight) {
        const __float128 twopi = 2 * M_PIq;
        __float128 x = fmodq(theta_q(t), twopi);
        if (x < 0) x += twopi;
        return static_cast<double>(x);
    }
    return reduce_2pi(theta_ld(t));
}

double siegel_z(double t, double* err)
{
    if (t < kTwoPi) throw DomainError("siegel_z: needs t >= 2pi");
    const double a = std::sqrt(t / kTwoPi);
    const auto N = static_cast<std::uint64_t>(std::floor(a));
    const double p = a - static_cast<double>(N);
    double sum = 0;
    if (t < kQuadPhaseHeight) {
        const long double th = theta_ld(t);
        const long double tl = t;
        for (std::uint64_t n = 1; n <= N; ++n) {
            const double ph = reduce_2pi(th - tl * log_ld(n));
            sum += std::cos(ph) / std::sqrt(static_cast<double>(n));
        }
    } else {
        const double th = siegel_theta_mod(t);
        for (std::uint64_t n = 1; n <= N; ++n)
            sum += std::cos(th - phase_tlog(t, n)) / std::sqrt(static_cast<double>(n));
    }
    sum *= 2;
    const auto& s = rs_series();
    const double z = p - 0.5;
    double corr = 0, ak = 1;
    for (int k = 0; k < 5; ++k) {
        corr += horner(s.c[k], z) * ak;
        ak /= a;
    }
    const double sign = (N % 2 == 1) ? 1.0 : -1.0;  // (-1)^{N-1}
    const double val = sum + sign * corr / std::sqrt(a);
    if (err) {
        const double phase_err = t * std::log(std::max<double>(2.0, double(N))) * 1.1e-19 + 2e-16;
        *err = 0.017 * std::pow(a, -5.5) + 4 * std::sqrt(double(N) + 1) * phase_err;
    }
    return val;
}

ZetaValue zeta_rs(double t)
{
    double err = 0;
    const double z = siegel_z(t, &err);
    const double th = siegel_theta_mod(t);
    ZetaValue v;
    v.re = z * std::cos(th);
    v.im = -z * std::sin(th);
    v.abs_log = std::log(std::fabs(z));
    v.err_bound = err;
    return v;
}

ZetaValue zeta_em(double t)
{
    using cld = std::complex<long double>;
    const cld s(0.5L, static_cast<long double>(t));
    const std::uint64_t N = std::max<std::uint64_t>(20, static_cast<std::uint64_t>(std::ceil(t / M_PI)) + 10);
    const int m = 25;
    auto npow = [&](std::uint64_t n) {  // n^{-s}
        const long double ph = phase_tlog(t, n);
        return cld(std::cos(ph), -std::sin(ph)) / std::sqrt(static_cast<long double>(n));
    };
    cld sum = 0;
    for (std::uint64_t n = 1; n < N; ++n) sum += npow(n);
    const long double Nl = static_cast<long double>(N);
    const cld nms = npow(N);
    sum += nms * Nl / (s - 1.0L);
    sum += nms / 2.0L;
    cld poch = s;               // s(s+1)...(s+2k-2)
    long double fact = 2;       // (2k)!
    long double npw = 1 / Nl;   // N^{1-2k}
    long double last = 0;
    for (int k = 1; k <= m; ++k) {
        if (k > 1) {
            poch *= (s + static_cast<long double>(2 * k - 3)) * (s + static_cast<long double>(2 * k - 2));
            fact *= static_cast<long double>((2 * k - 1) * (2 * k));
            npw /= Nl * Nl;
        }
        const long double b = boost::math::bernoulli_b2n<long double>(k);
        const cld term = b / fact * poch * nms * npw;
        sum += term;
        last = std::abs(term);
    }
    ZetaValue v;
    v.re = static_cast<double>(sum.real());
    v.im = static_cast<double>(sum.imag());
    v.abs_log = static_cast<double>(std::log(std::abs(sum)));
    v.err_bound = static_cast<double>(2 * last) + 1e-16 * std::sqrt(static_cast<double>(N));
    return v;
}

ZetaValue zeta_critical(const Height& h)
{
    check_height(h.t);
    if (h.t < kEulerMaclaurinBelow) return zeta_em(h.t);
    ZetaValue rs = zeta_rs(h.t);
    if (h.profile == Precision::checked && h.t <= kCheckedOracleBelow) {
        ZetaValue em = zeta_em(h.t);
        const double d = std::hypot(rs.re - em.re, rs.im - em.im);
        em.err_bound = std::max(em.err_bound, d);
        return em;
    }
    return rs;
}

LogAbs log_abs_zeta(const Height& h)
{
    const ZetaValue z = zeta_critical(h);
    const double thr = std::max(z.err_bound, 1e-12);
    LogAbs out;
    out.raw = z.abs_log;
    if (std::exp(z.abs_log) < thr) {
        out.near_zero = true;
        out.value = std::log(thr);
    } else {
        out.value = z.abs_log;
    }
    return out;
}

std::vector<Height> sample_tau(double T, std::size_t n, std::uint64_t seed)
{
    if (!(T >= 10)) throw DomainError("sample_tau: T must be >= 10");
    if (n < 1) throw DomainError("sample_tau: n must be >= 1");
    std::vector<Height> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i].t = T * (1.0 + u01(seed, i));
    return out;
}

}  // namespace zld
