#include "zld/majorant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

#include <boost/math/quadrature/gauss.hpp>

#include "zld/errors.hpp"
#include "zld/model.hpp"
#include "zld/phase.hpp"

namespace zld {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr int kTailTable = 8000;        // kernel tails tabulated on [0, 8000]
constexpr double kUseGBelow = 1e-15;    // remainder below which D is read off G
constexpr std::uint64_t kMaxNu = 1000000;
constexpr std::size_t kMaxTaylor = 2000;

template <class Real, int N>
struct Rule {
    std::vector<Real> x, w;  // nodes on [-1, 1]
    Rule()
    {
        using G = boost::math::quadrature::gauss<Real, N>;
        const auto& ab = G::abscissa();
        const auto& wt = G::weights();
        for (std::size_t i = 0; i < ab.size(); ++i) {
            if (ab[i] == 0) {
                x.push_back(0);
                w.push_back(wt[i]);
                continue;
            }
            x.push_back(ab[i]);
            w.push_back(wt[i]);
            x.push_back(-ab[i]);
            w.push_back(wt[i]);
        }
    }
};

const Rule<double, 20>& rule20()
{
    static const Rule<double, 20> r;
    return r;
}

const Rule<long double, 30>& rule30()
{
    static const Rule<long double, 30> r;
    return r;
}

template <class F>
double integrate(F&& f, double lo, double hi)
{
    const auto& r = rule20();
    const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    double s = 0;
    for (std::size_t i = 0; i < r.x.size(); ++i) s += r.w[i] * f(c + h * r.x[i]);
    return s * h;
}

double kappa(double y)
{
    const double u = kPi * y;
    const double s = std::fabs(u) < 1e-4 ? 1 - u * u / 6 : std::sin(u) / u;
    const double s2 = s * s;
    return 1.5 * s2 * s2;
}

// Fourier transform of kappa: 1.5 times the centred Irwin-Hall(4) density
template <class Real>
Real kappa_hat(Real e)
{
    e = e < 0 ? -e : e;
    if (e >= 2) return 0;
    if (e <= 1) return Real(1.5) * (4 - 6 * e * e + 3 * e * e * e) / 6;
    const Real d = 2 - e;
    return Real(1.5) * d * d * d / 6;
}

// T(n) = int_n^inf kappa for integer n in [0, kTailTable]
const std::vector<double>& tail_table()
{
    static std::once_flag once;
    static std::vector<double> t;
    std::call_once(once, [] {
        t.assign(kTailTable + 1, 0.0);
        const double z = kTailTable;
        t[kTailTable] = 0.1875 / (kPi * kPi * kPi * kPi * z * z * z);
        for (int n = kTailTable - 1; n >= 0; --n) t[n] = t[n + 1] + integrate(kappa, n, n + 1);
    });
    return t;
}

// int_z^inf kappa for z >= 0
double kernel_tail(double z)
{
    if (z >= kTailTable) return 0.1875 / (kPi * kPi * kPi * kPi * z * z * z);
    const auto& t = tail_table();
    const int n = static_cast<int>(std::floor(z));
    return t[n + 1] + integrate(kappa, z, n + 1);
}

// M_k = int |eta|^k kappa_hat(eta) d eta
const std::vector<double>& kernel_moments()
{
    static std::once_flag once;
    static std::vector<double> m;
    std::call_once(once, [] {
        const auto& r = rule30();
        for (int k = 0; k <= 400; ++k) {
            long double s = 0;
            for (int piece = 0; piece < 2; ++piece)
                for (int pan = 0; pan < 16; ++pan) {
                    const long double lo = piece + pan / 16.0L, h = 1.0L / 32;
                    for (std::size_t i = 0; i < r.x.size(); ++i) {
                        const long double e = lo + h + h * r.x[i];
                        s += r.w[i] * h * std::pow(e, static_cast<long double>(k)) * kappa_hat(e);
                    }
                }
            m.push_back(static_cast<double>(2 * s));
        }
    });
    return m;
}

double log_moment_bound(std::uint64_t k)
{
    const auto& m = kernel_moments();
    if (k < m.size()) return std::log(m[k]);
    return std::log(1.5) + static_cast<double>(k) * std::log(2.0);  // |eta| <= 2
}

// sum_{k > nu} (2 pi |x|)^k / k! * L * omega^{k+1} * M_k, in logs
double remainder_bound(double omega, double L, std::uint64_t nu, double x)
{
    const double ax = std::fabs(x);
    if (ax == 0) return 0;
    const double lq = std::log(2 * kPi * ax * omega);
    if (4 * kPi * ax * omega > 1e6) return std::numeric_limits<double>::infinity();
    if (nu > kMaxNu) {
        // term ratios are below 1/2 this far out, so twice the first term bounds the tail
        const double k = static_cast<double>(nu) + 1;
        return 2 * std::exp(k * lq + std::log(omega * L) + std::log(1.5) + k * std::log(2.0) - std::lgamma(k + 1));
    }
    double lmax = -std::numeric_limits<double>::infinity(), acc = 0;
    const std::uint64_t q_guess = static_cast<std::uint64_t>(4 * kPi * ax * omega) + 1;
    const std::uint64_t kmax = std::max(nu + 1, q_guess) * 4 + 2000;
    for (std::uint64_t k = nu + 1; k <= kmax; ++k) {
        const double lt = static_cast<double>(k) * lq + std::log(omega * L) + log_moment_bound(k) -
                          std::lgamma(static_cast<double>(k) + 1);
        if (lt > lmax) {
            acc = acc * std::exp(lmax - lt) + 1;
            lmax = lt;
        } else {
            acc += std::exp(lt - lmax);
            if (k > q_guess && lt < lmax - 80) break;
        }
    }
    return std::exp(lmax) * acc;
}

}  // namespace

double MajorantSpec::lower_cutoff() const { return std::exp(-std::pow(Delta, A - 1)); }

double MajorantSpec::value(double x) const
{
    const double z1 = omega * (x - a), z2 = omega * (x - b);
    double g;
    if (z2 >= 0) {
        g = kernel_tail(z2) - kernel_tail(z1);
    } else if (z1 <= 0) {
        g = kernel_tail(-z1) - kernel_tail(-z2);
    } else {
        g = 1 - kernel_tail(z1) - kernel_tail(-z2);
    }
    return std::clamp(g, 0.0, 1.0);
}

std::complex<double> MajorantSpec::fourier(double xi) const
{
    const double kh = kappa_hat(xi / omega);
    if (kh == 0) return 0;
    if (xi == 0) return b - a;
    const std::complex<double> num = std::polar(1.0, -kTwoPi * xi * a) - std::polar(1.0, -kTwoPi * xi * b);
    return kh * num / std::complex<double>(0, kTwoPi * xi);
}

nlohmann::json MajorantSpec::to_json() const
{
    return {{"Delta", Delta},         {"A", A},
            {"a", a},                 {"b", b},
            {"omega", omega},         {"band_edge", band_edge},
            {"band_limit", band_limit}, {"nu_design", nu_design},
            {"nu", nu},               {"taylor_terms", taylor.size()},
            {"prop2_min", prop2_min}, {"prop2_max", prop2_max},
            {"prop5_integral", prop5_integral}, {"prop5_bound", 2 * band_limit},
            {"band_leak", band_leak}, {"c3", c3},
            {"c4", c4},               {"grid_step", grid_step}};
}

double taylor_remainder(const MajorantSpec& spec, std::uint64_t nu, double x)
{
    return remainder_bound(spec.omega, spec.b - spec.a, nu, x);
}

MajorantSpec build_majorant(double Delta, double A, const ConstantsLedger& ledger)
{
    if (!(Delta >= 3)) throw DomainError("build_majorant: Delta must be >= 3");
    if (ledger.profile == Profile::paper && !(A >= 10)) throw DomainError("build_majorant: A must be >= 10");
    if (!(A > 1)) throw DomainError("build_majorant: A must exceed 1");
    MajorantSpec s;
    s.Delta = Delta;
    s.A = A;
    const double pad = std::pow(Delta, -A / 2) / 2;
    s.a = -pad;
    s.b = 1 / Delta + pad;
    s.band_limit = std::pow(Delta, 2 * A);
    s.nu_design = ledger.nu_design;
    const double nu_real = std::ceil(std::pow(Delta, ledger.nu_exponent * A));
    s.nu = nu_real >= 1.8e19 ? std::numeric_limits<std::uint64_t>::max() : static_cast<std::uint64_t>(nu_real);

    // widest kernel band whose design-order Taylor remainder at |x| = 1/Delta is below 1e-12
    const double L = s.b - s.a;
    double lo = 0, hi = s.band_limit / 2;
    auto ok = [&](double om) { return remainder_bound(om, L, s.nu_design, 1 / Delta) <= 1e-12; };
    if (ok(hi)) {
        lo = hi;
    } else {
        for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            (ok(mid) ? lo : hi) = mid;
        }
    }
    if (!(lo > 0)) throw ConsistencyError("build_majorant: no admissible kernel width");
    s.omega = lo;
    s.band_edge = 2 * s.omega;
    if (!(s.band_edge <= s.band_limit)) throw ConsistencyError("majorant property (1) failed: band edge beyond limit");

    // Taylor coefficients at 0 from the Fourier side, s = xi / band_edge
    {
        const auto& r = rule30();
        const long double Bp = s.band_edge;
        const long double tpb = 2 * static_cast<long double>(kPi) * Bp;
        std::vector<long double> node, wgt;
        std::vector<std::complex<long double>> E;
        for (int piece = 0; piece < 4; ++piece)
            for (int pan = 0; pan < 16; ++pan) {
                const long double lo_s = -1 + piece * 0.5L + pan / 32.0L, h = 1.0L / 64;
                for (std::size_t i = 0; i < r.x.size(); ++i) {
                    const long double sv = lo_s + h + h * r.x[i];
                    node.push_back(sv);
                    wgt.push_back(r.w[i] * h);
                    const long double kh = kappa_hat(2 * sv);
                    const std::complex<long double> ea = std::polar(1.0L, -tpb * sv * static_cast<long double>(s.a));
                    const std::complex<long double> eb = std::polar(1.0L, -tpb * sv * static_cast<long double>(s.b));
                    E.push_back(kh * (ea - eb));
                }
            }
        s.taylor.push_back(s.value(0));
        std::vector<long double> pw(node.size(), 1.0L);
        const std::complex<long double> I(0, 1);
        std::complex<long double> ipow = 1;  // i^{k-1}
        const std::size_t kmax = static_cast<std::size_t>(std::min<std::uint64_t>(s.nu, kMaxTaylor));
        for (std::size_t k = 1; k <= kmax; ++k) {
            std::complex<long double> acc = 0;
            for (std::size_t j = 0; j < node.size(); ++j) {
                acc += wgt[j] * pw[j] * E[j];
                pw[j] *= node[j];
            }
            const long double lp = (k - 1) * std::log(tpb) + std::log(Bp) - std::lgamma(static_cast<long double>(k) + 1);
            s.taylor.push_back((ipow * acc).real() * std::exp(lp));
            ipow *= I;
            // stop once the coefficient envelope cannot matter on |x| <= 1
            const long double env = k * std::log(tpb) - std::lgamma(static_cast<long double>(k) + 1) +
                                    std::log(static_cast<long double>(1.5 * s.omega * L));
            if (k >= static_cast<std::size_t>(s.nu_design) && env < std::log(1e-40L)) break;
        }
    }

    // property checks on grids; h is the grid step, Lipschitz margins cover off-grid points
    const double lip = s.lipschitz();
    {
        const int N = 20000;
        const double x0 = -2, x1 = 2 + 1 / Delta;
        s.prop2_min = 1;
        s.prop2_max = 0;
        for (int i = 0; i <= N; ++i) {
            const double g = s.value(x0 + (x1 - x0) * i / N);
            s.prop2_min = std::min(s.prop2_min, g);
            s.prop2_max = std::max(s.prop2_max, g);
        }
        if (s.prop2_min < -1e-12 || s.prop2_max > 1 + 1e-12)
            throw ConsistencyError("majorant property (2) failed: G leaves [0,1]");
    }
    {
        const int N = 4000;
        const double h = 1 / Delta / N;
        s.grid_step = h;
        double gmin = 1;
        for (int i = 0; i <= N; ++i) gmin = std::min(gmin, s.value(i * h));
        gmin -= lip * h / 2;
        if (!(gmin > 0)) throw ConsistencyError("majorant property (3) failed: G vanishes on the interval");
        s.c3 = (1 / gmin - 1) / s.lower_cutoff();
    }
    {
        const double wl = -std::pow(Delta, -A / 2), wr = 1 / Delta + std::pow(Delta, -A / 2);
        const int N = 20000;
        double gmax = 0;
        for (int i = 0; i <= N; ++i) {
            const double d = 4.0 * i / N;
            gmax = std::max({gmax, s.value(wl - d), s.value(wr + d)});
        }
        // G decreases away from the interval, so the grid edge bounds everything beyond it
        s.c4 = (gmax + lip * 4.0 / N / 2) / s.lower_cutoff();
    }
    {
        double acc = 0;
        const int P = 256;
        for (int i = 0; i < P; ++i) {
            const double lo_x = -s.band_edge + 2 * s.band_edge * i / P, hi_x = lo_x + 2 * s.band_edge / P;
            acc += integrate([&](double xi) { return std::abs(s.fourier(xi)); }, lo_x, hi_x);
        }
        s.prop5_integral = acc;
        if (!(acc <= 2 * s.band_limit)) throw ConsistencyError("majorant property (5) failed: int |G^| too large");
        for (int j = 1; j <= 50; ++j) {
            const double xi = s.band_edge * (1 + j / 10.0);
            s.band_leak = std::max({s.band_leak, std::abs(s.fourier(xi)), std::abs(s.fourier(-xi))});
        }
    }
    return s;
}

TruncationPolynomial truncate(const MajorantSpec& spec, std::uint64_t nu)
{
    if (nu > kMaxNu)
        throw ResourceError("truncate: order nu=" + (nu == std::numeric_limits<std::uint64_t>::max()
                                                       ? std::string("Delta^{10A}")
                                                       : std::to_string(nu)) +
                            " is beyond representable coefficient tables; use the desk ledger");
    TruncationPolynomial p;
    p.nu = nu;
    const std::size_t n = static_cast<std::size_t>(std::min<std::uint64_t>(nu, spec.taylor.size() - 1));
    p.coeffs.assign(spec.taylor.begin(), spec.taylor.begin() + static_cast<std::ptrdiff_t>(n) + 1);
    if (nu > 0) {
        const double v = static_cast<double>(nu);
        p.log10_error_bound = v * (2 - std::log10(v)) + 3 * spec.A * v * std::log10(spec.Delta);
    }
    return p;
}

DValue evaluate_D(const MajorantSpec& spec, const TruncationPolynomial& poly, double x)
{
    DValue d;
    const double rem = taylor_remainder(spec, poly.nu, x);
    if (rem <= kUseGBelow) {
        d.value = spec.value(x);
        d.err = rem + 1e-15;
        d.via_G = true;
        return d;
    }
    if (poly.coeffs.size() < poly.nu + 1)
        throw ResourceError("evaluate_D: |x| too large for the stored coefficients at this order");
    long double acc = 0, mag = 0;
    const long double lx = x;
    for (std::size_t k = poly.coeffs.size(); k-- > 0;) {
        acc = acc * lx + poly.coeffs[k];
        mag = mag * std::fabs(lx) + std::fabs(poly.coeffs[k]);
    }
    d.value = static_cast<double>(acc);
    d.err = static_cast<double>(mag) * 1e-17;
    return d;
}

double measure_square_constant(const MajorantSpec& spec, const TruncationPolynomial& poly)
{
    const int N = 4000;
    const double h = 1 / spec.Delta / N;
    double dmin = std::numeric_limits<double>::infinity(), dmax = 0;
    for (int i = 0; i <= N; ++i) {
        const DValue v = evaluate_D(spec, poly, i * h);
        dmin = std::min(dmin, std::fabs(v.value) - v.err);
        dmax = std::max(dmax, std::fabs(v.value) + v.err);
    }
    // |D|^2 moves by at most 2 max|D| lip(D) per unit; lip(D) ~ lip(G) on this short interval
    const double sqmin = dmin * dmin - 2 * dmax * spec.lipschitz() * 1.01 * h / 2;
    if (!(sqmin > 0)) return std::numeric_limits<double>::infinity();
    return (1 / sqmin - 1) / spec.lower_cutoff();
}

SandwichReport sandwich_check(const MajorantSpec& spec, const TruncationPolynomial& poly, const std::vector<double>& xs)
{
    SandwichReport r;
    r.c = measure_square_constant(spec, poly);
    r.n = xs.size();
    r.min_margin = std::numeric_limits<double>::infinity();
    const double f = 1 + r.c * spec.lower_cutoff();
    for (double x : xs) {
        const double ind = (x >= 0 && x <= 1 / spec.Delta) ? 1.0 : 0.0;
        const double d = evaluate_D(spec, poly, x).value;
        const double m = d * d * f - ind;
        r.min_margin = std::min(r.min_margin, m);
        if (m < 0) {
            ++r.violations;
            if (r.violating_x.size() < 100) r.violating_x.push_back(x);
        }
    }
    return r;
}

UpperSandwichReport upper_sandwich_check(const MajorantSpec& spec, const std::vector<double>& xs)
{
    UpperSandwichReport r;
    r.n = xs.size();
    r.max_excess = -std::numeric_limits<double>::infinity();
    const double wl = -std::pow(spec.Delta, -spec.A / 2), wr = 1 / spec.Delta + std::pow(spec.Delta, -spec.A / 2);
    for (double x : xs) {
        const double ind = (x >= wl && x <= wr) ? 1.0 : 0.0;
        const double e = spec.value(x) - ind - spec.c4 * spec.lower_cutoff();
        r.max_excess = std::max(r.max_excess, e);
        if (e > 0) ++r.violations;
    }
    return r;
}

ReverseReport reverse_check(const MajorantSpec& spec, const TruncationPolynomial& poly, const PrimeBlock& block,
                            double u, std::size_t n_samples, std::uint64_t seed)
{
    if (!(std::fabs(u) < 4 * spec.Delta + 2)) throw DomainError("reverse_check: need |u| < 4 Delta + 2");
    const auto y = sample_block(block, n_samples, seed);
    ReverseReport r;
    r.u = u;
    r.n_samples = n_samples;
    const double wl = -std::pow(spec.Delta, -spec.A / 2), wr = 1 / spec.Delta + std::pow(spec.Delta, -spec.A / 2);
    const double far = std::pow(spec.Delta, 6 * spec.A);
    double s = 0, s2 = 0, in = 0, tail = 0;
    for (double v : y) {
        const double x = v - u;
        const double d = evaluate_D(spec, poly, x).value;
        s += d * d;
        s2 += d * d * d * d;
        in += (x >= wl && x <= wr);
        tail += std::fabs(x) > far;
    }
    const double n = static_cast<double>(n_samples);
    r.lhs = s / n;
    r.lhs_stderr = n > 1 ? std::sqrt(std::max(0.0, s2 / n - r.lhs * r.lhs) / (n - 1)) : 0;
    r.prob = in / n;
    r.rhs = r.prob + spec.c4 * spec.lower_cutoff();
    r.holds = r.lhs <= r.rhs + 3 * r.lhs_stderr;
    r.chernoff_tail = tail / n;
    return r;
}

}  // namespace zld
