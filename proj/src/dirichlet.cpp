#include "zld/dirichlet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>

#include "zld/errors.hpp"
#include "zld/parallel.hpp"
#include "zld/phase.hpp"
#include "zld/zeta.hpp"

namespace zld {

namespace {

cplx unit(double phase) { return {std::cos(phase), -std::sin(phase)}; }  // e^{-i phase}

const PrimeBlock& cached_block(const PrimeRange& r)
{
    static std::mutex mu;
    static std::map<std::pair<double, double>, std::unique_ptr<PrimeBlock>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[{r.t_lo, r.t_hi}];
    if (!slot) slot = std::make_unique<PrimeBlock>(r);
    return *slot;
}

struct Moments {
    double mean = 0, m2 = 0;
    std::size_t n = 0;
    void add(double x)
    {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    double var() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
    double stderr_() const { return n > 0 ? std::sqrt(var() / static_cast<double>(n)) : 0.0; }
};

double factorial(int n)
{
    double f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

void check_poly_length(const DirichletPolynomial& p, double T, const char* what)
{
    if (static_cast<double>(p.length) > T)
        throw DomainError(std::string(what) + ": polynomial length " + std::to_string(p.length) + " exceeds T");
}

std::uint64_t max_prime_factor(const DirichletPolynomial& p)
{
    std::uint64_t m = 0;
    for (const auto& [n, a] : p.coeffs)
        for (const auto& [q, e] : factorize(n)) m = std::max(m, q);
    return m;
}

std::uint64_t min_prime_factor(const DirichletPolynomial& p)
{
    std::uint64_t m = std::numeric_limits<std::uint64_t>::max();
    for (const auto& [n, a] : p.coeffs)
        for (const auto& [q, e] : factorize(n)) m = std::min(m, q);
    return m;
}

}  // namespace

DirichletPolynomial DirichletPolynomial::constant(cplx c)
{
    DirichletPolynomial p;
    p.set(1, c);
    return p;
}

void DirichletPolynomial::set(std::uint64_t n, cplx a)
{
    if (n == 0) throw DomainError("dirichlet: index must be >= 1");
    if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) throw DomainError("dirichlet: non-finite coefficient");
    if (a == cplx(0, 0)) {
        coeffs.erase(n);
    } else {
        coeffs[n] = a;
    }
    length = coeffs.empty() ? 0 : coeffs.rbegin()->first;
}

bool DirichletPolynomial::support_ok() const
{
    for (const auto& [n, a] : coeffs)
        for (const auto& [p, e] : factorize(n))
            if (!support_range.contains(p)) return false;
    return true;
}

DirichletPolynomial multiply(const DirichletPolynomial& a, const DirichletPolynomial& b)
{
    std::map<std::uint64_t, cplx> acc;
    for (const auto& [m, x] : a.coeffs)
        for (const auto& [n, y] : b.coeffs) {
            if (m > std::numeric_limits<std::uint64_t>::max() / n) throw ResourceError("dirichlet: product index overflow");
            acc[m * n] += x * y;
        }
    DirichletPolynomial p;
    for (const auto& [n, c] : acc) p.set(n, c);
    p.support_range.t_lo = std::min(a.support_range.t_lo, b.support_range.t_lo);
    p.support_range.t_hi = std::max(a.support_range.t_hi, b.support_range.t_hi);
    return p;
}

PrimeBlock::PrimeBlock(const PrimeRange& r) : range(r)
{
    if (r.empty()) return;
    p = primes_in_range(r);
    inv_sqrt.reserve(p.size());
    for (auto q : p) inv_sqrt.push_back(1.0 / std::sqrt(static_cast<double>(q)));
}

std::pair<double, cplx> PrimeBlock::sums(double tau, bool squares) const
{
    double S = 0;
    cplx St = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double ph = phase_tlog(tau, p[i]);
        cplx z = unit(ph) * inv_sqrt[i];
        if (squares) z += unit(2 * ph) * (0.5 * inv_sqrt[i] * inv_sqrt[i]);
        St += z;
        S += z.real();
    }
    return {S, St};
}

double PrimeBlock::variance(bool squares) const
{
    double v = 0;
    for (auto s : inv_sqrt) {
        const double ip = s * s;
        v += 0.5 * ip;
        if (squares) v += 0.125 * ip * ip;
    }
    return v;
}

cplx PrimeBlock::mollifier(double tau, int omega_cap) const
{
    const int K = std::max(0, omega_cap);
    std::vector<cplx> e(static_cast<std::size_t>(K) + 1, cplx(0, 0));
    e[0] = 1;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const cplx x = unit(phase_tlog(tau, p[i])) * inv_sqrt[i];
        for (int k = K; k >= 1; --k) e[k] += e[k - 1] * x;
    }
    cplx m = 0;
    for (int k = K; k >= 0; --k) m += (k % 2 ? -1.0 : 1.0) * e[k];
    return m;
}

std::pair<double, cplx> partial_sum(double tau, double k, bool squares)
{
    PrimeRange r;
    r.t_hi = k;
    if (std::exp(std::exp(k)) < 2) return {0.0, cplx(0, 0)};
    if (static_cast<double>(r.hi_value()) > static_cast<double>(sieve_cap()))
        throw ResourceError("partial_sum: cutoff exp(e^" + std::to_string(k) + ") exceeds sieve cap " +
                            std::to_string(sieve_cap()));
    return cached_block(r).sums(tau, squares);
}

double increment(double tau, int j, const LadderConfig& ladder)
{
    if (j < 1 || j > ladder.L_count) throw DomainError("increment: j out of ladder range");
    return cached_block(ladder.range(j)).sums(tau, true).first;
}

MollifierSpec mollifier_spec(int ell, const LadderConfig& ladder)
{
    MollifierSpec s;
    s.ell = ell;
    s.range = ladder.range(ell);
    s.omega_cap = static_cast<int>(std::floor(std::pow(ladder.delta(ell), ladder.ledger.E_Omega)));
    s.length_cap = ladder.ledger.mollifier_term_cap;
    s.value_cap = ladder.ledger.mollifier_value_cap;
    return s;
}

DirichletPolynomial mollifier(const MollifierSpec& spec)
{
    DirichletPolynomial poly;
    poly.support_range = spec.range;
    std::vector<std::uint64_t> ps;
    if (!spec.range.empty()) {
        PrimeRange r = spec.range;
        // primes beyond the value cap cannot appear
        const auto cap_tt = std::log(std::log(static_cast<double>(spec.value_cap) + 0.5));
        if (cap_tt < r.t_hi) r.t_hi = cap_tt;
        if (!r.empty()) ps = primes_in_range(r);
    }
    std::map<std::uint64_t, cplx> out;
    out[1] = 1;
    auto rec = [&](auto&& self, std::size_t start, std::uint64_t m, int omega) -> void {
        if (omega >= spec.omega_cap) return;
        for (std::size_t i = start; i < ps.size(); ++i) {
            if (ps[i] > spec.value_cap / m) break;
            const std::uint64_t mm = m * ps[i];
            out[mm] = (omega + 1) % 2 ? -1.0 : 1.0;
            if (out.size() > spec.length_cap)
                throw ResourceError("mollifier: enumeration exceeded " + std::to_string(spec.length_cap) +
                                    " terms (count " + std::to_string(out.size()) + ")");
            self(self, i + 1, mm, omega + 1);
        }
    };
    rec(rec, 0, 1, 0);
    poly.coeffs = std::move(out);
    poly.length = poly.coeffs.rbegin()->first;
    return poly;
}

cplx evaluate(const DirichletPolynomial& poly, double tau)
{
    cplx s = 0;
    for (const auto& [n, a] : poly.coeffs) s += a * unit(phase_tlog(tau, n)) / std::sqrt(static_cast<double>(n));
    return s;
}

cplx evaluate_unweighted(const DirichletPolynomial& poly, double tau)
{
    cplx s = 0;
    for (const auto& [n, a] : poly.coeffs) s += a * unit(phase_tlog(tau, n));
    return s;
}

McReport mean_value_check(const DirichletPolynomial& poly, double T, std::size_t n_samples, std::uint64_t seed)
{
    check_poly_length(poly, T, "mean_value_check");
    const auto taus = sample_tau(T, n_samples, seed);
    std::vector<double> v(n_samples);
    parallel_for(n_samples, [&](std::size_t i) { v[i] = std::norm(evaluate_unweighted(poly, taus[i].t)); });
    Moments m;
    for (double x : v) m.add(x);
    McReport r;
    r.experiment = "mean_value";
    r.T = T;
    r.N = poly.length;
    for (const auto& [n, a] : poly.coeffs) r.reference += std::norm(a);
    r.estimate = m.mean;
    r.stderr_ = m.stderr_();
    r.ratio = r.reference > 0 ? r.estimate / r.reference : 1.0;
    r.ratio_stderr = r.reference > 0 ? r.stderr_ / r.reference : 0.0;
    r.n_samples = n_samples;
    r.seed = seed;
    if (static_cast<double>(poly.length) > T / 10) r.note = "N > T/10: O(N/T) term not small";
    return r;
}

McReport splitting_check(const DirichletPolynomial& A, const DirichletPolynomial& B, double T,
                         std::size_t n_samples, std::uint64_t seed)
{
    const double lim = std::pow(T, 0.25);
    if (static_cast<double>(A.length) > lim || static_cast<double>(B.length) > lim)
        throw DomainError("splitting_check: lengths must be <= T^(1/4)");
    if (max_prime_factor(A) >= min_prime_factor(B))
        throw DomainError("splitting_check: A must use primes below every prime of B");
    const auto taus = sample_tau(T, n_samples, seed);
    std::vector<double> x(n_samples), y(n_samples);
    parallel_for(n_samples, [&](std::size_t i) {
        x[i] = std::norm(evaluate_unweighted(A, taus[i].t));
        y[i] = std::norm(evaluate_unweighted(B, taus[i].t));
    });
    const double n = static_cast<double>(n_samples);
    double mx = 0, my = 0, mxy = 0;
    for (std::size_t i = 0; i < n_samples; ++i) {
        mx += x[i];
        my += y[i];
        mxy += x[i] * y[i];
    }
    mx /= n;
    my /= n;
    mxy /= n;
    // delta method for mxy / (mx my)
    double vxy = 0, vx = 0, vy = 0, cxyx = 0, cxyy = 0, cxy = 0;
    for (std::size_t i = 0; i < n_samples; ++i) {
        const double a = x[i] * y[i] - mxy, b = x[i] - mx, c = y[i] - my;
        vxy += a * a;
        vx += b * b;
        vy += c * c;
        cxyx += a * b;
        cxyy += a * c;
        cxy += b * c;
    }
    McReport r;
    r.experiment = "splitting";
    r.T = T;
    r.N = std::max(A.length, B.length);
    r.estimate = mxy;
    r.reference = mx * my;
    r.ratio = r.reference > 0 ? mxy / r.reference : 1.0;
    if (n_samples > 1 && mxy > 0 && mx > 0 && my > 0) {
        const double d = n - 1;
        double rel = vxy / d / (mxy * mxy) + vx / d / (mx * mx) + vy / d / (my * my) - 2 * cxyx / d / (mxy * mx) -
                     2 * cxyy / d / (mxy * my) + 2 * cxy / d / (mx * my);
        rel = std::max(rel, 0.0);
        r.ratio_stderr = r.ratio * std::sqrt(rel / n);
        r.stderr_ = std::sqrt(vxy / d / n);
    }
    r.n_samples = n_samples;
    r.seed = seed;
    return r;
}

MomentReport moment_bound_check(double j, double k, int q, double T, std::size_t n_samples, std::uint64_t seed,
                                MomentVariant variant)
{
    if (!(T > 16)) throw DomainError("moment_bound_check: T too small");
    const double t = std::log(std::log(T));
    if (!(j >= t / 2 && j < k)) throw DomainError("moment_bound_check: need t/2 <= j < k");
    if (q < 0) throw DomainError("moment_bound_check: q must be >= 0");
    if (!(2.0 * q <= std::exp(t - k))) throw DomainError("moment_bound_check: 2q exceeds e^(t-k)");
    MomentReport r;
    r.j = j;
    r.k = k;
    r.q = q;
    r.variant = variant;
    r.n_samples = n_samples;
    const bool cx = variant == MomentVariant::complex_;
    r.reference = cx ? factorial(q) * std::pow(k - j + 1, q)
                     : factorial(2 * q) / (std::pow(2.0, q) * factorial(q)) * std::pow((k - j) / 2, q);
    const PrimeBlock& blk = cached_block(PrimeRange{j, k});
    const auto taus = sample_tau(T, n_samples, seed);
    std::vector<double> d(n_samples);
    parallel_for(n_samples, [&](std::size_t i) {
        const auto [S, St] = blk.sums(taus[i].t, true);
        d[i] = cx ? std::abs(St) : std::fabs(S);
    });
    Moments m;
    double vmax = 0;
    for (double x : d) {
        m.add(std::pow(x, 2 * q));
        vmax = std::max(vmax, x);
    }
    r.estimate = m.mean;
    r.stderr_ = m.stderr_();
    r.ratio = r.estimate / r.reference;
    r.tail_q = static_cast<int>(std::ceil(vmax * vmax / (k - j + 1)));
    return r;
}

MollifierCheck mollifier_inequality_check(double tau, int ell, const LadderConfig& ladder, const PrimeBlock& block)
{
    if (ell < 0 || ell >= ladder.L_count) throw DomainError("mollifier_inequality_check: ell must lie in [0, L-1]");
    const double delta = ladder.delta(ell + 1);
    const int cap = static_cast<int>(std::floor(std::pow(delta, ladder.ledger.E_Omega)));
    const auto [dS, dSt] = block.sums(tau, true);
    MollifierCheck c;
    c.tau = tau;
    c.precondition = std::abs(dSt) <= ladder.ledger.increment_bound * delta;
    c.lhs = std::exp(-dS);
    c.rhs = (1 + std::exp(-ladder.points[ell])) * std::abs(block.mollifier(tau, cap)) +
            std::exp(-ladder.ledger.E_M * delta);
    c.holds = c.lhs <= c.rhs;
    return c;
}

MollifierCheck mollifier_inequality_check(double tau, int ell, const LadderConfig& ladder)
{
    if (ell < 0 || ell >= ladder.L_count) throw DomainError("mollifier_inequality_check: ell must lie in [0, L-1]");
    return mollifier_inequality_check(tau, ell, ladder, cached_block(ladder.range(ell + 1)));
}

bool well_factorable_check(const std::vector<DirichletPolynomial>& polys, const LadderConfig& ladder)
{
    if (static_cast<int>(polys.size()) > ladder.L_count) return false;
    const double coeff_cap = std::exp(std::exp(ladder.t) * ladder.ledger.coeff_cap_exponent);
    for (std::size_t i = 0; i < polys.size(); ++i) {
        const int lam = static_cast<int>(i) + 1;
        const PrimeRange r = ladder.range(lam);
        const double omega_cap = ladder.ledger.omega_q_factor * std::pow(ladder.delta(lam), ladder.ledger.E_Q);
        for (const auto& [n, a] : polys[i].coeffs) {
            if (std::abs(a) > coeff_cap) return false;
            int omega = 0;
            for (const auto& [p, e] : factorize(n)) {
                if (!r.contains(p)) return false;
                omega += e;
            }
            if (omega > omega_cap) return false;
        }
    }
    return true;
}

FourthMomentProbe twisted_fourth_moment_probe(const std::vector<DirichletPolynomial>& Q, int ell,
                                              const LadderConfig& ladder, double T, std::size_t n_samples,
                                              std::uint64_t seed)
{
    if (!well_factorable_check(Q, ladder)) throw DomainError("twisted_fourth_moment_probe: Q is not well factorable");
    if (ell < 0 || ell > ladder.L_count) throw DomainError("twisted_fourth_moment_probe: ell out of range");
    FourthMomentProbe r;
    r.level = std::min(ell + 1, ladder.L_count);
    r.n_samples = n_samples;
    std::vector<const PrimeBlock*> blocks;
    std::vector<int> caps;
    for (int l = 1; l <= r.level; ++l) {
        blocks.push_back(&cached_block(ladder.range(l)));
        caps.push_back(static_cast<int>(std::floor(std::pow(ladder.delta(l), ladder.ledger.E_Omega))));
    }
    const auto taus = sample_tau(T, n_samples, seed);
    std::vector<double> lhs(n_samples), q2(n_samples);
    parallel_for(n_samples, [&](std::size_t i) {
        const double tau = taus[i].t;
        const ZetaValue z = zeta_critical(taus[i]);
        cplx m = 1;
        for (std::size_t b = 0; b < blocks.size(); ++b) m *= blocks[b]->mollifier(tau, caps[b]);
        cplx qv = 1;
        for (const auto& poly : Q) qv *= evaluate(poly, tau);
        const double zm = std::norm(cplx(z.re, z.im) * m);
        q2[i] = std::norm(qv);
        lhs[i] = zm * zm * q2[i];
    });
    Moments a, b;
    for (std::size_t i = 0; i < n_samples; ++i) {
        a.add(lhs[i]);
        b.add(q2[i]);
    }
    const double f = std::exp(4 * (ladder.t - ladder.points[r.level]));
    r.lhs = a.mean;
    r.lhs_stderr = a.stderr_();
    r.rhs = f * b.mean;
    r.rhs_stderr = f * b.stderr_();
    r.ratio = r.rhs > 0 ? r.lhs / r.rhs : std::numeric_limits<double>::infinity();
    return r;
}

}  // namespace zld
