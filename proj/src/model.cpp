#include "zld/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "zld/errors.hpp"
#include "zld/parallel.hpp"
#include "zld/phase.hpp"
#include "zld/rng.hpp"

namespace zld {

namespace {

constexpr int kQuadPoints = 96;

double f_p(double c, double isq) { return c * isq + 0.5 * c * c * isq * isq; }

double factorial(int n)
{
    double f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

// log E exp(lambda f_p(theta)) and the tilted mean of f_p, trapezoid rule in theta
std::pair<double, double> tilt_moments(double isq, double lambda)
{
    const double shift = lambda >= 0 ? lambda * f_p(1, isq) : lambda * f_p(-1, isq);
    double z = 0, zf = 0;
    for (int k = 0; k < kQuadPoints; ++k) {
        const double c = std::cos(kTwoPi * k / kQuadPoints);
        const double f = f_p(c, isq);
        const double e = std::exp(lambda * f - shift);
        z += e;
        zf += e * f;
    }
    return {shift + std::log(z / kQuadPoints), zf / z};
}

}  // namespace

double PhaseAssignment::theta(std::uint64_t p) const { return kTwoPi * u01(seed, p); }

double PhaseAssignment::cos_theta(std::uint64_t p) const { return cos_2pi(u01(seed, p)); }

double sample_Y(const PrimeBlock& block, const PhaseAssignment& a)
{
    double y = 0;
    for (std::size_t i = 0; i < block.p.size(); ++i) y += f_p(a.cos_theta(block.p[i]), block.inv_sqrt[i]);
    return y;
}

double sample_Y(int j, const LadderConfig& ladder, const PhaseAssignment& a)
{
    return sample_Y(PrimeBlock(ladder.range(j)), a);
}

std::complex<double> sample_Zn(std::uint64_t n, const PhaseAssignment& a)
{
    if (n == 0) throw DomainError("sample_Zn: n must be >= 1");
    double ang = 0;
    for (const auto& [p, e] : factorize(n)) ang += e * a.theta(p);
    return std::polar(1.0, ang);
}

std::vector<double> sample_block(const PrimeBlock& block, std::size_t n, std::uint64_t seed)
{
    std::vector<double> out(n);
    parallel_for(n, [&](std::size_t i) { out[i] = sample_Y(block, PhaseAssignment{substream(seed, i)}); });
    return out;
}

double GaussianSurrogate::cdf(double x) const
{
    if (x == std::numeric_limits<double>::infinity()) return 1;
    if (x == -std::numeric_limits<double>::infinity()) return 0;
    return 0.5 * std::erfc(-(x - mean) / std::sqrt(2 * variance));
}

GaussianSurrogate surrogate(const PrimeBlock& block)
{
    GaussianSurrogate g;
    for (double s : block.inv_sqrt) {
        const double ip = s * s;
        g.mean += 0.25 * ip;
        g.variance += 0.5 * ip + ip * ip / 32;
    }
    return g;
}

MgfReport mgf_check(const PrimeBlock& block, double delta, double lambda, std::size_t n_samples, std::uint64_t seed)
{
    if (!std::isfinite(lambda)) throw DomainError("mgf_check: lambda must be finite");
    const auto y = sample_block(block, n_samples, seed);
    MgfReport r;
    r.lambda = lambda;
    r.n_samples = n_samples;
    double s = 0, s2 = 0;
    for (double v : y) {
        const double e = std::exp(lambda * v);
        s += e;
        s2 += e * e;
    }
    const double n = static_cast<double>(n_samples);
    r.estimate = s / n;
    r.stderr_ = n > 1 ? std::sqrt(std::max(0.0, s2 / n - r.estimate * r.estimate) / (n - 1)) : 0;
    r.bound = std::exp(lambda * lambda * delta / 4);
    r.ratio = r.estimate / r.bound;
    return r;
}

MgfReport mgf_check(int j, double lambda, const LadderConfig& ladder, std::size_t n_samples, std::uint64_t seed)
{
    if (!(std::fabs(lambda) < std::exp(std::exp(ladder.points.at(j)) / 2)))
        throw DomainError("mgf_check: |lambda| must be below exp(e^{t_j}/2)");
    return mgf_check(PrimeBlock(ladder.range(j)), ladder.delta(j), lambda, n_samples, seed);
}

double interval_discrepancy(const std::vector<double>& sorted, const GaussianSurrogate& g, double a, double b)
{
    if (!(a < b)) return 0;
    const double n = static_cast<double>(sorted.size());
    auto F = [&](double x) {
        return static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), x) - sorted.begin()) / n;
    };
    return (F(b) - F(a)) - (g.cdf(b) - g.cdf(a));
}

BerryEsseenReport berry_esseen_distance(std::vector<double> samples, const GaussianSurrogate& g,
                                        const std::vector<double>& grid)
{
    std::sort(samples.begin(), samples.end());
    BerryEsseenReport r;
    r.n_samples = samples.size();
    const double inf = std::numeric_limits<double>::infinity();
    double dmax = 0, dmin = 0, xmax = -inf, xmin = -inf;
    for (double x : grid) {
        const double d = interval_discrepancy(samples, g, -inf, x);
        if (d > dmax) dmax = d, xmax = x;
        if (d < dmin) dmin = d, xmin = x;
    }
    r.distance = dmax - dmin;
    r.worst_lo = std::min(xmax, xmin);
    r.worst_hi = std::max(xmax, xmin);
    if (r.worst_lo == r.worst_hi) r.worst_hi = inf;
    const double n = static_cast<double>(samples.size());
    const auto lo = std::upper_bound(samples.begin(), samples.end(), r.worst_lo);
    const auto hi = std::upper_bound(samples.begin(), samples.end(), r.worst_hi);
    const double p = static_cast<double>(hi - lo) / n;
    r.stderr_ = std::sqrt(p * (1 - p) / n);
    return r;
}

BerryEsseenReport berry_esseen_distance(int j, const LadderConfig& ladder, const std::vector<double>& grid,
                                        std::size_t n_samples, std::uint64_t seed)
{
    const PrimeBlock b(ladder.range(j));
    const auto g = surrogate(b);
    std::vector<double> gr = grid;
    if (gr.empty()) {
        const double s = std::sqrt(g.variance);
        for (int i = -80; i <= 80; ++i) gr.push_back(g.mean + s * i / 20.0);
    }
    auto r = berry_esseen_distance(sample_block(b, n_samples, seed), g, gr);
    r.saddle_regime = j == 1;
    return r;
}

SaddleReport saddle_density_check(double v, double Delta, const std::vector<double>& samples, double center, double r)
{
    if (!(Delta >= 1)) throw DomainError("saddle_density_check: Delta must be >= 1");
    if (!(r > 0)) throw DomainError("saddle_density_check: r must be positive");
    if (!(std::fabs(v) <= 100 * r)) throw DomainError("saddle_density_check: |v| exceeds 100 r");
    SaddleReport s;
    s.v = v;
    s.Delta = Delta;
    s.r = r;
    s.n_samples = samples.size();
    const double lo = center + v, hi = lo + 1 / Delta;
    for (double y : samples) s.hits += (y >= lo && y <= hi);
    const double n = static_cast<double>(samples.size());
    s.estimate = static_cast<double>(s.hits) / n;
    s.stderr_ = std::sqrt(s.estimate * (1 - s.estimate) / n);
    s.reference = std::exp(-v * v / r) / (Delta * std::sqrt(r));
    s.ratio = s.estimate / s.reference;
    return s;
}

SaddleReport saddle_density_check(double v, double Delta, const LadderConfig& ladder, std::size_t n_samples,
                                  std::uint64_t seed)
{
    const PrimeBlock b(ladder.range(1));
    return saddle_density_check(v, Delta, sample_block(b, n_samples, seed), surrogate(b).mean, ladder.points[1]);
}

std::vector<MomentMatch> gaussian_moments(const std::vector<double>& samples, double variance, int q_max,
                                          double center)
{
    std::vector<MomentMatch> out;
    const double n = static_cast<double>(samples.size());
    for (int q = 1; q <= q_max; ++q) {
        double s = 0, s2 = 0;
        for (double y : samples) {
            const double x = std::pow(y - center, 2 * q);
            s += x;
            s2 += x * x;
        }
        MomentMatch m;
        m.q = q;
        m.estimate = s / n;
        m.stderr_ = n > 1 ? std::sqrt(std::max(0.0, s2 / n - m.estimate * m.estimate) / (n - 1)) : 0;
        m.reference = factorial(2 * q) / (std::pow(2.0, q) * factorial(q)) * std::pow(variance, q);
        m.ratio = m.estimate / m.reference;
        out.push_back(m);
    }
    return out;
}

double TiltedSamples::weighted_mean(const std::vector<double>& f) const
{
    double s = 0;
    for (std::size_t i = 0; i < f.size(); ++i) s += weights[i] * f[i];
    return f.empty() ? 0 : s / static_cast<double>(f.size());
}

double TiltedSamples::ess_for(const std::vector<double>& f) const
{
    double s = 0, s2 = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double x = weights[i] * f[i];
        s += x;
        s2 += x * x;
    }
    return s2 > 0 ? s * s / s2 : 0;
}

TiltedSamples tilted_sampler(const PrimeBlock& block, double lambda, std::size_t n_samples, std::uint64_t seed)
{
    if (!std::isfinite(lambda)) throw DomainError("tilted_sampler: lambda must be finite");
    TiltedSamples ts;
    ts.lambda = lambda;
    std::vector<double> fmax(block.p.size());
    for (std::size_t k = 0; k < block.p.size(); ++k) {
        ts.log_norm += tilt_moments(block.inv_sqrt[k], lambda).first;
        fmax[k] = lambda >= 0 ? lambda * f_p(1, block.inv_sqrt[k]) : lambda * f_p(-1, block.inv_sqrt[k]);
    }
    ts.values.assign(n_samples, 0);
    ts.weights.assign(n_samples, 0);
    std::vector<char> overflow(n_samples, 0);
    parallel_for(n_samples, [&](std::size_t i) {
        const std::uint64_t s = substream(seed, i);
        double y = 0;
        for (std::size_t k = 0; k < block.p.size(); ++k) {
            const std::uint64_t ps = hash2(s, block.p[k]);
            double f = 0;
            for (std::uint64_t trial = 0;; ++trial) {
                if (trial > 10000000) throw ResourceError("tilted_sampler: acceptance rate too low");
                f = f_p(cos_2pi(u01(ps, 2 * trial)), block.inv_sqrt[k]);
                if (u01(ps, 2 * trial + 1) < std::exp(lambda * f - fmax[k])) break;
            }
            y += f;
        }
        ts.values[i] = y;
        ts.weights[i] = std::exp(ts.log_norm - lambda * y);
        overflow[i] = !std::isfinite(ts.weights[i]);
    });
    if (std::any_of(overflow.begin(), overflow.end(), [](char c) { return c != 0; }))
        throw ResourceError("tilted_sampler: likelihood weight overflow; resample with smaller |lambda|");
    double sw = 0, sw2 = 0;
    for (double w : ts.weights) {
        sw += w;
        sw2 += w * w;
    }
    ts.ess = sw2 > 0 ? sw * sw / sw2 : 0;
    return ts;
}

double mean_matching_lambda(const PrimeBlock& block, double target)
{
    auto mean = [&](double lam) {
        double m = 0;
        for (double s : block.inv_sqrt) m += tilt_moments(s, lam).second;
        return m;
    };
    double lo = -1, hi = 1;
    while (mean(lo) > target) {
        lo *= 2;
        if (lo < -1e6) throw DomainError("mean_matching_lambda: target below the attainable range");
    }
    while (mean(hi) < target) {
        hi *= 2;
        if (hi > 1e6) throw DomainError("mean_matching_lambda: target above the attainable range");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, std::fabs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        (mean(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace zld
