#include "zld/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>

#include "zld/errors.hpp"
#include "zld/model.hpp"
#include "zld/parallel.hpp"
#include "zld/rng.hpp"
#include "zld/zeta.hpp"

namespace zld {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

double mean_of(const std::vector<double>& v)
{
    return v.empty() ? kNaN : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stderr_of(const std::vector<double>& v)
{
    const std::size_t n = v.size();
    if (n < 2) return kNaN;
    const double m = mean_of(v);
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(n - 1) / static_cast<double>(n));
}

double median_of(std::vector<double> v)
{
    if (v.empty()) return kNaN;
    const std::size_t k = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
    const double hi = v[k];
    if (v.size() % 2) return hi;
    return 0.5 * (hi + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k)));
}

// 95% upper confidence bound for a proportion: exact when nothing was seen
double upper_95(std::size_t k, std::size_t n)
{
    const double dn = static_cast<double>(n);
    if (k == 0) return 1 - std::pow(0.05, 1 / dn);
    const double p = static_cast<double>(k) / dn;
    return std::min(1.0, p + 1.96 * std::sqrt(p * (1 - p) / dn));
}

double loglog(double T) { return std::log(std::log(T)); }

// trapezoid weights on the window grid, normalized to total mass 1
double trapz_weight(std::size_t i, std::size_t n) { return (i == 0 || i + 1 == n ? 0.5 : 1.0) / static_cast<double>(n - 1); }

}  // namespace

void Table::add(const std::vector<std::string>& row)
{
    if (row.size() != columns.size()) throw DomainError("Table::add: row width does not match the header");
    rows.push_back(row);
}

std::string Table::csv() const
{
    std::string out;
    auto line = [&](const std::vector<std::string>& r) {
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (i) out += ',';
            out += r[i];
        }
        out += '\n';
    };
    line(columns);
    for (const auto& r : rows) line(r);
    return out;
}

std::string fmt(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::string fmt(std::uint64_t x) { return std::to_string(x); }

SampleCache build_cache(double T, std::size_t n_samples, std::uint64_t seed)
{
    SampleCache c;
    c.T = T;
    c.seed = seed;
    const auto hs = sample_tau(T, n_samples, seed);
    c.tau.resize(n_samples);
    c.log_abs.resize(n_samples);
    c.near_zero.resize(n_samples);
    parallel_for(n_samples, [&](std::size_t i) {
        const LogAbs la = log_abs_zeta(hs[i]);
        c.tau[i] = hs[i].t;
        c.log_abs[i] = la.value;
        c.near_zero[i] = la.near_zero;
    });
    return c;
}

TailEstimate tail_at(const SampleCache& c, double V)
{
    TailEstimate e;
    e.V = V;
    e.n_samples = c.size();
    if (e.n_samples == 0) throw DomainError("tail_at: empty sample cache");
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (c.near_zero[i]) {
            ++e.n_near_zero;
            continue;
        }
        e.n_exceed += c.log_abs[i] > V;
    }
    const double n = static_cast<double>(e.n_samples);
    e.p_hat = static_cast<double>(e.n_exceed) / n;
    e.stderr_ = std::sqrt(e.p_hat * (1 - e.p_hat) / n);
    const double t = loglog(c.T);
    e.gaussian_ref = std::exp(-V * V / t) / std::sqrt(t);
    e.upper_bound = upper_95(e.n_exceed, e.n_samples);
    e.wide_interval = e.n_exceed == 0;
    e.ratio = e.wide_interval ? kNaN : e.p_hat / e.gaussian_ref;
    return e;
}

std::vector<TailEstimate> tail_experiment(const SampleCache& c, const std::vector<double>& alpha_grid)
{
    const double t = loglog(c.T);
    std::vector<TailEstimate> out;
    for (double a : alpha_grid) {
        if (!(a > 0 && a < 2)) throw DomainError("tail_experiment: alpha must lie in (0,2)");
        auto e = tail_at(c, a * t);
        e.alpha = a;
        out.push_back(e);
    }
    return out;
}

MomentEstimate fractional_moment(const SampleCache& c, double beta)
{
    if (!(beta > 0 && beta < 4)) throw DomainError("fractional_moment: beta must lie in (0,4)");
    if (c.size() == 0) throw DomainError("fractional_moment: empty sample cache");
    MomentEstimate m;
    m.beta = beta;
    m.n_samples = c.size();
    std::vector<double> v(c.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::exp(beta * c.log_abs[i]);
    m.M_hat = mean_of(v);
    m.stderr_ = stderr_of(v);
    m.ref = std::pow(std::log(c.T), beta * beta / 4);
    m.ratio = m.M_hat / m.ref;

    // beta int e^{beta V} S(V) dV with S the empirical tail, a step function between order statistics
    std::vector<double> x = c.log_abs;
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    auto piece = [&](double lo, double hi, double S, double& neg) {
        const double full = S * (std::exp(beta * hi) - (std::isinf(lo) ? 0.0 : std::exp(beta * lo)));
        const double nh = std::min(hi, 0.0);
        if (nh > lo) neg += S * (std::exp(beta * nh) - (std::isinf(lo) ? 0.0 : std::exp(beta * lo)));
        return full;
    };
    double acc = piece(-std::numeric_limits<double>::infinity(), x[0], 1.0, m.negative_part);
    for (std::size_t k = 1; k < x.size(); ++k)
        acc += piece(x[k - 1], x[k], (n - static_cast<double>(k)) / n, m.negative_part);
    m.layered = acc;
    m.layered_rel_diff = std::fabs(m.layered - m.M_hat) / m.M_hat;
    return m;
}

namespace {

AnchorReport power_anchor(const SampleCache& c, double power, double reference)
{
    AnchorReport r;
    r.T = c.T;
    r.n_samples = c.size();
    std::vector<double> v(c.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::exp(power * c.log_abs[i]);
    r.estimate = mean_of(v);
    r.stderr_ = stderr_of(v);
    r.reference = reference;
    r.ratio = r.estimate / reference;
    r.ratio_stderr = r.stderr_ / reference;
    return r;
}

}  // namespace

AnchorReport fourth_moment_anchor(const SampleCache& c)
{
    if (!(c.T >= 1e5)) throw DomainError("fourth_moment_anchor: T must be >= 1e5");
    const double L = std::log(c.T);
    return power_anchor(c, 4, L * L * L * L / (2 * kPi * kPi));
}

AnchorReport second_moment_anchor(const SampleCache& c) { return power_anchor(c, 2, std::log(c.T)); }

KsReport selberg_ks(const SampleCache& c)
{
    if (c.size() == 0) throw DomainError("selberg_ks: empty sample cache");
    KsReport r;
    r.T = c.T;
    r.n_samples = c.size();
    r.scale = std::sqrt(loglog(c.T) / 2);
    std::vector<double> z(c.log_abs);
    for (double& v : z) v /= r.scale;
    std::sort(z.begin(), z.end());
    const double n = static_cast<double>(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double F = 0.5 * std::erfc(-z[i] / std::sqrt(2.0));
        r.distance = std::max({r.distance, (static_cast<double>(i) + 1) / n - F, F - static_cast<double>(i) / n});
    }
    return r;
}

WindowSet sample_windows(double T, double theta, std::size_t n_windows, std::uint64_t seed, double spacing_factor)
{
    if (!(theta >= 0 && theta < 3)) throw DomainError("sample_windows: theta must lie in [0,3)");
    if (!(spacing_factor > 0 && spacing_factor <= 1))
        throw DomainError("sample_windows: grid spacing must be at most 1/log T");
    WindowSet w;
    w.T = T;
    w.theta = theta;
    w.seed = seed;
    w.half_width = std::pow(std::log(T), theta);
    const auto K = static_cast<std::size_t>(std::ceil(w.half_width * std::log(T) / spacing_factor));
    w.h = w.half_width / static_cast<double>(K);  // spacing <= spacing_factor / log T, endpoints on the grid
    const auto hs = sample_tau(T, n_windows, seed);
    w.centers.resize(n_windows);
    w.log_abs.assign(n_windows, std::vector<double>(2 * K + 1));
    parallel_for(n_windows, [&](std::size_t i) {
        w.centers[i] = hs[i].t;
        for (std::size_t k = 0; k <= 2 * K; ++k) {
            const double tt = hs[i].t + (static_cast<double>(k) - static_cast<double>(K)) * w.h;
            w.log_abs[i][k] = log_abs_zeta(Height{tt}).value;
        }
    });
    return w;
}

double window_moment(const std::vector<double>& log_abs, double beta)
{
    const std::size_t n = log_abs.size();
    if (n < 2) throw DomainError("window_moment: need at least two grid points");
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += trapz_weight(i, n) * std::exp(beta * log_abs[i]);
    return s;
}

double window_level(const std::vector<double>& log_abs, double V)
{
    const std::size_t n = log_abs.size();
    if (n < 2) throw DomainError("window_level: need at least two grid points");
    double s = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (log_abs[i] > V) s += trapz_weight(i, n);
    return s;
}

double beta_c(double theta) { return 2 * std::sqrt(1 + theta); }

double max_level(double t, double theta)
{
    const double r = std::sqrt(1 + theta);
    return r * t - std::log(t) / (4 * r);
}

ShortIntervalResult short_interval_max(const WindowSet& w, const std::vector<double>& y_grid)
{
    if (w.log_abs.empty()) throw DomainError("short_interval_max: no windows");
    ShortIntervalResult r;
    r.theta = w.theta;
    r.beta_c = beta_c(w.theta);
    const double t = loglog(w.T);
    r.m_t = max_level(t, w.theta);
    for (const auto& v : w.log_abs) r.per_window.push_back(*std::max_element(v.begin(), v.end()));
    const double n = static_cast<double>(r.per_window.size());
    const double root = std::sqrt(1 + w.theta);
    for (double y : y_grid) {
        MaxRow row;
        row.y = y;
        row.bound_log = r.m_t + y;
        double k = 0;
        for (double m : r.per_window) k += m > row.bound_log;
        row.freq = k / n;
        row.stderr_ = std::sqrt(row.freq * (1 - row.freq) / n);
        row.reference = std::exp(-2 * root * y - y * y / t);
        row.ratio = row.freq / row.reference;
        r.rows.push_back(row);
    }
    for (double V = -3; V <= r.m_t + 3 + 1e-9; V += 0.25) {
        double s = 0;
        for (const auto& v : w.log_abs) s += window_level(v, V);
        r.level_V.push_back(V);
        r.level_S.push_back(s / n);
    }
    return r;
}

ShortMomentsReport short_interval_moments(const WindowSet& w, const std::vector<double>& beta_grid,
                                          const std::vector<double>& A_grid)
{
    if (w.log_abs.empty()) throw DomainError("short_interval_moments: no windows");
    ShortMomentsReport out;
    const double t = loglog(w.T);
    const double bc = beta_c(w.theta);
    const double n = static_cast<double>(w.log_abs.size());
    for (double beta : beta_grid) {
        if (!(beta >= 0)) throw DomainError("short_interval_moments: beta must be >= 0");
        ShortIntervalResult r;
        r.theta = w.theta;
        r.beta = beta;
        r.beta_c = bc;
        r.m_t = max_level(t, w.theta);
        for (const auto& v : w.log_abs) r.per_window.push_back(window_moment(v, beta));
        for (double A : A_grid) {
            ThresholdRow row;
            row.beta = beta;
            row.A = A;
            // e^{theta t} = (log T)^theta
            row.threshold = A * std::exp((beta * beta / 4 + w.theta) * t) / (2 * std::exp(w.theta * t));
            double k = 0;
            for (double z : r.per_window) k += z > row.threshold;
            row.freq = k / n;
            row.stderr_ = std::sqrt(row.freq * (1 - row.freq) / n);
            row.reference = 1 / A;
            out.thresholds.push_back(row);
        }
        if (beta > bc) {
            SuperRow s;
            s.beta = beta;
            s.mean_Z = mean_of(r.per_window);
            s.stderr_ = stderr_of(r.per_window);
            s.median_Z = median_of(r.per_window);
            s.reference = std::pow(t, -beta / (2 * bc)) * std::exp((bc * beta / 2 - 1) * t) / (2 * std::exp(w.theta * t));
            s.ratio = s.median_Z / s.reference;
            out.super.push_back(s);
        }
        out.per_beta.push_back(std::move(r));
    }
    return out;
}

std::vector<WeightRow> subcritical_weights(double beta, double t, double theta, double A)
{
    const double st = std::sqrt(t), peak = beta * t / 2;
    const double hi = max_level(t, theta) + A;
    std::vector<double> V;
    for (double k = std::ceil(beta * t / 8 / st); k * st <= hi; k += 1) V.push_back(k * st);
    if (V.empty()) return {};
    V.insert(V.begin(), V.front() - st);
    V.push_back(V.back() + st);
    std::vector<WeightRow> out;
    for (std::size_t j = 0; j + 1 < V.size(); ++j) {
        double a;
        if (V[j] > peak)
            a = std::pow(beta / 2 * st - V[j] / st, 2) + 0.01;
        else if (V[j + 1] <= peak)
            a = std::pow(beta / 2 * st - V[j + 1] / st, 2) + 0.01;
        else
            a = 0.01;
        out.push_back({static_cast<int>(j), V[j], A * a});
    }
    return out;
}

std::vector<WeightRow> supercritical_weights(double beta, double t, double theta, double A)
{
    (void)beta;  // the recipe depends on beta only through the range of V
    const double m = max_level(t, theta);
    const double hi = m + A;
    std::vector<double> V;
    for (double k = std::ceil(beta_c(theta) * t / 4); k <= hi; k += 1) V.push_back(k);
    if (V.empty()) return {};
    V.insert(V.begin(), V.front() - 1);
    V.push_back(V.back() + 1);
    std::vector<WeightRow> out;
    for (std::size_t j = 0; j + 1 < V.size(); ++j) {
        const double y0 = V[j] - m, y1 = V[j + 1] - m;
        double a;
        if (y0 > 0)
            a = A * (1 + y0 * y0);
        else if (y1 < 0)
            a = A * (1 + y1 * y1);
        else
            a = A;
        out.push_back({static_cast<int>(j), V[j], a});
    }
    return out;
}

FreezingFit freezing_fit(const WindowSet& w, double beta_lo, double beta_hi, double step)
{
    if (w.log_abs.empty()) throw DomainError("freezing_fit: no windows");
    if (!(beta_lo >= 0 && beta_hi > beta_lo && step > 0)) throw DomainError("freezing_fit: bad beta range");
    FreezingFit f;
    f.theta = w.theta;
    f.t = loglog(w.T);
    f.beta_c = beta_c(w.theta);
    const double n = static_cast<double>(w.log_abs.size());
    const int nb = static_cast<int>(std::floor((beta_hi - beta_lo) / step + 1e-9)) + 1;
    for (int i = 0; i < nb; ++i) {
        const double beta = beta_lo + i * step;
        double fe = 0, sl = 0;
        for (const auto& v : w.log_abs) {
            // Gibbs weights relative to the window maximum, so large beta cannot overflow
            const double mx = *std::max_element(v.begin(), v.end());
            double z = 0, zx = 0;
            for (std::size_t k = 0; k < v.size(); ++k) {
                const double e = trapz_weight(k, v.size()) * std::exp(beta * (v[k] - mx));
                z += e;
                zx += e * v[k];
            }
            fe += beta * mx + std::log(z);
            sl += zx / z;
        }
        f.beta.push_back(beta);
        f.free_energy.push_back(fe / n / f.t);
        f.slope.push_back(sl / n / f.t);
    }
    // s(beta) = s0 + k min(beta - b, 0): least squares in (s0, k) for each hinge b
    f.sse = std::numeric_limits<double>::infinity();
    const double margin = 0.25 * (beta_hi - beta_lo) / 4;
    for (double b = beta_lo + margin; b <= beta_hi - margin + 1e-12; b += 0.01) {
        double S1 = 0, Sx = 0, Sxx = 0, Sy = 0, Sxy = 0;
        for (std::size_t i = 0; i < f.beta.size(); ++i) {
            const double x = std::min(f.beta[i] - b, 0.0), y = f.slope[i];
            S1 += 1;
            Sx += x;
            Sxx += x * x;
            Sy += y;
            Sxy += x * y;
        }
        const double det = S1 * Sxx - Sx * Sx;
        if (!(det > 0)) continue;
        const double k = (S1 * Sxy - Sx * Sy) / det;
        const double s0 = (Sy - k * Sx) / S1;
        double sse = 0;
        for (std::size_t i = 0; i < f.beta.size(); ++i) {
            const double r = f.slope[i] - s0 - k * std::min(f.beta[i] - b, 0.0);
            sse += r * r;
        }
        if (sse < f.sse) {
            f.sse = sse;
            f.break_beta = b;
            f.frozen_slope = s0;
        }
    }
    f.rel_error = std::fabs(f.break_beta - f.beta_c) / f.beta_c;
    return f;
}

CriticalReport critical_check(const WindowSet& w, const std::vector<double>& y_grid)
{
    if (w.theta != 0) throw DomainError("critical_check: needs theta = 0 windows");
    if (w.log_abs.empty()) throw DomainError("critical_check: no windows");
    CriticalReport r;
    r.T = w.T;
    r.t = loglog(w.T);
    r.m_t = r.t - 0.75 * std::log(r.t);
    r.n_windows = w.log_abs.size();
    for (double y : y_grid) {
        std::vector<double> s;
        for (const auto& v : w.log_abs) s.push_back(window_level(v, r.m_t + y));
        CriticalRow row;
        row.y = y;
        row.S = mean_of(s);
        row.stderr_ = stderr_of(s);
        row.shape = std::exp(-r.t) * std::fabs(y) * std::exp(-2 * y) * std::exp(-y * y / (2 * r.t));
        row.ratio = row.S / row.shape;
        r.rows.push_back(row);
    }
    std::vector<double> z;
    for (const auto& v : w.log_abs) z.push_back(window_moment(v, 2));
    r.z2 = mean_of(z);
    r.z2_stderr = stderr_of(z);
    r.z2_scaled = r.z2 * std::sqrt(r.t) / std::exp(r.t);
    return r;
}

InclusionReport inclusion_check(const LadderConfig& ladder, std::size_t n_accept, std::uint64_t seed)
{
    const int L = ladder.L_count;
    if (L < 1) throw ConfigError("inclusion_check: ladder has no levels");
    const auto bp = barrier_params(ladder);
    std::vector<PrimeBlock> blocks;
    for (int l = 1; l <= L; ++l) blocks.emplace_back(ladder.range(l));
    std::map<double, TupleSet> sets;
    InclusionReport r;
    const std::size_t max_attempts = 100 * n_accept + 1000;
    std::vector<double> Y(L);
    for (std::size_t i = 0; i < max_attempts && r.accepted < n_accept; ++i) {
        ++r.attempted;
        const PhaseAssignment a{substream(seed, i)};
        double S = 0;
        for (int l = 0; l < L; ++l) {
            Y[l] = sample_Y(blocks[l], a);
            S += Y[l];
        }
        // condition on S in (w, w+1] with w on a quarter grid inside the barriers
        const double w = std::clamp(std::floor(4 * S) / 4 - 0.5, bp.L[L], bp.U[L]);
        if (!corridor_event(Y, w, bp)) continue;
        ++r.accepted;
        auto it = sets.find(w);
        if (it == sets.end()) it = sets.emplace(w, tuple_set(L, w, ladder, bp)).first;
        if (!it->second.contains_cell_of(Y)) ++r.violations;
    }
    return r;
}

PipelineReport event_pipeline(double T, double alpha, std::size_t n_samples, std::uint64_t seed,
                              const ConstantsLedger& ledger)
{
    const LadderConfig lad = build_ladder(T, alpha, 0, ledger);
    const BarrierParams bp = barrier_params(lad);
    const int L = lad.L_count;
    std::vector<PrimeBlock> blocks;
    std::vector<int> caps;
    for (int l = 1; l <= L; ++l) {
        blocks.emplace_back(lad.range(l));
        caps.push_back(static_cast<int>(std::floor(std::pow(lad.delta(l), ledger.E_Omega))));
    }
    const auto hs = sample_tau(T, n_samples, seed);
    std::vector<EventTrace> traces(n_samples);
    parallel_for(n_samples, [&](std::size_t i) {
        TraceInput in;
        in.tau = hs[i].t;
        const LogAbs la = log_abs_zeta(hs[i]);
        in.log_abs_zeta = la.value;
        in.zeta_abs = std::exp(la.raw);
        double S = 0, M = 1;
        for (int l = 0; l < L; ++l) {
            const auto [dS, dSt] = blocks[l].sums(in.tau, true);
            S += dS;
            M *= std::abs(blocks[l].mollifier(in.tau, caps[l]));
            in.levels.push_back({S, std::abs(dSt), M});
        }
        traces[i] = classify(in, lad, bp);
    });
    PipelineReport r;
    r.T = T;
    r.alpha = alpha;
    r.V = lad.V;
    r.t = lad.t;
    r.L = L;
    r.n_samples = n_samples;
    r.partition = decompose(traces, L);
    if (r.partition.sum() != r.partition.count_H) throw ConsistencyError("event_pipeline: partition identity failed");
    const double shape = std::exp(-lad.V * lad.V / lad.t) / std::sqrt(lad.t);
    auto add = [&](const std::string& name, std::size_t k, int level) {
        r.piece.push_back(name);
        r.count.push_back(k);
        r.prob.push_back(static_cast<double>(k) / static_cast<double>(n_samples));
        r.upper_bound.push_back(upper_95(k, n_samples));
        r.shape.push_back(shape);
        r.log_l.push_back(lad.logs[static_cast<std::size_t>(level)]);
    };
    add("H_not_G1", r.partition.not_G1, 0);
    for (int l = 1; l < L; ++l) add("H_G" + std::to_string(l) + "_not_G" + std::to_string(l + 1), r.partition.between[l - 1], l);
    add("H_G" + std::to_string(L), r.partition.last, L);
    add("H_total", r.partition.count_H, 0);
    const auto inc = inclusion_check(lad, std::min<std::size_t>(n_samples, 10000), substream(seed, 0x1c));
    r.inclusion_samples = inc.accepted;
    r.inclusion_violations = inc.violations;
    return r;
}

MollifierSweep mollifier_sweep(double T, std::size_t n_samples, std::uint64_t seed, const ConstantsLedger& ledger)
{
    const LadderConfig lad = build_ladder(T, 1.0, 0, ledger);
    std::vector<PrimeBlock> blocks;
    for (int l = 1; l <= lad.L_count; ++l) blocks.emplace_back(lad.range(l));
    const auto hs = sample_tau(T, n_samples, seed);
    std::vector<std::vector<MollifierCheck>> res(n_samples);
    parallel_for(n_samples, [&](std::size_t i) {
        for (int ell = 0; ell < lad.L_count; ++ell)
            res[i].push_back(mollifier_inequality_check(hs[i].t, ell, lad, blocks[static_cast<std::size_t>(ell)]));
    });
    MollifierSweep s;
    s.n_samples = n_samples;
    for (const auto& v : res)
        for (const auto& c : v) {
            if (!c.precondition) continue;
            ++s.n_precondition;
            if (c.holds)
                ++s.n_holds;
            else if (s.violations.size() < 1000)
                s.violations.push_back(c);
        }
    s.fraction = s.n_precondition ? static_cast<double>(s.n_holds) / static_cast<double>(s.n_precondition) : kNaN;
    return s;
}

}  // namespace zld
