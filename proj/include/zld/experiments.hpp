#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "zld/dirichlet.hpp"
#include "zld/ladder.hpp"
#include "zld/ledger.hpp"

namespace zld {

// Columnar result: every experiment renders to one of these, the cli writes it as CSV.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    void add(const std::vector<std::string>& row);
    std::string csv() const;  // header row, LF endings, %.12g numbers
};

std::string fmt(double x);  // %.12g
std::string fmt(std::uint64_t x);

// log|zeta(1/2 + i tau)| at uniform tau in [T, 2T], computed once and shared
struct SampleCache {
    double T = 0;
    std::uint64_t seed = 0;
    std::vector<double> tau;
    std::vector<double> log_abs;  // clamped at the evaluation error floor near zeros
    std::vector<char> near_zero;
    std::size_t size() const { return tau.size(); }
};

SampleCache build_cache(double T, std::size_t n_samples, std::uint64_t seed);

struct TailEstimate {
    double alpha = 0, V = 0;
    std::size_t n_samples = 0, n_exceed = 0, n_near_zero = 0;
    double p_hat = 0, stderr_ = 0;
    double gaussian_ref = 0;  // e^{-V^2/t}/sqrt(t)
    double ratio = 0;         // NaN when nothing exceeds
    bool wide_interval = false;
    double upper_bound = 0;   // 95% upper confidence bound on p
};

TailEstimate tail_at(const SampleCache& c, double V);
std::vector<TailEstimate> tail_experiment(const SampleCache& c, const std::vector<double>& alpha_grid);

struct MomentEstimate {
    double beta = 0;
    double M_hat = 0, stderr_ = 0;
    double ref = 0;  // (log T)^{beta^2/4}
    double ratio = 0;
    double layered = 0;        // beta int e^{beta V} S(V) dV over the empirical tail
    double layered_rel_diff = 0;
    double negative_part = 0;  // contribution of V < 0 to the layered integral
    std::size_t n_samples = 0;
};

MomentEstimate fractional_moment(const SampleCache& c, double beta);

struct AnchorReport {
    double T = 0;
    double estimate = 0, stderr_ = 0;
    double reference = 0;
    double ratio = 0, ratio_stderr = 0;
    std::size_t n_samples = 0;
};

// (1/T) int |zeta|^4 against (log T)^4 / (2 pi^2)
AnchorReport fourth_moment_anchor(const SampleCache& c);
// (1/T) int |zeta|^2 against log T
AnchorReport second_moment_anchor(const SampleCache& c);

struct KsReport {
    double T = 0;
    double distance = 0;
    double scale = 0;  // sqrt(log log T / 2)
    std::size_t n_samples = 0;
};

// Kolmogorov-Smirnov distance of log|zeta| / sqrt(log log T / 2) to N(0,1)
KsReport selberg_ks(const SampleCache& c);

// log|zeta| on a grid of spacing spacing_factor / log T over |h| <= (log T)^theta
struct WindowSet {
    double T = 0, theta = 0;
    double h = 0;          // grid step
    double half_width = 0; // (log T)^theta
    std::uint64_t seed = 0;
    std::vector<double> centers;
    std::vector<std::vector<double>> log_abs;  // per window, grid values
};

WindowSet sample_windows(double T, double theta, std::size_t n_windows, std::uint64_t seed,
                         double spacing_factor = 1.0);

// normalized window integral of |zeta|^beta by the trapezoid rule; exactly 1 at beta = 0
double window_moment(const std::vector<double>& log_abs, double beta);
// normalized measure of {log|zeta| > V} on the window grid
double window_level(const std::vector<double>& log_abs, double V);

struct MaxRow {
    double y = 0;
    double bound_log = 0;  // log of e^y (log T)^{sqrt(1+theta)} / (log log T)^{1/(4 sqrt(1+theta))}
    double freq = 0, stderr_ = 0;
    double reference = 0;  // e^{-2 sqrt(1+theta) y} e^{-y^2/t}
    double ratio = 0;
};

struct ShortIntervalResult {
    double theta = 0;
    double beta = -1;  // negative: a max result
    double m_t = 0;
    double beta_c = 0;
    std::vector<double> per_window;  // log max |zeta|, or Z_beta
    std::vector<double> level_V, level_S;  // mean S(V) over windows
    std::vector<MaxRow> rows;
};

double beta_c(double theta);
// sqrt(1+theta) t - log t / (4 sqrt(1+theta))
double max_level(double t, double theta);

ShortIntervalResult short_interval_max(const WindowSet& w, const std::vector<double>& y_grid);

struct ThresholdRow {
    double beta = 0, A = 0;
    double threshold = 0;  // A (log T)^{beta^2/4 + theta} / (2 e^{theta t})
    double freq = 0, stderr_ = 0;
    double reference = 0;  // 1/A
};

struct SuperRow {
    double beta = 0;
    double mean_Z = 0, median_Z = 0, stderr_ = 0;
    double reference = 0;  // (log log T)^{-beta/(2 beta_c)} (log T)^{beta_c beta/2 - 1} / (2 e^{theta t})
    double ratio = 0;      // median over reference
};

struct ShortMomentsReport {
    std::vector<ShortIntervalResult> per_beta;
    std::vector<ThresholdRow> thresholds;
    std::vector<SuperRow> super;
};

ShortMomentsReport short_interval_moments(const WindowSet& w, const std::vector<double>& beta_grid,
                                          const std::vector<double>& A_grid);

// weights a_j of the level decomposition, on V_j in sqrt(t) Z (sub) or Z (super)
struct WeightRow {
    int j = 0;
    double V = 0, a = 0;
};
std::vector<WeightRow> subcritical_weights(double beta, double t, double theta, double A);
std::vector<WeightRow> supercritical_weights(double beta, double t, double theta, double A);

struct FreezingFit {
    double theta = 0, t = 0;
    std::vector<double> beta;
    std::vector<double> free_energy;  // mean over windows of log Z_beta / t
    std::vector<double> slope;        // mean Gibbs average of log|zeta| / t, the derivative of the above
    double break_beta = 0;            // hinge of the best continuous fit: linear rise, then flat
    double beta_c = 0;
    double rel_error = 0;
    double frozen_slope = 0;
    double sse = 0;
};

// slope break of the window free energy on beta in [beta_lo, beta_hi]
FreezingFit freezing_fit(const WindowSet& w, double beta_lo = 1, double beta_hi = 5, double step = 0.05);

struct CriticalRow {
    double y = 0;
    double S = 0, stderr_ = 0;
    double shape = 0;  // e^{-t} |y| e^{-2y} e^{-y^2/(2t)}
    double ratio = 0;
};

struct CriticalReport {
    double T = 0, t = 0, m_t = 0;
    std::vector<CriticalRow> rows;
    double z2 = 0, z2_stderr = 0;   // mean over windows of Z_2
    double z2_scaled = 0;           // Z_2 sqrt(t) / e^t
    std::size_t n_windows = 0;
};

CriticalReport critical_check(const WindowSet& w, const std::vector<double>& y_grid);

struct PipelineReport {
    double T = 0, alpha = 0, V = 0, t = 0;
    int L = 0;
    std::size_t n_samples = 0;
    Partition partition;
    std::vector<std::string> piece;  // names, in partition order
    std::vector<std::size_t> count;
    std::vector<double> prob, upper_bound;
    std::vector<double> shape;       // e^{-V^2/t}/sqrt(t), with the log_l t column for fitted decay
    std::vector<double> log_l;
    std::size_t inclusion_samples = 0, inclusion_violations = 0;
};

// ladder events over zeta samples, decomposed; ConfigError when the ladder is infeasible
PipelineReport event_pipeline(double T, double alpha, std::size_t n_samples, std::uint64_t seed,
                              const ConstantsLedger& ledger);

// model increments conditioned on the corridor at level L land in a cell of the tuple set
struct InclusionReport {
    std::size_t accepted = 0, attempted = 0, violations = 0;
};
InclusionReport inclusion_check(const LadderConfig& ladder, std::size_t n_accept, std::uint64_t seed);

struct MollifierSweep {
    std::size_t n_samples = 0, n_precondition = 0, n_holds = 0;
    double fraction = 0;
    std::vector<MollifierCheck> violations;  // first 1000, with both sides
};

// mollifier inequality at every level l < L over zeta sample heights
MollifierSweep mollifier_sweep(double T, std::size_t n_samples, std::uint64_t seed, const ConstantsLedger& ledger);

}  // namespace zld
