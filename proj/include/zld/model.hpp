#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "zld/dirichlet.hpp"
#include "zld/ladder.hpp"

namespace zld {

// theta_p = 2 pi u(seed, p); pure in (seed, p)
struct PhaseAssignment {
    std::uint64_t seed = 0;
    double theta(std::uint64_t p) const;
    double cos_theta(std::uint64_t p) const;
};

// Y = sum cos(theta_p)/sqrt(p) + cos^2(theta_p)/(2p) over the block
double sample_Y(const PrimeBlock& block, const PhaseAssignment& a);
double sample_Y(int j, const LadderConfig& ladder, const PhaseAssignment& a);

// prod exp(i a theta_p) over n = prod p^a
std::complex<double> sample_Zn(std::uint64_t n, const PhaseAssignment& a);

// n independent draws of Y; draw i uses the assignment substream(seed, i)
std::vector<double> sample_block(const PrimeBlock& block, std::size_t n, std::uint64_t seed);

struct GaussianSurrogate {
    double mean = 0;
    double variance = 0;
    double cdf(double x) const;
};

// exact first two moments of Y: sum 1/(4p) and sum 1/(2p) + 1/(32p^2)
GaussianSurrogate surrogate(const PrimeBlock& block);

struct MgfReport {
    double lambda = 0;
    double estimate = 0, stderr_ = 0;
    double bound = 0;  // exp(lambda^2 Delta / 4)
    double ratio = 0;
    std::size_t n_samples = 0;
};

MgfReport mgf_check(const PrimeBlock& block, double delta, double lambda, std::size_t n_samples, std::uint64_t seed);
MgfReport mgf_check(int j, double lambda, const LadderConfig& ladder, std::size_t n_samples, std::uint64_t seed);

struct BerryEsseenReport {
    double distance = 0;  // max over intervals between grid points, including half-lines
    double stderr_ = 0;   // binomial error of the worst interval
    double worst_lo = 0, worst_hi = 0;
    bool saddle_regime = false;  // block 1
    std::size_t n_samples = 0;
};

// empirical minus surrogate probability of (a, b]
double interval_discrepancy(const std::vector<double>& sorted_samples, const GaussianSurrogate& g, double a, double b);

BerryEsseenReport berry_esseen_distance(std::vector<double> samples, const GaussianSurrogate& g,
                                        const std::vector<double>& grid);
BerryEsseenReport berry_esseen_distance(int j, const LadderConfig& ladder, const std::vector<double>& grid,
                                        std::size_t n_samples, std::uint64_t seed);

struct SaddleReport {
    double v = 0, Delta = 0, r = 0;
    double estimate = 0, stderr_ = 0;
    double reference = 0;  // (1/Delta) r^{-1/2} exp(-v^2/r)
    double ratio = 0;
    std::size_t hits = 0, n_samples = 0;
};

// v measured from the block mean `center`
SaddleReport saddle_density_check(double v, double Delta, const std::vector<double>& samples, double center, double r);
// block 1 of the ladder, r = t_1
SaddleReport saddle_density_check(double v, double Delta, const LadderConfig& ladder, std::size_t n_samples,
                                  std::uint64_t seed);

struct MomentMatch {
    int q = 0;
    double estimate = 0, stderr_ = 0;
    double reference = 0;  // (2q)!/(2^q q!) sigma^{2q}
    double ratio = 0;
};

std::vector<MomentMatch> gaussian_moments(const std::vector<double>& samples, double variance, int q_max,
                                          double center = 0.0);

struct TiltedSamples {
    double lambda = 0;
    std::vector<double> values;
    std::vector<double> weights;  // likelihood ratio back to the untilted law
    double log_norm = 0;          // sum log E exp(lambda f_p)
    double ess = 0;               // (sum w)^2 / sum w^2
    double weighted_mean(const std::vector<double>& f) const;
    // (sum w f)^2 / sum (w f)^2: effective size for estimating E f, e.g. a tail indicator
    double ess_for(const std::vector<double>& f) const;
};

TiltedSamples tilted_sampler(const PrimeBlock& block, double lambda, std::size_t n_samples, std::uint64_t seed);
// lambda whose tilted law has mean `target`
double mean_matching_lambda(const PrimeBlock& block, double target);

}  // namespace zld
