#pragma once

#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "zld/ladder.hpp"
#include "zld/primes.hpp"

namespace zld {

using cplx = std::complex<double>;

struct DirichletPolynomial {
    std::map<std::uint64_t, cplx> coeffs;
    std::uint64_t length = 0;  // largest supported index
    PrimeRange support_range{-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};

    static DirichletPolynomial constant(cplx c);
    void set(std::uint64_t n, cplx a);
    // checks that every prime factor of every index lies in support_range
    bool support_ok() const;
};

// Dirichlet convolution; used for products of polynomials on disjoint primes
DirichletPolynomial multiply(const DirichletPolynomial& a, const DirichletPolynomial& b);

// primes of one range with cached logs, for fast repeated sums over tau
struct PrimeBlock {
    std::vector<std::uint64_t> p;
    std::vector<double> inv_sqrt;
    PrimeRange range;

    PrimeBlock() = default;
    explicit PrimeBlock(const PrimeRange& r);
    // (S, S~) over the block; squares add Re p^{-2i tau}/(2p)
    std::pair<double, cplx> sums(double tau, bool include_prime_squares = true) const;
    // sum of 1/(2p) (+ 1/(8p^2) with squares): the variance of the real sum
    double variance(bool include_prime_squares = true) const;
    // mollifier value sum_{k <= cap} (-1)^k e_k(p^{-1/2-i tau})
    cplx mollifier(double tau, int omega_cap) const;
};

std::pair<double, cplx> partial_sum(double tau, double k, bool include_prime_squares);

double increment(double tau, int j, const LadderConfig& ladder);

struct MollifierSpec {
    int ell = 1;
    PrimeRange range;
    int omega_cap = 0;
    std::uint64_t length_cap = 5000000;          // number of terms
    std::uint64_t value_cap = 10000000;          // largest integer enumerated
};

MollifierSpec mollifier_spec(int ell, const LadderConfig& ladder);
DirichletPolynomial mollifier(const MollifierSpec& spec);

// sum a(n) n^{-1/2 - i tau}
cplx evaluate(const DirichletPolynomial& poly, double tau);
// sum a(n) n^{-i tau}, the normalization of the mean value lemma
cplx evaluate_unweighted(const DirichletPolynomial& poly, double tau);

struct McReport {
    std::string experiment;
    double T = 0;
    std::uint64_t N = 0;
    double estimate = 0;
    double reference = 0;
    double ratio = 0;
    double stderr_ = 0;      // of the estimate
    double ratio_stderr = 0;
    std::size_t n_samples = 0;
    std::uint64_t seed = 0;
    std::string note;
};

McReport mean_value_check(const DirichletPolynomial& poly, double T, std::size_t n_samples, std::uint64_t seed);
McReport splitting_check(const DirichletPolynomial& A, const DirichletPolynomial& B, double T,
                         std::size_t n_samples, std::uint64_t seed);

enum class MomentVariant { complex_, real_ };

struct MomentReport {
    double j = 0, k = 0;
    int q = 0;
    MomentVariant variant = MomentVariant::real_;
    double estimate = 0, reference = 0, ratio = 0, stderr_ = 0;
    int tail_q = 0;  // ceil(V^2/(k-j+1)) for V = the largest sampled |difference|
    std::size_t n_samples = 0;
};

MomentReport moment_bound_check(double j, double k, int q, double T, std::size_t n_samples, std::uint64_t seed,
                                MomentVariant variant);

struct MollifierCheck {
    bool precondition = true;
    bool holds = true;
    double lhs = 0, rhs = 0;
    double tau = 0;
};

// e^{-(S_{l+1}-S_l)} bounded by the mollifier M_{l+1}; ell in [0, L-1]
MollifierCheck mollifier_inequality_check(double tau, int ell, const LadderConfig& ladder);
// same, with precomputed block so that sweeps do not rebuild it
MollifierCheck mollifier_inequality_check(double tau, int ell, const LadderConfig& ladder, const PrimeBlock& block);

bool well_factorable_check(const std::vector<DirichletPolynomial>& polys, const LadderConfig& ladder);

struct FourthMomentProbe {
    double lhs = 0, lhs_stderr = 0;
    double rhs = 0, rhs_stderr = 0;
    double ratio = 0;
    int level = 0;  // l + 1 actually used
    std::size_t n_samples = 0;
};

FourthMomentProbe twisted_fourth_moment_probe(const std::vector<DirichletPolynomial>& Q, int ell,
                                              const LadderConfig& ladder, double T, std::size_t n_samples,
                                              std::uint64_t seed);

}  // namespace zld
