#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "zld/dirichlet.hpp"
#include "zld/ledger.hpp"

namespace zld {

// G = 1_[a,b] * k with k(y) = omega kappa(omega y), kappa = (3/2) sinc^4, so that
// k^ is an Irwin-Hall(4) density supported on [-2 omega, 2 omega].
struct MajorantSpec {
    double Delta = 3, A = 2;
    double a = 0, b = 0;          // enlarged interval [-Delta^{-A/2}/2, 1/Delta + Delta^{-A/2}/2]
    double omega = 0;
    double band_edge = 0;         // 2 omega, support of G^
    double band_limit = 0;        // Delta^{2A}
    int nu_design = 50;
    std::uint64_t nu = 0;         // ledger truncation order Delta^{nu_exponent A}
    std::vector<long double> taylor;  // c_k = G^(k)(0)/k!, until negligible

    // build-time measurements
    double prop2_min = 0, prop2_max = 0;
    double prop5_integral = 0;    // int |G^|
    double band_leak = 0;         // max |G^| sampled outside the band
    double c3 = 0, c4 = 0;        // measured constants of the lower and upper sandwiches
    double grid_step = 0;

    double value(double x) const;                 // G(x)
    double lipschitz() const { return 1.5 * omega; }
    std::complex<double> fourier(double xi) const;  // G^(xi)
    double lower_cutoff() const;                  // e^{-Delta^{A-1}}
    nlohmann::json to_json() const;
};

MajorantSpec build_majorant(double Delta, double A, const ConstantsLedger& ledger);

// rigorous bound on |G(x) - sum_{k<=nu} c_k x^k|
double taylor_remainder(const MajorantSpec& spec, std::uint64_t nu, double x);

struct TruncationPolynomial {
    std::uint64_t nu = 0;
    std::vector<long double> coeffs;  // c_0..c_min(nu, stored)
    double log10_error_bound = 0;     // log10 of (100^nu / nu^nu) Delta^{3 A nu}
};

TruncationPolynomial truncate(const MajorantSpec& spec, std::uint64_t nu);

struct DValue {
    double value = 0;
    double err = 0;
    bool via_G = false;  // remainder below 1e-15, value taken from G
};

DValue evaluate_D(const MajorantSpec& spec, const TruncationPolynomial& poly, double x);

struct SandwichReport {
    std::size_t n = 0, violations = 0;
    double c = 0;            // measured constant for |D|^2 on [0, 1/Delta], with Lipschitz margin
    double min_margin = 0;   // min over samples of |D|^2 (1 + c e^{-Delta^{A-1}}) - indicator
    std::vector<double> violating_x;
};

// the constant c used by sandwich_check, measured once per (spec, poly)
double measure_square_constant(const MajorantSpec& spec, const TruncationPolynomial& poly);
SandwichReport sandwich_check(const MajorantSpec& spec, const TruncationPolynomial& poly, const std::vector<double>& xs);

struct UpperSandwichReport {
    std::size_t n = 0, violations = 0;
    double max_excess = 0;  // max of G - 1_I - c4 e^{-Delta^{A-1}}
};

UpperSandwichReport upper_sandwich_check(const MajorantSpec& spec, const std::vector<double>& xs);

struct ReverseReport {
    double u = 0;
    double lhs = 0, lhs_stderr = 0;  // E |D(Y - u)|^2
    double prob = 0;                 // P(Y - u in the enlarged interval)
    double rhs = 0;                  // prob + c e^{-Delta^{A-1}}
    bool holds = false;              // lhs <= rhs + 3 stderr
    double chernoff_tail = 0;        // P(|Y - u| > Delta^{6A})
    std::size_t n_samples = 0;
};

ReverseReport reverse_check(const MajorantSpec& spec, const TruncationPolynomial& poly, const PrimeBlock& block,
                            double u, std::size_t n_samples, std::uint64_t seed);

}  // namespace zld
