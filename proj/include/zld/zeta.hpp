#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace zld {

enum class Precision { fast, checked };

struct Height {
    double t = 0;
    Precision profile = Precision::fast;
};

struct ZetaValue {
    double re = 0;
    double im = 0;
    double abs_log = 0;
    double err_bound = 0;
};

struct LogAbs {
    double value = 0;      // log|zeta|, or log(threshold) when near_zero
    double raw = 0;        // log|zeta| as computed, possibly very negative
    bool near_zero = false;
};

constexpr double kMaxHeight = 1e12;
constexpr double kEulerMaclaurinBelow = 200.0;  // fast profile switches to RS above
constexpr double kCheckedOracleBelow = 1e5;

// Riemann-Siegel theta, and theta mod 2pi computed without cancellation
double siegel_theta(double t);
double siegel_theta_mod(double t);

// Z(t) by Riemann-Siegel with corrections C0..C4; err receives the envelope
double siegel_z(double t, double* err = nullptr);

ZetaValue zeta_rs(double t);
ZetaValue zeta_em(double t);

ZetaValue zeta_critical(const Height& h);
LogAbs log_abs_zeta(const Height& h);

// i.i.d. uniform heights on [T, 2T]; sample i depends only on (seed, i)
std::vector<Height> sample_tau(double T, std::size_t n, std::uint64_t seed);

}  // namespace zld
