#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"

namespace zld {

enum class Profile { paper, desk };

std::string to_string(Profile p);
Profile profile_from_string(const std::string& s);

// Every literal constant of the recursion in one place.  The paper profile
// reproduces them verbatim; the desk profile rescales magnitudes so that
// caps bind at T ~ 10^6 while keeping each inequality's form.
struct ConstantsLedger {
    Profile profile = Profile::desk;

    // s_frak = s_multiplier / ((2-a)^2 a^2)
    double s_multiplier = 0.8;
    double E_Omega = 3;    // mollifier Omega cap exponent
    double E_M = 5;        // mollifier inequality error exponent
    double E_Q = 2;        // well factorable Omega cap exponent
    double E_c = 1e-3;     // prefactor in the cap defining the last level
    double L_fraction = 0.01;  // T^{1/100}
    double omega_q_factor = 10;
    double coeff_cap_exponent = 1.0 / 500;

    double A_const = 1e3;
    double D_const = 1e4;
    double increment_bound = 1e3;  // precondition of the mollifier inequality

    double majorant_A = 2;
    double nu_exponent = 5;  // nu = Delta^(nu_exponent * A)
    int kernel_power = 2;    // kernel sinc^(2m)
    int nu_design = 50;      // truncation order the kernel bandwidth is tuned for

    std::uint64_t sieve_cap = 1ULL << 34;
    std::uint64_t tuple_cap = 1000000;
    std::uint64_t mollifier_value_cap = 10000000;
    std::uint64_t mollifier_term_cap = 5000000;

    static ConstantsLedger paper();
    static ConstantsLedger desk();
    static ConstantsLedger for_profile(Profile p);

    double s_frak(double alpha) const;
    // numerator of B and C; 3*10^6 in the paper profile
    double barrier_numerator() const { return 1.5 * s_multiplier; }

    nlohmann::json to_json() const;
};

}  // namespace zld
