#include "zld/ledger.hpp"

#include "zld/errors.hpp"

namespace zld {

std::string to_string(Profile p) { return p == Profile::paper ? "paper" : "desk"; }

Profile profile_from_string(const std::string& s)
{
    if (s == "paper") return Profile::paper;
    if (s == "desk") return Profile::desk;
    throw ConfigError("unknown profile '" + s + "' (expected paper|desk)");
}

ConstantsLedger ConstantsLedger::paper()
{
    ConstantsLedger l;
    l.profile = Profile::paper;
    l.s_multiplier = 2e6;
    l.E_Omega = 1e5;
    l.E_M = 1e5;
    l.E_Q = 1e4;
    l.E_c = 1e6;
    l.majorant_A = 20;
    l.nu_exponent = 10;
    return l;
}

ConstantsLedger ConstantsLedger::desk() { return ConstantsLedger{}; }

ConstantsLedger ConstantsLedger::for_profile(Profile p) { return p == Profile::paper ? paper() : desk(); }

double ConstantsLedger::s_frak(double alpha) const
{
    if (!(alpha > 0 && alpha < 2)) throw DomainError("alpha must lie in (0,2)");
    return s_multiplier / ((2 - alpha) * (2 - alpha) * alpha * alpha);
}

nlohmann::json ConstantsLedger::to_json() const
{
    return {{"profile", to_string(profile)},
            {"s_multiplier", s_multiplier},
            {"E_Omega", E_Omega},
            {"E_M", E_M},
            {"E_Q", E_Q},
            {"E_c", E_c},
            {"L_fraction", L_fraction},
            {"omega_q_factor", omega_q_factor},
            {"coeff_cap_exponent", coeff_cap_exponent},
            {"A_const", A_const},
            {"D_const", D_const},
            {"increment_bound", increment_bound},
            {"majorant_A", majorant_A},
            {"nu_exponent", nu_exponent},
            {"kernel_power", kernel_power},
            {"nu_design", nu_design},
            {"sieve_cap", sieve_cap},
            {"tuple_cap", tuple_cap},
            {"mollifier_value_cap", mollifier_value_cap},
            {"mollifier_term_cap", mollifier_term_cap}};
}

}  // namespace zld
