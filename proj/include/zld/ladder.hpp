#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "zld/ledger.hpp"
#include "zld/primes.hpp"

namespace zld {

struct LadderConfig {
    double T = 0;
    double t = 0;  // log log T
    double alpha = 1;
    double V = 0;
    double kappa = 0;
    double s_frak = 0;
    std::vector<double> points;  // t_0 = 0, t_1, ..., t_L
    std::vector<double> logs;    // log_l t for l = 0..L (log_0 t = t)
    double next_point = 0;       // t_{L+1}, or t when the iterated log is undefined
    int L_count = 0;
    ConstantsLedger ledger;

    double delta(int j) const;          // t_j - t_{j-1}; Delta_1 = t_1
    PrimeRange range(int j) const;      // block j; block 1 starts at p = 2
    nlohmann::json to_json() const;
};

// V <= 0 or NaN selects V = alpha * t
LadderConfig build_ladder(double T, double alpha, double V, const ConstantsLedger& ledger);

// iterated logarithm with a domain guard; returns false once an argument drops to <= 1
bool iterated_log(double t, int l, double& out);

struct BarrierParams {
    double A = 0, B = 0, C = 0, D = 0;
    std::vector<double> U, L, c;  // index l = 0..L; entry 0 unused for U/L, c_0 = 1
};

BarrierParams barrier_params(double alpha, const ConstantsLedger& ledger);
// constants plus per-level barriers U_l, L_l and products c_l
BarrierParams barrier_params(const LadderConfig& cfg);

struct ConstraintCheck {
    std::string name;
    std::string relation;  // "<" or ">"
    double lhs = 0, rhs = 0, residual = 0;  // residual = lhs - rhs
    bool pass = false;
};

std::vector<ConstraintCheck> check_constraints(const BarrierParams& p, double alpha, double s_frak);

struct LevelInput {
    double S = 0;               // S_{t_l}
    double inc_abs = 0;         // |S~_{t_l} - S~_{t_{l-1}}|
    double mollifier_abs = 0;   // |M_1 ... M_l|
};

struct TraceInput {
    double tau = 0;
    double log_abs_zeta = 0;
    double zeta_abs = 0;
    std::vector<LevelInput> levels;  // l = 1..L
};

struct EventTrace {
    double tau = 0;
    double log_abs_zeta = 0;
    std::vector<LevelInput> levels;
    std::vector<char> A, B, C, D, G;  // index l-1
    bool H = false;
};

EventTrace classify(const TraceInput& in, const LadderConfig& cfg, const BarrierParams& bp);

struct Partition {
    std::size_t n = 0;
    std::size_t count_H = 0;
    std::size_t not_G1 = 0;               // H and not G_1
    std::vector<std::size_t> between;     // H and G_l minus G_{l+1}, l = 1..L-1
    std::size_t last = 0;                 // H and G_L
    std::size_t sum() const;
};

Partition decompose(const std::vector<EventTrace>& traces, int L);

struct TupleSet {
    int ell = 0;
    double w = 0;
    std::vector<double> deltas;                   // Delta_j, j = 1..ell
    std::set<std::vector<std::int64_t>> tuples;   // grid indices k_j, u_j = k_j / Delta_j
    std::size_t bound_violations = 0;             // tuples with some |u_j| >= 4 Delta_j + 2
    bool contains_cell_of(const std::vector<double>& Y) const;
};

bool tuple_admissible(const std::vector<std::int64_t>& k, const std::vector<double>& deltas, double w,
                      const BarrierParams& bp);

TupleSet tuple_set(int ell, double w, const LadderConfig& cfg, const BarrierParams& bp);

// B_l and C_l and S in (w, w+1], from an increment vector
bool corridor_event(const std::vector<double>& Y, double w, const BarrierParams& bp);

}  // namespace zld
