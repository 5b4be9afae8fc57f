#include "zld/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <boost/crc.hpp>

#include "CLI11.hpp"
#include "zld/dirichlet.hpp"
#include "zld/errors.hpp"
#include "zld/ladder.hpp"
#include "zld/majorant.hpp"
#include "zld/model.hpp"
#include "zld/parallel.hpp"
#include "zld/primes.hpp"
#include "zld/rng.hpp"
#include "zld/zeta.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace zld {

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

enum class Kind { number, integer, string, list };

struct KeySpec {
    const char* key;
    Kind kind;
};

const std::vector<KeySpec>& schema()
{
    static const std::vector<KeySpec> s = {
        {"run.T", Kind::number},           {"run.samples", Kind::integer},   {"run.seed", Kind::integer},
        {"run.threads", Kind::integer},    {"run.profile", Kind::string},    {"ladder.alpha", Kind::number},
        {"tail.alpha", Kind::list},        {"moments.beta", Kind::list},     {"fourth.T", Kind::list},
        {"windows.theta", Kind::number},   {"windows.count", Kind::integer}, {"windows.spacing", Kind::number},
        {"max.y", Kind::list},             {"short.beta", Kind::list},       {"short.A", Kind::list},
        {"freezing.beta_lo", Kind::number}, {"freezing.beta_hi", Kind::number}, {"freezing.step", Kind::number},
        {"critical.y", Kind::list},        {"majorant.delta", Kind::number},
        {"majorant.A", Kind::number},      {"majorant.points", Kind::integer}, {"majorant.u", Kind::number},
        {"dirichlet.ell", Kind::integer},  {"dirichlet.j", Kind::number},    {"dirichlet.k", Kind::number},
        {"dirichlet.q", Kind::integer},    {"model.block", Kind::integer},   {"model.lambda", Kind::number},
        {"model.v", Kind::number},         {"model.delta", Kind::number},    {"model.q_max", Kind::integer},
    };
    return s;
}

std::string describe(Kind k)
{
    switch (k) {
    case Kind::number: return "a number";
    case Kind::integer: return "a non-negative integer";
    case Kind::string: return "a string";
    case Kind::list: return "a list of numbers";
    }
    return "";
}

bool has_kind(const json& v, Kind k)
{
    switch (k) {
    case Kind::number: return v.is_number();
    case Kind::integer:
        return v.is_number_unsigned() || (v.is_number() && v.get<double>() >= 0 && std::floor(v.get<double>()) == v.get<double>());
    case Kind::string: return v.is_string();
    case Kind::list:
        if (!v.is_array()) return false;
        for (const auto& x : v)
            if (!x.is_number()) return false;
        return true;
    }
    return false;
}

std::vector<double> list_of(const json& cfg, const char* key) { return cfg.at(key).get<std::vector<double>>(); }

ConstantsLedger ledger_of(const json& cfg) { return ConstantsLedger::for_profile(profile_from_string(cfg.at("run.profile"))); }

}  // namespace

json default_config()
{
    return {
        {"run.T", 1e6},
        {"run.samples", 100000},
        {"run.seed", 42},
        {"run.threads", 1},
        {"run.profile", "desk"},
        {"ladder.alpha", 1.0},
        {"tail.alpha", {0.5, 1.0, 1.5}},
        {"moments.beta", {0.5, 1.0, 2.0}},
        {"fourth.T", json::array()},
        {"windows.theta", 1.0},
        {"windows.count", 200},
        {"windows.spacing", 1.0},
        {"max.y", {0, 1, 2}},
        {"short.beta", {0, 1, 2, 3, 4, 5}},
        {"short.A", {2, 5, 10}},
        {"freezing.beta_lo", 1.0},
        {"freezing.beta_hi", 5.0},
        {"freezing.step", 0.05},
        {"critical.y", {-2, -1, 0, 1, 2}},
        {"majorant.delta", 3.0},
        {"majorant.A", 2.0},
        {"majorant.points", 10000},
        {"majorant.u", 0.0},
        {"dirichlet.ell", 1},
        {"dirichlet.j", 0.0},
        {"dirichlet.k", 0.0},
        {"dirichlet.q", 1},
        {"model.block", 1},
        {"model.lambda", 1.0},
        {"model.v", 0.0},
        {"model.delta", 1.0},
        {"model.q_max", 4},
    };
}

ConfigResult validate_config(const json& partial)
{
    ConfigResult r;
    r.resolved = default_config();
    if (!partial.is_object()) {
        r.errors.push_back("configuration must be a JSON object with flat dotted keys");
        return r;
    }
    for (const auto& [k, v] : partial.items()) {
        const auto it = std::find_if(schema().begin(), schema().end(), [&](const KeySpec& s) { return k == s.key; });
        if (it == schema().end()) {
            r.errors.push_back("unknown key \"" + k + "\"");
            continue;
        }
        if (!has_kind(v, it->kind)) {
            r.errors.push_back("\"" + k + "\" must be " + describe(it->kind));
            continue;
        }
        r.resolved[k] = v;
    }
    // paper profile: the majorant exponent defaults to the smallest admissible value
    if (r.resolved["run.profile"] == "paper" && !partial.contains("majorant.A")) r.resolved["majorant.A"] = 10.0;

    const json& c = r.resolved;
    auto err = [&](const std::string& m) { r.errors.push_back(m); };
    const double T = c["run.T"];
    if (!(T >= 10 && T <= kMaxHeight)) err("run.T=" + fmt(T) + " outside [10, 1e12]");
    if (c["run.samples"].get<double>() < 1) err("run.samples must be >= 1");
    if (c["run.threads"].get<double>() < 1) err("run.threads must be >= 1");
    const std::string prof = c["run.profile"];
    if (prof != "desk" && prof != "paper") err("run.profile must be \"desk\" or \"paper\"");
    const double alpha = c["ladder.alpha"];
    if (!(alpha > 0 && alpha < 2)) err("ladder.alpha=" + fmt(alpha) + " outside the admissible range (0,2)");
    for (double a : list_of(c, "tail.alpha"))
        if (!(a > 0 && a < 2)) err("tail.alpha=" + fmt(a) + " outside the admissible range (0,2)");
    for (double b : list_of(c, "moments.beta"))
        if (!(b > 0 && b < 4)) err("moments.beta=" + fmt(b) + " outside the admissible range (0,4)");
    for (double t : list_of(c, "fourth.T"))
        if (!(t >= 1e5 && t <= kMaxHeight)) err("fourth.T=" + fmt(t) + " outside [1e5, 1e12]");
    const double theta = c["windows.theta"];
    if (!(theta >= 0 && theta < 3)) err("windows.theta=" + fmt(theta) + " outside the admissible range [0,3)");
    if (c["windows.count"].get<double>() < 1) err("windows.count must be >= 1");
    const double sp = c["windows.spacing"];
    if (!(sp > 0 && sp <= 1)) err("windows.spacing=" + fmt(sp) + " outside (0,1]");
    for (double b : list_of(c, "short.beta"))
        if (!(b >= 0)) err("short.beta=" + fmt(b) + " must be >= 0");
    for (double a : list_of(c, "short.A"))
        if (!(a > 1)) err("short.A=" + fmt(a) + " must exceed 1");
    const double lo = c["freezing.beta_lo"], hi = c["freezing.beta_hi"], st = c["freezing.step"];
    if (!(lo >= 0 && hi > lo && st > 0 && (hi - lo) / st >= 8)) err("freezing range needs 0 <= beta_lo < beta_hi with at least 8 steps");
    const double d = c["majorant.delta"], A = c["majorant.A"];
    if (!(d >= 3)) err("majorant.delta=" + fmt(d) + " must be >= 3");
    if (prof == "paper" && !(A >= 10)) err("majorant.A=" + fmt(A) + " must be >= 10 under the paper profile");
    if (!(A > 1)) err("majorant.A=" + fmt(A) + " must exceed 1");
    if (c["majorant.points"].get<double>() < 1) err("majorant.points must be >= 1");
    if (c["dirichlet.ell"].get<double>() < 1) err("dirichlet.ell must be >= 1");
    if (c["model.block"].get<double>() < 1) err("model.block must be >= 1");
    if (!(c["model.delta"].get<double>() > 0)) err("model.delta must be positive");
    if (c["model.q_max"].get<double>() < 1) err("model.q_max must be >= 1");
    if (!r.ok()) return r;

    try {
        build_ladder(T, alpha, 0, ledger_of(c));
    } catch (const ConfigError& e) {
        if (prof == "paper")
            r.warnings.push_back("ladder infeasible at T=" + fmt(T) + " under the paper profile; use run.profile=desk");
        else
            r.warnings.push_back(std::string("ladder infeasible: ") + e.what());
    }
    return r;
}

ConfigResult validate_config(const std::string& json_text)
{
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        ConfigResult r;
        r.resolved = default_config();
        r.errors.push_back(std::string("invalid JSON: ") + e.what());
        return r;
    }
    return validate_config(j);
}

std::string crc32_hex(const std::string& bytes)
{
    boost::crc_32_type crc;
    crc.process_bytes(bytes.data(), bytes.size());
    char buf[16];
    std::snprintf(buf, sizeof buf, "%08x", crc.checksum());
    return buf;
}

const std::vector<std::string>& experiment_names()
{
    static const std::vector<std::string> n = {"tail",     "moments",  "fourth",   "second",  "ks",       "max",
                                               "short-moments", "freezing", "critical", "pipeline", "mollifier"};
    return n;
}

namespace {

using S = std::string;

S fu(std::size_t x) { return fmt(static_cast<std::uint64_t>(x)); }

Table make(std::vector<S> cols)
{
    Table t;
    t.columns = std::move(cols);
    return t;
}

WindowSet windows_of(const json& c, double theta)
{
    return sample_windows(c["run.T"], theta, c["windows.count"].get<std::size_t>(), c["run.seed"].get<std::uint64_t>(),
                          c["windows.spacing"]);
}

Outputs run_tail(const json& c)
{
    const auto cache = build_cache(c["run.T"], c["run.samples"], c["run.seed"]);
    auto t = make({"experiment", "T", "alpha", "V", "estimate", "reference", "ratio", "stderr", "n", "seed", "n_exceed",
                   "n_near_zero", "upper_bound", "wide_interval"});
    for (const auto& e : tail_experiment(cache, list_of(c, "tail.alpha")))
        t.add({"tail", fmt(cache.T), fmt(e.alpha), fmt(e.V), fmt(e.p_hat), fmt(e.gaussian_ref), fmt(e.ratio),
               fmt(e.stderr_), fu(e.n_samples), fmt(cache.seed), fu(e.n_exceed), fu(e.n_near_zero), fmt(e.upper_bound),
               e.wide_interval ? "1" : "0"});
    return {{"tail.csv", t}};
}

Outputs run_moments(const json& c)
{
    const auto cache = build_cache(c["run.T"], c["run.samples"], c["run.seed"]);
    auto t = make({"experiment", "T", "beta", "estimate", "reference", "ratio", "stderr", "n", "seed", "layered",
                   "layered_rel_diff", "negative_part"});
    for (double b : list_of(c, "moments.beta")) {
        const auto m = fractional_moment(cache, b);
        t.add({"moments", fmt(cache.T), fmt(b), fmt(m.M_hat), fmt(m.ref), fmt(m.ratio), fmt(m.stderr_), fu(m.n_samples),
               fmt(cache.seed), fmt(m.layered), fmt(m.layered_rel_diff), fmt(m.negative_part)});
    }
    return {{"moments.csv", t}};
}

Outputs run_anchor(const json& c, const S& name)
{
    auto Ts = list_of(c, "fourth.T");
    if (Ts.empty()) Ts.push_back(c["run.T"]);
    auto t = make({"experiment", "T", "estimate", "reference", "ratio", "stderr", "n", "seed", "ratio_stderr"});
    for (double T : Ts) {
        const auto cache = build_cache(T, c["run.samples"], c["run.seed"]);
        const auto a = name == "fourth" ? fourth_moment_anchor(cache) : second_moment_anchor(cache);
        t.add({name, fmt(T), fmt(a.estimate), fmt(a.reference), fmt(a.ratio), fmt(a.stderr_), fu(a.n_samples),
               fmt(cache.seed), fmt(a.ratio_stderr)});
    }
    return {{name + ".csv", t}};
}

Outputs run_ks(const json& c)
{
    const auto cache = build_cache(c["run.T"], c["run.samples"], c["run.seed"]);
    const auto k = selberg_ks(cache);
    const double crit = 1.358 / std::sqrt(static_cast<double>(k.n_samples));  // 5% critical value
    auto t = make({"experiment", "T", "estimate", "reference", "ratio", "stderr", "n", "seed", "scale"});
    t.add({"ks", fmt(k.T), fmt(k.distance), fmt(crit), fmt(k.distance / crit), fmt(kNaN), fu(k.n_samples),
           fmt(cache.seed), fmt(k.scale)});
    return {{"ks.csv", t}};
}

Outputs run_max(const json& c)
{
    const auto w = windows_of(c, c["windows.theta"]);
    const auto r = short_interval_max(w, list_of(c, "max.y"));
    auto t = make({"experiment", "T", "theta", "y", "estimate", "reference", "ratio", "stderr", "n", "seed",
                   "bound_log", "m_t"});
    for (const auto& row : r.rows)
        t.add({"max", fmt(w.T), fmt(w.theta), fmt(row.y), fmt(row.freq), fmt(row.reference), fmt(row.ratio),
               fmt(row.stderr_), fu(w.centers.size()), fmt(w.seed), fmt(row.bound_log), fmt(r.m_t)});
    auto lv = make({"V", "S"});
    for (std::size_t i = 0; i < r.level_V.size(); ++i) lv.add({fmt(r.level_V[i]), fmt(r.level_S[i])});
    return {{"max.csv", t}, {"max_levels.csv", lv}};
}

Outputs run_short(const json& c)
{
    const auto w = windows_of(c, c["windows.theta"]);
    const auto A = list_of(c, "short.A");
    const auto r = short_interval_moments(w, list_of(c, "short.beta"), A);
    const double t_ = std::log(std::log(w.T));
    auto t = make({"experiment", "T", "theta", "beta", "estimate", "reference", "ratio", "stderr", "n", "seed",
                   "median", "beta_c"});
    for (const auto& res : r.per_beta) {
        std::vector<double> z = res.per_window;
        double m = 0;
        for (double x : z) m += x;
        m /= static_cast<double>(z.size());
        double s = 0;
        for (double x : z) s += (x - m) * (x - m);
        const double se = z.size() > 1 ? std::sqrt(s / static_cast<double>(z.size() - 1) / static_cast<double>(z.size())) : kNaN;
        std::nth_element(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(z.size() / 2), z.end());
        const double ref = std::exp(res.beta * res.beta / 4 * t_);
        t.add({"short-moments", fmt(w.T), fmt(w.theta), fmt(res.beta), fmt(m), fmt(ref), fmt(m / ref), fmt(se),
               fu(z.size()), fmt(w.seed), fmt(z[z.size() / 2]), fmt(res.beta_c)});
    }
    auto th = make({"beta", "A", "threshold", "freq", "stderr", "reference"});
    for (const auto& row : r.thresholds)
        th.add({fmt(row.beta), fmt(row.A), fmt(row.threshold), fmt(row.freq), fmt(row.stderr_), fmt(row.reference)});
    auto su = make({"beta", "mean", "median", "stderr", "reference", "ratio"});
    for (const auto& row : r.super)
        su.add({fmt(row.beta), fmt(row.mean_Z), fmt(row.median_Z), fmt(row.stderr_), fmt(row.reference), fmt(row.ratio)});
    auto wt = make({"recipe", "beta", "j", "V", "a"});
    const double a0 = A.empty() ? 2.0 : A.front();
    for (const auto& res : r.per_beta) {
        const bool sub = res.beta <= res.beta_c;
        const auto rows = sub ? subcritical_weights(res.beta, t_, w.theta, a0) : supercritical_weights(res.beta, t_, w.theta, a0);
        for (const auto& x : rows)
            wt.add({sub ? "subcritical" : "supercritical", fmt(res.beta), fmt(static_cast<std::uint64_t>(x.j)), fmt(x.V), fmt(x.a)});
    }
    return {{"short-moments.csv", t}, {"short-moments_thresholds.csv", th}, {"short-moments_super.csv", su},
            {"short-moments_weights.csv", wt}};
}

Outputs run_freezing(const json& c)
{
    const auto w = windows_of(c, c["windows.theta"]);
    const auto f = freezing_fit(w, c["freezing.beta_lo"], c["freezing.beta_hi"], c["freezing.step"]);
    auto t = make({"experiment", "T", "theta", "estimate", "reference", "ratio", "stderr", "n", "seed", "rel_error",
                   "frozen_slope", "sse"});
    t.add({"freezing", fmt(w.T), fmt(w.theta), fmt(f.break_beta), fmt(f.beta_c), fmt(f.break_beta / f.beta_c),
           fmt(kNaN), fu(w.centers.size()), fmt(w.seed), fmt(f.rel_error), fmt(f.frozen_slope), fmt(f.sse)});
    auto cv = make({"beta", "free_energy", "slope"});
    for (std::size_t i = 0; i < f.beta.size(); ++i) cv.add({fmt(f.beta[i]), fmt(f.free_energy[i]), fmt(f.slope[i])});
    return {{"freezing.csv", t}, {"freezing_curve.csv", cv}};
}

Outputs run_critical(const json& c)
{
    const auto w = windows_of(c, 0.0);
    const auto r = critical_check(w, list_of(c, "critical.y"));
    auto t = make({"experiment", "T", "y", "estimate", "reference", "ratio", "stderr", "n", "seed", "m_t"});
    for (const auto& row : r.rows)
        t.add({"critical", fmt(r.T), fmt(row.y), fmt(row.S), fmt(row.shape), fmt(row.ratio), fmt(row.stderr_),
               fu(r.n_windows), fmt(w.seed), fmt(r.m_t)});
    auto z = make({"experiment", "T", "estimate", "stderr", "scaled", "n", "seed"});
    z.add({"critical", fmt(r.T), fmt(r.z2), fmt(r.z2_stderr), fmt(r.z2_scaled), fu(r.n_windows), fmt(w.seed)});
    return {{"critical.csv", t}, {"critical_z2.csv", z}};
}

Outputs run_pipeline(const json& c)
{
    const std::uint64_t seed = c["run.seed"];
    const auto r = event_pipeline(c["run.T"], c["ladder.alpha"], c["run.samples"], seed, ledger_of(c));
    auto t = make({"experiment", "T", "alpha", "piece", "estimate", "reference", "ratio", "stderr", "n", "seed", "count",
                   "upper_bound", "log_l"});
    const double n = static_cast<double>(r.n_samples);
    for (std::size_t i = 0; i < r.piece.size(); ++i) {
        const double p = r.prob[i];
        t.add({"pipeline", fmt(r.T), fmt(r.alpha), r.piece[i], fmt(p), fmt(r.shape[i]), fmt(p / r.shape[i]),
               fmt(std::sqrt(p * (1 - p) / n)), fu(r.n_samples), fmt(seed), fu(r.count[i]), fmt(r.upper_bound[i]),
               fmt(r.log_l[i])});
    }
    auto inc = make({"experiment", "T", "samples", "violations"});
    inc.add({"pipeline", fmt(r.T), fu(r.inclusion_samples), fu(r.inclusion_violations)});
    return {{"pipeline.csv", t}, {"pipeline_inclusion.csv", inc}};
}

Outputs run_mollifier(const json& c)
{
    const std::uint64_t seed = c["run.seed"];
    const double T = c["run.T"];
    const auto s = mollifier_sweep(T, c["run.samples"], seed, ledger_of(c));
    auto t = make({"experiment", "T", "estimate", "reference", "ratio", "stderr", "n", "seed", "n_precondition", "n_holds"});
    const double f = s.fraction, np = static_cast<double>(s.n_precondition);
    t.add({"mollifier", fmt(T), fmt(f), fmt(0.99), fmt(f / 0.99), fmt(np > 0 ? std::sqrt(f * (1 - f) / np) : kNaN),
           fu(s.n_samples), fmt(seed), fu(s.n_precondition), fu(s.n_holds)});
    auto v = make({"tau", "lhs", "rhs"});
    for (const auto& x : s.violations) v.add({fmt(x.tau), fmt(x.lhs), fmt(x.rhs)});
    return {{"mollifier.csv", t}, {"mollifier_violations.csv", v}};
}


LadderConfig ladder_of(const json& c) { return build_ladder(c["run.T"], c["ladder.alpha"], 0, ledger_of(c)); }

Table mc_table() { return make({"experiment", "T", "N", "estimate", "reference", "ratio", "stderr", "n_samples", "seed"}); }

void add_mc(Table& t, const McReport& r)
{
    t.add({r.experiment, fmt(r.T), fmt(r.N), fmt(r.estimate), fmt(r.reference), fmt(r.ratio), fmt(r.stderr_),
           fu(r.n_samples), fmt(r.seed)});
}

int level_of(const json& c, const LadderConfig& lad, int extra)
{
    const int ell = c["dirichlet.ell"];
    if (ell + extra > lad.L_count)
        throw ConfigError("dirichlet.ell=" + std::to_string(ell) + " needs levels up to " + std::to_string(ell + extra) +
                          " but the ladder has L=" + std::to_string(lad.L_count));
    return ell;
}

// sum over the primes of one range of p^{-1/2} p^{-s}, the polynomial behind the ladder increments
DirichletPolynomial prime_poly(const PrimeRange& r)
{
    DirichletPolynomial q;
    q.support_range = r;
    for (auto p : primes_in_range(r)) q.set(p, 1 / std::sqrt(static_cast<double>(p)));
    return q;
}

Outputs run_mean_value(const json& c)
{
    const auto lad = ladder_of(c);
    auto t = mc_table();
    add_mc(t, mean_value_check(prime_poly(lad.range(level_of(c, lad, 0))), c["run.T"], c["run.samples"], c["run.seed"]));
    return {{"mean-value.csv", t}};
}

// prime polynomials on p <= T^{1/8} and T^{1/8} < p <= T^{1/4}, the largest split the lemma admits
Outputs run_splitting(const json& c)
{
    const double T = c["run.T"];
    const auto a = prime_poly(PrimeRange::upto(std::pow(T, 0.125)));
    const auto b = prime_poly(PrimeRange::between(std::pow(T, 0.125), std::pow(T, 0.25)));
    auto t = mc_table();
    add_mc(t, splitting_check(a, b, T, c["run.samples"], c["run.seed"]));
    return {{"splitting.csv", t}};
}

Outputs run_dirichlet_moments(const json& c)
{
    const double T = c["run.T"], tt = std::log(std::log(T));
    double j = c["dirichlet.j"], k = c["dirichlet.k"];
    if (j <= 0) j = tt / 2;
    const int q = c["dirichlet.q"];
    if (k <= 0) k = tt - std::log(2.0 * std::max(q, 1)) - 0.01;
    const std::uint64_t seed = c["run.seed"];
    auto t = make({"experiment", "T", "N", "estimate", "reference", "ratio", "stderr", "n_samples", "seed", "j", "k", "q",
                   "variant", "tail_q"});
    for (auto v : {MomentVariant::real_, MomentVariant::complex_}) {
        const auto r = moment_bound_check(j, k, q, T, c["run.samples"], seed, v);
        t.add({"moments", fmt(T), fmt(std::exp(std::exp(k))), fmt(r.estimate), fmt(r.reference), fmt(r.ratio),
               fmt(r.stderr_), fu(r.n_samples), fmt(seed), fmt(j), fmt(k), std::to_string(q),
               v == MomentVariant::real_ ? "real" : "complex", std::to_string(r.tail_q)});
    }
    return {{"moments.csv", t}};
}

Outputs run_mollifier_check(const json& c)
{
    const std::uint64_t seed = c["run.seed"];
    const double T = c["run.T"];
    const auto s = mollifier_sweep(T, c["run.samples"], seed, ledger_of(c));
    auto t = make({"experiment", "T", "N", "estimate", "reference", "ratio", "stderr", "n_samples", "seed",
                   "n_precondition", "n_holds"});
    const double f = s.fraction, np = static_cast<double>(s.n_precondition);
    t.add({"mollifier-check", fmt(T), "", fmt(f), fmt(0.99), fmt(f / 0.99), fmt(np > 0 ? std::sqrt(f * (1 - f) / np) : kNaN),
           fu(s.n_samples), fmt(seed), fu(s.n_precondition), fu(s.n_holds)});
    return {{"mollifier-check.csv", t}};
}

PrimeBlock block_of(const json& c, const LadderConfig& lad)
{
    const int j = c["model.block"];
    if (j > lad.L_count) throw ConfigError("model.block=" + std::to_string(j) + " exceeds L=" + std::to_string(lad.L_count));
    return PrimeBlock(lad.range(j));
}

Outputs run_model(const std::string& which, const json& c)
{
    const auto lad = ladder_of(c);
    const int j = c["model.block"];
    const std::uint64_t seed = c["run.seed"];
    const std::size_t n = c["run.samples"];
    const std::string id = "model-" + which;
    auto t = make({"experiment", "T", "block", "parameter", "estimate", "reference", "ratio", "stderr", "n", "seed"});
    auto row = [&](double par, double est, double ref, double ratio, double se, std::size_t nn) {
        t.add({id, fmt(lad.T), std::to_string(j), fmt(par), fmt(est), fmt(ref), fmt(ratio), fmt(se), fu(nn), fmt(seed)});
    };
    if (which == "mgf") {
        const double lam = c["model.lambda"];
        const auto r = mgf_check(j, lam, lad, n, seed);
        row(lam, r.estimate, r.bound, r.ratio, r.stderr_, r.n_samples);
    } else if (which == "berry-esseen") {
        const auto b = block_of(c, lad);
        const auto g = surrogate(b);
        std::vector<double> grid;
        const double s = std::sqrt(g.variance);
        for (int i = -60; i <= 60; ++i) grid.push_back(g.mean + s * i / 15.0);
        const auto r = berry_esseen_distance(j, lad, grid, n, seed);
        row(0, r.distance, 0, kNaN, r.stderr_, r.n_samples);
    } else if (which == "saddle") {
        const double v = c["model.v"], d = c["model.delta"];
        const auto r = saddle_density_check(v, d, lad, n, seed);
        row(v, r.estimate, r.reference, r.ratio, r.stderr_, r.n_samples);
    } else {
        const auto b = block_of(c, lad);
        const auto g = surrogate(b);
        const auto y = sample_block(b, n, seed);
        for (const auto& m : gaussian_moments(y, g.variance, c["model.q_max"], g.mean))
            row(m.q, m.estimate, m.reference, m.ratio, m.stderr_, n);
    }
    return {{id + ".csv", t}};
}

Outputs run_decompose(const json& c)
{
    const std::uint64_t seed = c["run.seed"];
    const auto r = event_pipeline(c["run.T"], c["ladder.alpha"], c["run.samples"], seed, ledger_of(c));
    auto t = make({"experiment", "T", "alpha", "piece", "count", "n", "seed"});
    t.add({"decompose", fmt(r.T), fmt(r.alpha), "H", fu(r.partition.count_H), fu(r.n_samples), fmt(seed)});
    for (std::size_t i = 0; i < r.piece.size(); ++i)
        t.add({"decompose", fmt(r.T), fmt(r.alpha), r.piece[i], fu(r.count[i]), fu(r.n_samples), fmt(seed)});
    return {{"decompose.csv", t}};
}

}  // namespace

Outputs run_experiment(const std::string& name, const json& cfg)
{
    set_threads(cfg["run.threads"].get<int>());
    if (name == "tail") return run_tail(cfg);
    if (name == "moments") return run_moments(cfg);
    if (name == "fourth" || name == "second") return run_anchor(cfg, name);
    if (name == "ks") return run_ks(cfg);
    if (name == "max") return run_max(cfg);
    if (name == "short-moments") return run_short(cfg);
    if (name == "freezing") return run_freezing(cfg);
    if (name == "critical") return run_critical(cfg);
    if (name == "pipeline") return run_pipeline(cfg);
    if (name == "mollifier") return run_mollifier(cfg);
    if (name == "dirichlet mean-value") return run_mean_value(cfg);
    if (name == "dirichlet splitting") return run_splitting(cfg);
    if (name == "dirichlet moments") return run_dirichlet_moments(cfg);
    if (name == "dirichlet mollifier-check") return run_mollifier_check(cfg);
    if (name.rfind("model ", 0) == 0) return run_model(name.substr(6), cfg);
    if (name == "ladder decompose") return run_decompose(cfg);
    throw ConfigError("unknown experiment \"" + name + "\"");
}

namespace {

std::string read_file(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& s)
{
    std::ofstream out(p, std::ios::binary);
    if (!out) throw ResourceError("cannot write " + p.string());
    out << s;
    if (!out) throw ResourceError("write failed for " + p.string());
}

// writes the tables (and a manifest when `manifest` is not null); without a directory, CSV goes to `out`
json emit(const Outputs& outs, const std::string& dir, std::ostream& out, const json* manifest)
{
    json sums = json::object();
    if (dir.empty()) {
        for (std::size_t i = 0; i < outs.size(); ++i) {
            if (i) out << '\n';
            out << outs[i].second.csv();
        }
        return sums;
    }
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ResourceError("cannot create " + dir + ": " + ec.message());
    for (const auto& [name, table] : outs) {
        const std::string body = table.csv();
        write_file(fs::path(dir) / name, body);
        sums[name] = crc32_hex(body);
    }
    if (manifest) {
        json m = *manifest;
        m["outputs"] = sums;
        write_file(fs::path(dir) / "manifest.json", m.dump(2) + "\n");
    }
    return sums;
}

json manifest_for(const std::string& name, const json& cfg)
{
    return {{"artifact_version", kArtifactVersion},
            {"experiment", name},
            {"config", cfg},
            {"profile", cfg["run.profile"]},
            {"seed", cfg["run.seed"]},
            {"ledger", ledger_of(cfg).to_json()}};
}

struct Flags {
    std::string config, out;
    double T = 0, theta = 0, lambda = 0, v = 0, j = 0, k = 0;
    std::uint64_t samples = 0, seed = 0, windows = 0, block = 0, ell = 0, q = 0;
    int threads = 1;
    std::string profile;
    std::vector<double> alpha_list, beta_list, y_list, T_list;
};

// a subcommand driven by the resolved configuration; `name` is the run_experiment key
struct ConfigCommand {
    std::string name;
    CLI::App* app;
};

void add_common(CLI::App* s, Flags& f)
{
    s->add_option("--config", f.config, "JSON file with flat dotted keys");
    s->add_option("--out", f.out, "output directory for CSV files and manifest.json");
    s->add_option("--T", f.T, "height T");
    s->add_option("--samples", f.samples, "Monte Carlo sample count");
    s->add_option("--seed", f.seed, "master seed");
    s->add_option("--threads", f.threads, "worker cap");
    s->add_option("--profile", f.profile, "desk or paper");
    s->add_option("--alpha", f.alpha_list, "alpha, or a comma separated grid for tail")->delimiter(',');
}

json overrides(const ConfigCommand& cc, const Flags& f)
{
    json partial = json::object();
    if (!f.config.empty()) {
        try {
            partial = json::parse(read_file(f.config));
        } catch (const json::parse_error& e) {
            throw ConfigError("config " + f.config + ": " + e.what());
        }
        if (!partial.is_object()) throw ConfigError("config " + f.config + " must hold a JSON object");
    }
    auto set = [&](const char* flag, const char* key, const json& v) {
        const auto* o = cc.app->get_option_no_throw(flag);
        if (o && o->count() > 0) partial[key] = v;
    };
    const auto& n = cc.name;
    set("--T", "run.T", f.T);
    set("--samples", "run.samples", f.samples);
    set("--seed", "run.seed", f.seed);
    set("--threads", "run.threads", f.threads);
    set("--profile", "run.profile", f.profile);
    set("--theta", "windows.theta", f.theta);
    set("--windows", "windows.count", f.windows);
    set("--y", n == "critical" ? "critical.y" : "max.y", f.y_list);
    set("--T-list", "fourth.T", f.T_list);
    set("--beta", n == "moments" ? "moments.beta" : "short.beta", f.beta_list);
    set("--block", "model.block", f.block);
    set("--lambda", "model.lambda", f.lambda);
    set("--v", "model.v", f.v);
    set("--ell", "dirichlet.ell", f.ell);
    set("--j", "dirichlet.j", f.j);
    set("--k", "dirichlet.k", f.k);
    set("--q", "dirichlet.q", f.q);
    if (cc.app->get_option("--alpha")->count() > 0) {
        if (n == "tail")
            partial["tail.alpha"] = f.alpha_list;
        else if (f.alpha_list.size() == 1)
            partial["ladder.alpha"] = f.alpha_list.front();
        else
            throw ConfigError("--alpha takes a single value for " + n);
    }
    return partial;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"zeta large deviations laboratory"};
    app.require_subcommand(1);
    Flags f;
    std::vector<ConfigCommand> cmds;

    auto* sieve = app.add_subcommand("sieve", "count primes in (lo, hi]");
    double s_lo = 0, s_hi = 0;
    bool s_list = false;
    sieve->add_option("--lo", s_lo, "exclusive lower end")->default_val(0);
    sieve->add_option("--hi", s_hi, "inclusive upper end")->required();
    sieve->add_flag("--list", s_list, "print the primes");

    auto* zeta = app.add_subcommand("zeta", "zeta(1/2 + i t) as one CSV row per height");
    std::vector<double> z_t;
    bool z_checked = false;
    zeta->add_option("--t", z_t, "heights, comma separated")->required()->delimiter(',');
    zeta->add_flag("--checked", z_checked, "cross-check against Euler-Maclaurin below 1e5");

    auto* dir = app.add_subcommand("dirichlet", "Dirichlet polynomial checks");
    dir->require_subcommand(1);
    for (const char* n : {"mean-value", "splitting", "moments", "mollifier-check"}) {
        auto* s = dir->add_subcommand(n);
        add_common(s, f);
        s->add_option("--ell", f.ell, "mollifier level");
        s->add_option("--j", f.j, "lower t-scale for moments");
        s->add_option("--k", f.k, "upper t-scale for moments");
        s->add_option("--q", f.q, "moment order");
        cmds.push_back({std::string("dirichlet ") + n, s});
    }
    auto* d_ps = dir->add_subcommand("partial-sum", "S_k and S~_k at tau");
    double d_tau = 0, d_k = 0;
    d_ps->add_option("--tau", d_tau)->required();
    d_ps->add_option("--k", d_k)->required();

    auto* lad = app.add_subcommand("ladder", "barrier ladder");
    lad->require_subcommand(1);
    auto* l_build = lad->add_subcommand("build", "ladder points and barriers as JSON");
    auto* l_cons = lad->add_subcommand("constraints", "the six barrier inequalities");
    double l_T = 1e6, l_alpha = 1;
    std::string l_prof = "desk";
    for (auto* s : {l_build, l_cons}) {
        s->add_option("--alpha", l_alpha)->default_val(1.0);
        s->add_option("--profile", l_prof)->default_val("desk")->check(CLI::IsMember({"desk", "paper"}));
    }
    l_build->add_option("--T", l_T)->default_val(1e6);
    {
        auto* s = lad->add_subcommand("decompose", "partition of the ladder events over zeta samples");
        add_common(s, f);
        cmds.push_back({"ladder decompose", s});
    }

    auto* mod = app.add_subcommand("model", "random Euler product blocks");
    mod->require_subcommand(1);
    for (const char* n : {"mgf", "berry-esseen", "saddle", "moments"}) {
        auto* s = mod->add_subcommand(n);
        add_common(s, f);
        s->add_option("--block", f.block, "block index j");
        s->add_option("--lambda", f.lambda, "mgf argument");
        s->add_option("--v", f.v, "saddle offset");
        cmds.push_back({std::string("model ") + n, s});
    }

    auto* maj = app.add_subcommand("majorant", "band-limited majorant");
    maj->require_subcommand(1);
    auto* mj_build = maj->add_subcommand("build", "construct and report properties");
    auto* mj_sand = maj->add_subcommand("sandwich", "sandwich residuals on random points");
    auto* mj_rev = maj->add_subcommand("reverse", "reverse approximation against a model block");
    double mj_delta = 3, mj_A = 2, mj_u = 0;
    std::string mj_prof = "desk", mj_out;
    std::uint64_t mj_points = 10000, mj_seed = 42, mj_samples = 100000;
    for (auto* s : {mj_build, mj_sand, mj_rev}) {
        s->add_option("--delta", mj_delta)->default_val(3.0);
        s->add_option("--a", mj_A)->default_val(2.0);
        s->add_option("--profile", mj_prof)->default_val("desk")->check(CLI::IsMember({"desk", "paper"}));
        s->add_option("--out", mj_out, "output directory");
        s->add_option("--seed", mj_seed)->default_val(42);
    }
    mj_sand->add_option("--points", mj_points)->default_val(10000);
    mj_rev->add_option("--u", mj_u)->default_val(0.0);
    mj_rev->add_option("--samples", mj_samples)->default_val(100000);

    auto* exp = app.add_subcommand("experiment", "Monte Carlo experiments");
    exp->require_subcommand(1);
    for (const auto& name : experiment_names()) {
        auto* s = exp->add_subcommand(name);
        add_common(s, f);
        s->add_option("--theta", f.theta, "window exponent");
        s->add_option("--windows", f.windows, "number of windows");
        s->add_option("--beta", f.beta_list, "beta grid")->delimiter(',');
        s->add_option("--y", f.y_list, "y grid")->delimiter(',');
        s->add_option("--T-list", f.T_list, "heights for the anchor trend")->delimiter(',');
        cmds.push_back({name, s});
    }
    auto* rerun = exp->add_subcommand("rerun", "re-run from a manifest and compare checksums");
    std::string rr_manifest, rr_out;
    int rr_threads = 0;
    rerun->add_option("--manifest", rr_manifest)->required();
    rerun->add_option("--out", rr_out)->required();
    rerun->add_option("--threads", rr_threads, "override the worker cap");

    std::vector<std::string> argv_s{"zld"};
    argv_s.insert(argv_s.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : argv_s) argv.push_back(s.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        const CLI::App* leaf = &app;
        while (!leaf->get_subcommands().empty()) leaf = leaf->get_subcommands().front();
        out << leaf->help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (sieve->parsed()) {
            if (!(s_hi >= s_lo && s_lo >= 0)) throw ConfigError("sieve: need 0 <= lo <= hi");
            const auto ps = primes_in_range(PrimeRange::between(s_lo, s_hi));
            if (s_list) {
                for (auto p : ps) out << p << '\n';
            } else {
                auto t = make({"lo", "hi", "count", "largest"});
                t.add({fmt(s_lo), fmt(s_hi), fu(ps.size()), ps.empty() ? "" : fmt(ps.back())});
                out << t.csv();
            }
            return 0;
        }
        if (zeta->parsed()) {
            auto t = make({"t", "re", "im", "abs_log", "err_bound"});
            for (double tt : z_t) {
                if (!(tt >= 2 && tt <= kMaxHeight)) throw ConfigError("zeta: t=" + fmt(tt) + " outside [2, 1e12]");
                const auto v = zeta_critical(Height{tt, z_checked ? Precision::checked : Precision::fast});
                t.add({fmt(tt), fmt(v.re), fmt(v.im), fmt(v.abs_log), fmt(v.err_bound)});
            }
            out << t.csv();
            return 0;
        }
        if (d_ps->parsed()) {
            const auto [s, st] = partial_sum(d_tau, d_k, true);
            auto t = make({"tau", "k", "S", "S_tilde_re", "S_tilde_im"});
            t.add({fmt(d_tau), fmt(d_k), fmt(s), fmt(st.real()), fmt(st.imag())});
            out << t.csv();
            return 0;
        }
        if (l_build->parsed()) {
            const auto c = build_ladder(l_T, l_alpha, 0, ConstantsLedger::for_profile(profile_from_string(l_prof)));
            json j = c.to_json();
            const auto bp = barrier_params(c);
            j["barriers"] = {{"A", bp.A}, {"B", bp.B}, {"C", bp.C}, {"D", bp.D}, {"U", bp.U}, {"L", bp.L}, {"c", bp.c}};
            out << j.dump(2) << '\n';
            return 0;
        }
        if (l_cons->parsed()) {
            if (!(l_alpha > 0 && l_alpha < 2)) throw ConfigError("alpha=" + fmt(l_alpha) + " outside the admissible range (0,2)");
            const auto led = ConstantsLedger::for_profile(profile_from_string(l_prof));
            auto t = make({"name", "relation", "lhs", "rhs", "residual", "pass"});
            bool all = true;
            for (const auto& c : check_constraints(barrier_params(l_alpha, led), l_alpha, led.s_frak(l_alpha))) {
                t.add({c.name, c.relation, fmt(c.lhs), fmt(c.rhs), fmt(c.residual), c.pass ? "1" : "0"});
                all = all && c.pass;
            }
            out << t.csv();
            return all ? 0 : 1;
        }
        if (mj_build->parsed() || mj_sand->parsed() || mj_rev->parsed()) {
            const auto led = ConstantsLedger::for_profile(profile_from_string(mj_prof));
            if (!(mj_delta >= 3)) throw ConfigError("majorant: delta must be >= 3");
            if (led.profile == Profile::paper && !(mj_A >= 10)) throw ConfigError("majorant: A must be >= 10 under the paper profile");
            const auto spec = build_majorant(mj_delta, mj_A, led);
            const json man = {{"artifact_version", kArtifactVersion}, {"command", "majorant"},
                              {"config", {{"majorant.delta", mj_delta}, {"majorant.A", mj_A}, {"run.profile", mj_prof},
                                          {"run.seed", mj_seed}}}};
            if (mj_build->parsed()) {
                const std::string body = spec.to_json().dump(2) + "\n";
                if (mj_out.empty()) {
                    out << body;
                } else {
                    std::error_code ec;
                    fs::create_directories(mj_out, ec);
                    if (ec) throw ResourceError("cannot create " + mj_out + ": " + ec.message());
                    write_file(fs::path(mj_out) / "majorant.json", body);
                    json m = man;
                    m["outputs"] = {{"majorant.json", crc32_hex(body)}};
                    write_file(fs::path(mj_out) / "manifest.json", m.dump(2) + "\n");
                }
                return 0;
            }
            const auto poly = truncate(spec, spec.nu);
            if (mj_sand->parsed()) {
                std::vector<double> xs;
                for (std::uint64_t i = 0; i < mj_points; ++i) xs.push_back(-1 + 2 * u01(mj_seed, i));
                const auto r = sandwich_check(spec, poly, xs);
                const auto u = upper_sandwich_check(spec, xs);
                auto t = make({"x", "indicator", "D", "lower_margin", "G", "upper_excess"});
                const double f1 = 1 + r.c * spec.lower_cutoff();
                const double wl = -std::pow(mj_delta, -mj_A / 2), wr = 1 / mj_delta + std::pow(mj_delta, -mj_A / 2);
                for (double x : xs) {
                    const double ind = (x >= 0 && x <= 1 / mj_delta) ? 1 : 0;
                    const double d = evaluate_D(spec, poly, x).value;
                    const double g = spec.value(x);
                    const double wide = (x >= wl && x <= wr) ? 1 : 0;
                    t.add({fmt(x), fmt(ind), fmt(d), fmt(d * d * f1 - ind), fmt(g), fmt(g - wide - spec.c4 * spec.lower_cutoff())});
                }
                auto sm = make({"n", "violations", "c", "min_margin", "upper_violations", "max_excess", "c4"});
                sm.add({fu(r.n), fu(r.violations), fmt(r.c), fmt(r.min_margin), fu(u.violations), fmt(u.max_excess), fmt(spec.c4)});
                emit({{"sandwich.csv", t}, {"sandwich_summary.csv", sm}}, mj_out, out, &man);
                return r.violations == 0 && u.violations == 0 ? 0 : 1;
            }
            const auto c = build_ladder(1e6, 1.0, 0, ConstantsLedger::desk());
            const PrimeBlock blk(c.range(1));
            const auto r = reverse_check(spec, poly, blk, mj_u, mj_samples, mj_seed);
            auto t = make({"u", "lhs", "lhs_stderr", "prob", "rhs", "holds", "chernoff_tail", "n", "seed"});
            t.add({fmt(r.u), fmt(r.lhs), fmt(r.lhs_stderr), fmt(r.prob), fmt(r.rhs), r.holds ? "1" : "0",
                   fmt(r.chernoff_tail), fu(r.n_samples), fmt(mj_seed)});
            emit({{"reverse.csv", t}}, mj_out, out, &man);
            return r.holds ? 0 : 1;
        }
        if (rerun->parsed()) {
            const json m = json::parse(read_file(rr_manifest));
            if (!m.contains("experiment") || !m.contains("config") || !m.contains("outputs"))
                throw ConfigError("manifest lacks experiment, config or outputs");
            auto cr = validate_config(m["config"]);
            if (!cr.ok()) {
                for (const auto& e : cr.errors) err << "config error: " << e << '\n';
                return 2;
            }
            if (rr_threads > 0) cr.resolved["run.threads"] = rr_threads;
            const auto outs = run_experiment(m["experiment"], cr.resolved);
            json fresh = m;
            fresh["config"] = cr.resolved;
            const json sums = emit(outs, rr_out, out, &fresh);
            bool same = true;
            for (const auto& [name, crc] : m["outputs"].items()) {
                const bool ok = sums.contains(name) && sums[name] == crc;
                out << name << ' ' << (ok ? "identical" : "DIFFERS") << '\n';
                same = same && ok;
            }
            return same ? 0 : 1;
        }
        for (const auto& cc : cmds) {
            if (!cc.app->parsed()) continue;
            const auto cr = validate_config(overrides(cc, f));
            for (const auto& w : cr.warnings) err << "warning: " << w << '\n';
            if (!cr.ok()) {
                for (const auto& e : cr.errors) err << "config error: " << e << '\n';
                return 2;
            }
            const auto outs = run_experiment(cc.name, cr.resolved);
            const json man = manifest_for(cc.name, cr.resolved);
            emit(outs, f.out, out, &man);
            return 0;
        }
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const DomainError& e) {
        err << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const json::exception& e) {
        err << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const ResourceError& e) {
        err << "resource error: " << e.what() << '\n';
        return 3;
    } catch (const std::bad_alloc&) {
        err << "resource error: out of memory\n";
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    err << app.help();
    return 2;
}

int run(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace zld
