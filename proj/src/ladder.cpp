#include "zld/ladder.hpp"

#include <cmath>
#include <limits>

#include "zld/errors.hpp"

namespace zld {

bool iterated_log(double t, int l, double& out)
{
    double x = t;
    for (int i = 0; i < l; ++i) {
        if (!(x > 1.0) && i > 0) return false;
        if (!(x > 0.0)) return false;
        x = std::log(x);
    }
    out = x;
    return true;
}

double LadderConfig::delta(int j) const
{
    if (j < 1 || j > L_count) throw DomainError("ladder: level index out of range");
    return points[j] - points[j - 1];
}

PrimeRange LadderConfig::range(int j) const
{
    if (j < 1 || j > L_count) throw DomainError("ladder: level index out of range");
    PrimeRange r;
    r.t_lo = j == 1 ? -std::numeric_limits<double>::infinity() : points[j - 1];
    r.t_hi = points[j];
    return r;
}

nlohmann::json LadderConfig::to_json() const
{
    return {{"T", T},         {"t", t},         {"alpha", alpha},   {"V", V},
            {"kappa", kappa}, {"s_frak", s_frak}, {"points", points}, {"logs", logs},
            {"next_point", next_point}, {"L", L_count}, {"ledger", ledger.to_json()}};
}

LadderConfig build_ladder(double T, double alpha, double V, const ConstantsLedger& ledger)
{
    if (!(alpha > 0 && alpha < 2)) throw DomainError("alpha must lie in (0,2)");
    if (!(T > 16)) throw ConfigError("ladder: T too small (log log T must be positive)");
    LadderConfig c;
    c.T = T;
    c.t = std::log(std::log(T));
    c.alpha = alpha;
    c.V = (std::isnan(V) || V <= 0) ? alpha * c.t : V;
    c.kappa = c.V / c.t;
    c.s_frak = ledger.s_frak(alpha);
    c.ledger = ledger;

    // candidate levels while the iterated logarithm stays defined and positive
    std::vector<double> pts{0.0}, logs{c.t};
    for (int l = 1;; ++l) {
        if (!(logs.back() > 1.0) && l > 1) break;
        double lg;
        if (!iterated_log(c.t, l, lg) || !(lg > 0)) break;
        const double tl = c.t - c.s_frak * lg;
        if (!(tl > pts.back())) break;
        pts.push_back(tl);
        logs.push_back(lg);
    }
    const int n = static_cast<int>(pts.size()) - 1;
    // largest l with E_c (t - t_l)^E_Omega e^{t_{l+1}} <= L_fraction e^t, in logs
    int L = 0;
    for (int l = 1; l <= n; ++l) {
        const double next = l + 1 <= n ? pts[l + 1] : c.t;
        const double lhs = std::log(ledger.E_c) + ledger.E_Omega * std::log(c.t - pts[l]) + next;
        const double rhs = std::log(ledger.L_fraction) + c.t;
        if (lhs <= rhs) L = l;
    }
    if (L < 1)
        throw ConfigError("ladder infeasible at T=" + std::to_string(T) + " under the " + to_string(ledger.profile) +
                          " ledger (t_1 = " + std::to_string(c.t - c.s_frak * std::log(c.t)) +
                          "); use a smaller s multiplier or the desk ledger");
    c.L_count = L;
    c.points.assign(pts.begin(), pts.begin() + L + 1);
    c.logs.assign(logs.begin(), logs.begin() + L + 1);
    c.next_point = L + 1 <= n ? pts[L + 1] : c.t;
    return c;
}

BarrierParams barrier_params(double alpha, const ConstantsLedger& ledger)
{
    if (!(alpha > 0 && alpha < 2)) throw DomainError("alpha must lie in (0,2)");
    BarrierParams p;
    const double num = ledger.barrier_numerator();  // 3*10^6 in the paper profile
    p.B = num / (2 * alpha * (2 - alpha) * (2 - alpha)) + 1 / (4 * alpha);
    p.C = num / (2 * alpha * alpha * (2 - alpha)) + 1 / (4 * (2 - alpha));
    p.A = ledger.A_const;
    p.D = ledger.D_const;
    return p;
}

BarrierParams barrier_params(const LadderConfig& cfg)
{
    BarrierParams p = barrier_params(cfg.alpha, cfg.ledger);
    const int L = cfg.L_count;
    p.U.assign(L + 1, std::numeric_limits<double>::infinity());
    p.L.assign(L + 1, -std::numeric_limits<double>::infinity());
    p.c.assign(L + 1, 1.0);
    for (int l = 1; l <= L; ++l) {
        p.U[l] = cfg.kappa * cfg.points[l] + p.B * cfg.logs[l];
        p.L[l] = cfg.kappa * cfg.points[l] - p.C * cfg.logs[l];
        p.c[l] = p.c[l - 1] * (1 + std::exp(-cfg.points[l - 1]));
    }
    return p;
}

std::vector<ConstraintCheck> check_constraints(const BarrierParams& p, double alpha, double s)
{
    std::vector<ConstraintCheck> out;
    auto add = [&](const char* name, const char* rel, double lhs, double rhs) {
        ConstraintCheck c;
        c.name = name;
        c.relation = rel;
        c.lhs = lhs;
        c.rhs = rhs;
        c.residual = lhs - rhs;
        c.pass = rel[0] == '<' ? lhs < rhs : lhs > rhs;
        out.push_back(c);
    };
    const double a = alpha, b = 2 - alpha;
    add("B_lower", "<", 1 + a * a * s - 2 * a * p.B, 0.0);
    add("B_upper", "<", p.B - a * s, 0.0);
    add("C_lower", ">", p.C, (1 + b * b * s) / (2 * b));
    add("C_upper", "<", p.C, b * s);
    add("A_linear", ">", p.A, a * a / 4 + a * p.C / (2 * s) + 2);
    add("A_square", ">", p.A * p.A, a * a + 2 * a * p.C / s + 4);
    return out;
}

EventTrace classify(const TraceInput& in, const LadderConfig& cfg, const BarrierParams& bp)
{
    const int L = cfg.L_count;
    if (static_cast<int>(in.levels.size()) < L) throw DomainError("classify: missing level data");
    if (static_cast<int>(bp.U.size()) < L + 1) throw DomainError("classify: barriers not attached");
    EventTrace e;
    e.tau = in.tau;
    e.log_abs_zeta = in.log_abs_zeta;
    e.levels.assign(in.levels.begin(), in.levels.begin() + L);
    e.A.assign(L, 0);
    e.B.assign(L, 0);
    e.C.assign(L, 0);
    e.D.assign(L, 0);
    e.G.assign(L, 0);
    bool a = true, b = true, c = true, d = true;
    for (int l = 1; l <= L; ++l) {
        const LevelInput& x = in.levels[l - 1];
        a = a && x.inc_abs <= bp.A * (cfg.points[l] - cfg.points[l - 1]);
        b = b && x.S <= bp.U[l];
        c = c && x.S >= bp.L[l];
        const double lhs = in.zeta_abs * std::exp(-x.S);
        const double rhs = bp.c[l] * in.zeta_abs * x.mollifier_abs + std::exp(-bp.D * (cfg.t - cfg.points[l - 1]));
        d = d && lhs <= rhs;
        e.A[l - 1] = a;
        e.B[l - 1] = b;
        e.C[l - 1] = c;
        e.D[l - 1] = d;
        e.G[l - 1] = a && b && c && d;
    }
    e.H = in.log_abs_zeta > cfg.V;
    return e;
}

std::size_t Partition::sum() const
{
    std::size_t s = not_G1 + last;
    for (auto v : between) s += v;
    return s;
}

Partition decompose(const std::vector<EventTrace>& traces, int L)
{
    if (L < 1) throw DomainError("decompose: L must be >= 1");
    Partition p;
    p.n = traces.size();
    p.between.assign(L - 1, 0);
    for (const auto& e : traces) {
        if (static_cast<int>(e.G.size()) < L) throw DomainError("decompose: trace has fewer levels than L");
        if (!e.H) continue;
        ++p.count_H;
        if (!e.G[0]) {
            ++p.not_G1;
            continue;
        }
        int top = 1;  // largest l with G_l
        while (top < L && e.G[top]) ++top;
        if (top == L)
            ++p.last;
        else
            ++p.between[top - 1];
    }
    if (p.sum() != p.count_H) throw ConsistencyError("decompose: pieces do not sum to count(H)");
    return p;
}

bool tuple_admissible(const std::vector<std::int64_t>& k, const std::vector<double>& deltas, double w,
                      const BarrierParams& bp)
{
    double s = 0;
    const std::size_t ell = k.size();
    for (std::size_t j = 1; j <= ell; ++j) {
        s += static_cast<double>(k[j - 1]) / deltas[j - 1];
        if (s < bp.L[j] - 1 || s > bp.U[j] + 1) return false;
    }
    return s >= w - 1 && s <= w + 1;
}

bool TupleSet::contains_cell_of(const std::vector<double>& Y) const
{
    std::vector<std::int64_t> k(Y.size());
    for (std::size_t j = 0; j < Y.size(); ++j) k[j] = static_cast<std::int64_t>(std::floor(Y[j] * deltas[j]));
    return tuples.count(k) > 0;
}

bool corridor_event(const std::vector<double>& Y, double w, const BarrierParams& bp)
{
    double s = 0;
    for (std::size_t j = 1; j <= Y.size(); ++j) {
        s += Y[j - 1];
        if (s > bp.U[j] || s < bp.L[j]) return false;
    }
    return s > w && s <= w + 1;
}

TupleSet tuple_set(int ell, double w, const LadderConfig& cfg, const BarrierParams& bp)
{
    if (ell < 1 || ell > cfg.L_count) throw DomainError("tuple_set: ell out of ladder range");
    if (static_cast<int>(bp.U.size()) < ell + 1) throw DomainError("tuple_set: barriers not attached");
    if (w < bp.L[ell] || w > bp.U[ell]) throw DomainError("tuple_set: w must lie in [L_l, U_l]");
    TupleSet ts;
    ts.ell = ell;
    ts.w = w;
    for (int j = 1; j <= ell; ++j) ts.deltas.push_back(cfg.delta(j));
    const std::uint64_t cap = cfg.ledger.tuple_cap;
    std::vector<std::int64_t> k(ell);

    auto rec = [&](auto&& self, int j, double prefix) -> void {
        const double dj = ts.deltas[j - 1];
        double lo = bp.L[j] - 1 - prefix, hi = bp.U[j] + 1 - prefix;
        if (j == ell) {
            lo = std::max(lo, w - 1 - prefix);
            hi = std::min(hi, w + 1 - prefix);
        }
        if (lo > hi) return;
        const auto k0 = static_cast<std::int64_t>(std::ceil(lo * dj)) - 1;
        const auto k1 = static_cast<std::int64_t>(std::floor(hi * dj)) + 1;
        for (std::int64_t q = k0; q <= k1; ++q) {
            k[j - 1] = q;
            const double s = prefix + static_cast<double>(q) / dj;
            if (s < bp.L[j] - 1 || s > bp.U[j] + 1) continue;
            if (j < ell) {
                self(self, j + 1, s);
                continue;
            }
            if (s < w - 1 || s > w + 1) continue;
            ts.tuples.insert(k);
            if (ts.tuples.size() > cap)
                throw ResourceError("tuple_set: more than " + std::to_string(cap) + " tuples");
            for (int i = 0; i < ell; ++i)
                if (std::fabs(static_cast<double>(k[i]) / ts.deltas[i]) >= 4 * ts.deltas[i] + 2) {
                    ++ts.bound_violations;
                    break;
                }
        }
    };
    rec(rec, 1, 0.0);
    return ts;
}

}  // namespace zld
