#include <cmath>

#include "doctest.h"
#include "zld/errors.hpp"
#include "zld/ladder.hpp"
#include "zld/rng.hpp"

using namespace zld;

TEST_CASE("paper s_frak and t_0")
{
    const auto paper = ConstantsLedger::paper();
    CHECK(paper.s_frak(1.0) == 2e6);
    const auto desk = ConstantsLedger::desk();
    const auto c = build_ladder(1e6, 1.0, 0, desk);
    CHECK(c.points[0] == 0.0);
    CHECK(c.t == doctest::Approx(std::log(std::log(1e6))));
    CHECK(c.kappa == doctest::Approx(1.0));
    CHECK_THROWS_AS(paper.s_frak(2.0), DomainError);
}

TEST_CASE("desk ladder with multiplier 2 at t = 3")
{
    auto led = ConstantsLedger::desk();
    led.s_multiplier = 2.0;
    const double T = std::exp(std::exp(3.0));
    const auto c = build_ladder(T, 1.0, 0, led);
    CHECK(c.t == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(c.points[1] == doctest::Approx(3 - 2 * std::log(3.0)).epsilon(1e-12));
    CHECK(c.points[1] == doctest::Approx(0.8028).epsilon(1e-4));
}

TEST_CASE("desk ladders at 1e6 and 1e7")
{
    const auto led = ConstantsLedger::desk();
    const auto a = build_ladder(1e6, 1.0, 0, led);
    CHECK(a.L_count == 1);
    CHECK(a.points[1] == doctest::Approx(1.8534).epsilon(1e-3));
    CHECK(a.delta(1) == a.points[1]);
    const auto b = build_ladder(1e7, 1.0, 0, led);
    CHECK(b.L_count == 2);
    CHECK(b.points[2] > b.points[1]);
    CHECK(b.points[2] < b.t);
    for (int l = 1; l <= b.L_count; ++l) CHECK(b.logs[l] > 0);
    CHECK_THROWS_AS(a.delta(2), DomainError);
}

TEST_CASE("paper ledger infeasible at desk height")
{
    CHECK_THROWS_AS(build_ladder(1e6, 1.0, 0, ConstantsLedger::paper()), ConfigError);
    CHECK_THROWS_AS(build_ladder(1e6, 2.0, 0, ConstantsLedger::desk()), DomainError);
}

TEST_CASE("barrier constants at alpha 1")
{
    const auto p = barrier_params(1.0, ConstantsLedger::paper());
    CHECK(p.B == 1.5e6 + 0.25);
    CHECK(p.C == 1.5e6 + 0.25);
    CHECK(p.A == 1000.0);
    CHECK(p.D == 10000.0);
    for (double a : {0.3, 1.7}) {
        const auto q = barrier_params(a, ConstantsLedger::paper());
        CHECK(q.A == 1000.0);
        CHECK(q.D == 10000.0);
    }
    CHECK_THROWS_AS(barrier_params(0.0, ConstantsLedger::paper()), DomainError);
}

TEST_CASE("constraint arithmetic")
{
    const auto led = ConstantsLedger::paper();
    auto checks = check_constraints(barrier_params(1.0, led), 1.0, led.s_frak(1.0));
    REQUIRE(checks.size() == 6);
    CHECK(checks[0].residual == -999999.5);
    for (const auto& c : checks) CHECK(c.pass);

    for (int i = 1; i <= 39; ++i) {
        const double a = 0.05 * i;
        for (const auto& c : check_constraints(barrier_params(a, led), a, led.s_frak(a))) {
            INFO(c.name << " alpha=" << a);
            CHECK(c.pass);
        }
    }
    auto p = barrier_params(1.0, led);
    p.B = 0;
    checks = check_constraints(p, 1.0, led.s_frak(1.0));
    CHECK_FALSE(checks[0].pass);
}

TEST_CASE("barrier ordering and c products")
{
    const auto c = build_ladder(1e7, 1.0, 0, ConstantsLedger::desk());
    const auto p = barrier_params(c);
    for (int l = 1; l <= c.L_count; ++l) {
        CHECK(p.L[l] < c.kappa * c.points[l]);
        CHECK(c.kappa * c.points[l] < p.U[l]);
    }
    CHECK(p.c[1] == doctest::Approx(2.0));
    CHECK(p.c[2] == doctest::Approx(2.0 * (1 + std::exp(-c.points[1]))));
}

namespace {

TraceInput mid_corridor(const LadderConfig& c, double log_abs)
{
    TraceInput in;
    in.log_abs_zeta = log_abs;
    in.zeta_abs = std::exp(log_abs);
    for (int l = 1; l <= c.L_count; ++l) in.levels.push_back({c.kappa * c.points[l], 0.0, 1.0});
    return in;
}

}  // namespace

TEST_CASE("classify cascade")
{
    const auto c = build_ladder(1e7, 1.0, 0, ConstantsLedger::desk());
    const auto p = barrier_params(c);
    auto in = mid_corridor(c, 0.0);
    auto e = classify(in, c, p);
    for (int l = 0; l < c.L_count; ++l) {
        CHECK(e.B[l]);
        CHECK(e.C[l]);
    }
    CHECK_FALSE(e.H);

    in.levels[1].inc_abs = 2 * p.A * c.delta(2);
    e = classify(in, c, p);
    CHECK(e.A[0]);
    CHECK_FALSE(e.A[1]);
    CHECK_FALSE(e.G[1]);

    in.levels.pop_back();
    CHECK_THROWS_AS(classify(in, c, p), DomainError);
}

TEST_CASE("events decrease in ell")
{
    const auto c = build_ladder(1e7, 1.0, 0, ConstantsLedger::desk());
    const auto p = barrier_params(c);
    for (std::uint64_t i = 0; i < 500; ++i) {
        TraceInput in;
        in.log_abs_zeta = 6 * u01(7, 4 * i) - 3;
        in.zeta_abs = std::exp(in.log_abs_zeta);
        for (int l = 1; l <= c.L_count; ++l)
            in.levels.push_back({8 * u01(7, 4 * i + 1) - 4, 3 * u01(7, 4 * i + 2), 2 * u01(7, 4 * i + 3)});
        const auto e = classify(in, c, p);
        for (int l = 1; l < c.L_count; ++l) {
            CHECK(e.G[l] <= e.G[l - 1]);
            CHECK(e.A[l] <= e.A[l - 1]);
            CHECK(e.D[l] <= e.D[l - 1]);
        }
    }
}

TEST_CASE("decompose")
{
    const auto c = build_ladder(1e7, 1.0, 0, ConstantsLedger::desk());
    const auto p = barrier_params(c);
    std::vector<EventTrace> none;
    for (int i = 0; i < 5; ++i) none.push_back(classify(mid_corridor(c, -1.0), c, p));
    auto d = decompose(none, c.L_count);
    CHECK(d.count_H == 0);
    CHECK(d.sum() == 0);

    std::vector<EventTrace> tr;
    for (std::uint64_t i = 0; i < 300; ++i) {
        auto in = mid_corridor(c, 5 * u01(11, 3 * i));
        if (u01(11, 3 * i + 1) < 0.3) in.levels[0].S = p.U[1] + 1;
        if (u01(11, 3 * i + 2) < 0.3) in.levels[1].S = p.L[2] - 1;
        tr.push_back(classify(in, c, p));
    }
    d = decompose(tr, c.L_count);
    CHECK(d.sum() == d.count_H);
    CHECK(d.not_G1 > 0);
    CHECK(d.between[0] > 0);
    CHECK(d.last > 0);

    const auto c1 = build_ladder(1e6, 1.0, 0, ConstantsLedger::desk());
    const auto p1 = barrier_params(c1);
    std::vector<EventTrace> one{classify(mid_corridor(c1, 3.0), c1, p1)};
    d = decompose(one, 1);
    CHECK(d.between.empty());
    CHECK(d.last + d.not_G1 == 1);
}

TEST_CASE("tuple set at ell 1")
{
    const auto c = build_ladder(1e6, 1.0, 0, ConstantsLedger::desk());
    const auto p = barrier_params(c);
    const double w = c.kappa * c.points[1];
    const auto ts = tuple_set(1, w, c, p);
    const double d = c.delta(1);
    const double lo = std::max(p.L[1] - 1, w - 1), hi = std::min(p.U[1] + 1, w + 1);
    std::size_t expect = 0;
    for (auto k = static_cast<std::int64_t>(std::floor(lo * d)) - 2; k <= std::ceil(hi * d) + 2; ++k)
        if (k / d >= lo && k / d <= hi) {
            ++expect;
            CHECK(ts.tuples.count({k}) == 1);
        }
    CHECK(ts.tuples.size() == expect);
    CHECK(ts.bound_violations == 0);
    CHECK_THROWS_AS(tuple_set(1, p.U[1] + 5, c, p), DomainError);
}

TEST_CASE("tuple set bound and inclusion at ell 2")
{
    // cell rounding costs up to sum 1/Delta_j, covered by the unit slack only when the
    // widths are not small; desk T=1e7 has Delta_2 < 1, so use wider synthetic levels
    auto c = build_ladder(1e7, 1.0, 0, ConstantsLedger::desk());
    c.points = {0.0, 2.5, 5.0};
    const auto p = barrier_params(c);
    const double w = c.kappa * c.points[2];
    const auto ts = tuple_set(2, w, c, p);
    CHECK(!ts.tuples.empty());
    CHECK(ts.bound_violations == 0);
    for (const auto& k : ts.tuples) CHECK(tuple_admissible(k, ts.deltas, w, p));

    std::size_t hits = 0, miss = 0;
    for (std::uint64_t i = 0; i < 20000; ++i) {
        std::vector<double> Y{4 * u01(3, 2 * i) - 1, 4 * u01(3, 2 * i + 1) - 1};
        if (!corridor_event(Y, w, p)) continue;
        ++hits;
        if (!ts.contains_cell_of(Y)) ++miss;
    }
    CHECK(hits > 0);
    CHECK(miss == 0);
}

TEST_CASE("tuple cap")
{
    auto led = ConstantsLedger::desk();
    led.tuple_cap = 2;
    const auto c = build_ladder(1e7, 1.0, 0, led);
    const auto p = barrier_params(c);
    CHECK_THROWS_AS(tuple_set(2, c.kappa * c.points[2], c, p), ResourceError);
}
