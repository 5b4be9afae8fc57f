#include <cmath>

#include "doctest.h"
#include "zld/dirichlet.hpp"
#include "zld/errors.hpp"
#include "zld/parallel.hpp"
#include "zld/rng.hpp"
#include "zld/zeta.hpp"

using namespace zld;

namespace {

MollifierSpec spec_for(double lo, double hi, int cap)
{
    MollifierSpec s;
    s.range = PrimeRange::between(lo, hi);
    s.omega_cap = cap;
    return s;
}

DirichletPolynomial random_poly(std::uint64_t seed, std::uint64_t N, int terms)
{
    DirichletPolynomial p;
    for (int i = 0; i < terms; ++i) {
        const auto n = 1 + static_cast<std::uint64_t>(u01(seed, 3 * i) * static_cast<double>(N));
        p.set(n, cplx(2 * u01(seed, 3 * i + 1) - 1, 2 * u01(seed, 3 * i + 2) - 1));
    }
    return p;
}

}  // namespace

TEST_CASE("partial sums")
{
    auto r = partial_sum(0.0, -1.0, true);
    CHECK(r.first == 0.0);
    CHECK(r.second == cplx(0, 0));
    // exp(e^k) in (3, 5): primes {2, 3}
    const double k = std::log(std::log(4.0));
    r = partial_sum(0.0, k, false);
    CHECK(r.first == doctest::Approx(1 / std::sqrt(2.0) + 1 / std::sqrt(3.0)).epsilon(1e-14));
    CHECK(r.first == doctest::Approx(1.28445).epsilon(1e-5));
    for (double tau : {13.7, 1e6 + 0.3, 5e9}) {
        const auto [S, St] = partial_sum(tau, 1.9, true);
        CHECK(S == doctest::Approx(St.real()).epsilon(1e-13));
    }
    CHECK_THROWS_AS(partial_sum(1.0, 4.0, false), ResourceError);
}

TEST_CASE("increments telescope")
{
    const auto c = build_ladder(1e7, 1.0, 0, ConstantsLedger::desk());
    for (double tau : {1e7 + 1.5, 1.7e7}) {
        CHECK(increment(tau, 1, c) == doctest::Approx(partial_sum(tau, c.points[1], true).first).epsilon(1e-13));
        const double tot = increment(tau, 1, c) + increment(tau, 2, c);
        CHECK(std::fabs(tot - partial_sum(tau, c.points[2], true).first) < 1e-12);
    }
    CHECK_THROWS_AS(increment(1.0, 3, c), DomainError);
    CHECK_THROWS_AS(increment(1.0, 0, c), DomainError);

    PrimeBlock b(PrimeRange::between(4, 8));  // {5, 7}
    REQUIRE(b.p.size() == 2);
    const double want = 1 / std::sqrt(5.0) + 1 / std::sqrt(7.0) + 0.1 + 1.0 / 14;
    CHECK(b.sums(0.0, true).first == doctest::Approx(want).epsilon(1e-14));
    CHECK(want == doctest::Approx(0.996607).epsilon(1e-6));
}

TEST_CASE("mollifier enumeration")
{
    auto m = mollifier(spec_for(1, 3, 2));
    CHECK(m.coeffs.size() == 4);
    CHECK(m.coeffs.at(1) == cplx(1));
    CHECK(m.coeffs.at(2) == cplx(-1));
    CHECK(m.coeffs.at(3) == cplx(-1));
    CHECK(m.coeffs.at(6) == cplx(1));
    CHECK(m.length == 6);

    m = mollifier(spec_for(1, 3, 1));
    CHECK(m.coeffs.size() == 3);
    CHECK(m.coeffs.count(6) == 0);

    MollifierSpec e;
    m = mollifier(e);
    CHECK(m.coeffs.size() == 1);
    CHECK(m.coeffs.at(1) == cplx(1));

    auto s = spec_for(1, 200, 6);
    s.length_cap = 100;
    CHECK_THROWS_AS(mollifier(s), ResourceError);
}

TEST_CASE("mollifier coefficients are Mobius on squarefree support")
{
    const auto c = build_ladder(1e6, 1.0, 0, ConstantsLedger::desk());
    auto s = mollifier_spec(1, c);
    CHECK(s.omega_cap == static_cast<int>(std::floor(std::pow(c.points[1], 3))));
    s.value_cap = 200000;
    const auto m = mollifier(s);
    CHECK(m.support_ok());
    for (const auto& [n, a] : m.coeffs) {
        CHECK(a.real() == mobius(n));
        CHECK(mobius(n) != 0);
        CHECK(omega_in_range(n, s.range) <= s.omega_cap);
    }
}

TEST_CASE("mollifier evaluation routes agree")
{
    // symmetric-polynomial value equals the enumerated polynomial when no value cap binds
    MollifierSpec s = spec_for(1, 60, 3);
    const auto m = mollifier(s);
    PrimeBlock b(s.range);
    for (double tau : {0.0, 17.25, 1e6 + 0.5}) {
        const cplx a = evaluate(m, tau), e = b.mollifier(tau, 3);
        CHECK(std::abs(a - e) < 1e-12);
    }
}

TEST_CASE("evaluate")
{
    CHECK(evaluate(DirichletPolynomial::constant(1), 123.4) == cplx(1, 0));
    DirichletPolynomial p;
    p.set(1, 1);
    p.set(4, 1);
    CHECK(evaluate(p, 0.0).real() == doctest::Approx(1.5));
    const auto A = mollifier(spec_for(1, 10, 4));
    const auto B = mollifier(spec_for(10, 40, 4));
    const auto AB = multiply(A, B);
    for (double tau : {3.5, 1e5 + 0.25, 4e8}) CHECK(std::abs(evaluate(AB, tau) - evaluate(A, tau) * evaluate(B, tau)) < 1e-10);
    CHECK_THROWS_AS(p.set(2, cplx(NAN, 0)), DomainError);
}

TEST_CASE("mean value lemma")
{
    DirichletPolynomial p;
    p.set(2, 1);
    p.set(3, 1);
    auto r = mean_value_check(p, 1e6, 20000, 1);
    CHECK(r.reference == 2.0);
    CHECK(std::fabs(r.estimate - 2) < 3 * r.stderr_);

    r = mean_value_check(DirichletPolynomial::constant(cplx(0.6, 0.8)), 1e6, 100, 2);
    CHECK(r.estimate == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r.reference == doctest::Approx(1.0).epsilon(1e-15));

    const auto q = random_poly(9, 1000, 200);
    r = mean_value_check(q, 1e7, 100000, 3);
    CHECK(std::fabs(r.ratio - 1) < 0.01);

    DirichletPolynomial big;
    big.set(2000, 1);
    CHECK_THROWS_AS(mean_value_check(big, 1000, 10, 1), DomainError);
}

TEST_CASE("splitting lemma")
{
    DirichletPolynomial A, B;
    A.set(2, 1);
    B.set(3, 1);
    auto r = splitting_check(A, DirichletPolynomial::constant(1), 1e6, 500, 4);
    CHECK(r.ratio == 1.0);
    r = splitting_check(A, B, 1e6, 20000, 5);
    CHECK(std::fabs(r.ratio - 1) < 3 * r.ratio_stderr);
    CHECK_THROWS_AS(splitting_check(B, A, 1e6, 10, 1), DomainError);
    DirichletPolynomial L;
    L.set(37, 1);
    CHECK_THROWS_AS(splitting_check(A, L, 1e6, 10, 1), DomainError);
}

TEST_CASE("moment bounds")
{
    const double T = 1e6, t = std::log(std::log(T));
    const double j = t / 2, k = t - std::log(2.0) - 0.01;
    auto r = moment_bound_check(j, k, 1, T, 20000, 6, MomentVariant::real_);
    CHECK(r.reference == doctest::Approx((k - j) / 2));
    const double var = PrimeBlock(PrimeRange{j, k}).variance(true);
    CHECK(std::fabs(r.estimate - var) < 4 * r.stderr_);

    r = moment_bound_check(j, k, 0, T, 100, 6, MomentVariant::complex_);
    CHECK(r.estimate == 1.0);
    CHECK(r.reference == 1.0);

    // q = 2 needs t >= 2 log 4, i.e. T above ~1e7
    const double T8 = 1e8, t8 = std::log(std::log(T8));
    r = moment_bound_check(t8 / 2, t8 - std::log(4.0), 2, T8, 20000, 7, MomentVariant::complex_);
    CHECK(r.ratio <= 3);
    CHECK(r.tail_q >= 1);
    CHECK_THROWS_AS(moment_bound_check(j, t - 0.1, 2, T, 10, 1, MomentVariant::real_), DomainError);
    CHECK_THROWS_AS(moment_bound_check(0.1, 1.0, 1, T, 10, 1, MomentVariant::real_), DomainError);
}

TEST_CASE("mollifier inequality")
{
    const auto c = build_ladder(1e6, 1.0, 0, ConstantsLedger::desk());
    PrimeBlock empty;
    const auto tr = mollifier_inequality_check(5.0, 0, c, empty);
    CHECK(tr.lhs == 1.0);
    CHECK(tr.rhs > 2.0);
    CHECK(tr.holds);

    std::size_t ok = 0, n = 0;
    const auto taus = sample_tau(1e6, 2000, 8);
    for (const auto& h : taus) {
        const auto m = mollifier_inequality_check(h.t, 0, c);
        if (!m.precondition) continue;
        ++n;
        ok += m.holds;
    }
    CHECK(n > 0);
    CHECK(static_cast<double>(ok) >= 0.99 * static_cast<double>(n));
    CHECK_THROWS_AS(mollifier_inequality_check(1.0, 1, c), DomainError);
}

TEST_CASE("well factorable")
{
    const auto c = build_ladder(1e7, 1.0, 0, ConstantsLedger::desk());
    CHECK(well_factorable_check({DirichletPolynomial::constant(1)}, c));
    DirichletPolynomial bad;
    bad.set(1, 1);
    bad.set(2, 1);
    CHECK_FALSE(well_factorable_check({DirichletPolynomial::constant(1), bad}, c));

    auto s1 = mollifier_spec(1, c), s2 = mollifier_spec(2, c);
    s1.value_cap = s2.value_cap = 100000;
    CHECK(well_factorable_check({mollifier(s1), mollifier(s2)}, c));
    DirichletPolynomial wrong_slot;
    wrong_slot.set(1, 1);
    wrong_slot.set(2003, -1);  // block 2 prime placed in slot 1
    CHECK_FALSE(well_factorable_check({wrong_slot}, c));
    CHECK(well_factorable_check({DirichletPolynomial::constant(1), wrong_slot}, c));
}

TEST_CASE("twisted fourth moment probe")
{
    const auto c = build_ladder(1e6, 1.0, 0, ConstantsLedger::desk());
    const auto r = twisted_fourth_moment_probe({DirichletPolynomial::constant(1)}, 0, c, 1e6, 400, 10);
    CHECK(r.level == 1);
    CHECK(std::isfinite(r.ratio));
    CHECK(r.lhs_stderr > 0);
    CHECK(r.rhs == doctest::Approx(std::exp(4 * (c.t - c.points[1]))));
    const auto e = twisted_fourth_moment_probe({}, c.L_count, c, 1e6, 50, 10);
    CHECK(e.level == c.L_count);
    DirichletPolynomial bad;
    bad.set(1009, 1);
    CHECK_THROWS_AS(twisted_fourth_moment_probe({bad}, 0, c, 1e6, 10, 1), DomainError);
}

TEST_CASE("thread count does not change results")
{
    const auto q = random_poly(21, 500, 50);
    set_threads(1);
    const auto a = mean_value_check(q, 1e6, 3000, 11);
    set_threads(4);
    const auto b = mean_value_check(q, 1e6, 3000, 11);
    set_threads(1);
    CHECK(a.estimate == b.estimate);
    CHECK(a.stderr_ == b.stderr_);
}
