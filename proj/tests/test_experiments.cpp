#include <cmath>

#include "doctest.h"
#include "zld/errors.hpp"
#include "zld/experiments.hpp"
#include "zld/parallel.hpp"

using namespace zld;

namespace {

const SampleCache& cache_1e6()
{
    static const SampleCache c = build_cache(1e6, 20000, 42);
    return c;
}

const SampleCache& cache_1e7()
{
    static const SampleCache c = build_cache(1e7, 5000, 42);
    return c;
}

const WindowSet& windows_theta1()
{
    static const WindowSet w = sample_windows(1e6, 1.0, 200, 42);
    return w;
}

}  // namespace

TEST_CASE("csv formatting")
{
    Table t;
    t.columns = {"a", "b"};
    t.add({fmt(0.1), fmt(std::uint64_t{12})});
    t.add({fmt(1.0 / 3), fmt(1e-20)});
    CHECK(t.csv() == "a,b\n0.1,12\n0.333333333333,1e-20\n");
    CHECK_THROWS_AS(t.add({"x"}), DomainError);
}

TEST_CASE("tail")
{
    const auto& c = cache_1e6();
    // log|zeta| has mean ~0 but a long left tail, so its median is positive at this height
    double m = 0, m2 = 0;
    for (double x : c.log_abs) {
        m += x;
        m2 += x * x;
    }
    m /= double(c.size());
    const double se = std::sqrt((m2 / double(c.size()) - m * m) / double(c.size()));
    CHECK(std::fabs(m) < 3 * se);
    const auto e0 = tail_at(c, 0.0);
    CHECK(e0.p_hat > 0.5);
    CHECK(e0.p_hat < 0.6);
    const auto far = tail_at(c, 100.0);
    CHECK(far.n_exceed == 0);
    CHECK(far.wide_interval);
    CHECK(std::isnan(far.ratio));
    CHECK(far.upper_bound == doctest::Approx(1 - std::pow(0.05, 1.0 / double(c.size()))));
    CHECK(far.upper_bound < 2e-4);

    const auto rows = tail_experiment(c, {0.2, 0.4, 0.6, 0.8, 1.0, 1.2});
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].p_hat <= rows[i - 1].p_hat);
    CHECK_THROWS_AS(tail_experiment(c, {2.5}), DomainError);
    CHECK_THROWS_AS(tail_experiment(c, {0.0}), DomainError);

    const auto r8 = tail_experiment(cache_1e7(), {0.8})[0];
    CHECK(r8.n_exceed > 0);
    CHECK(std::isfinite(r8.ratio));
    CHECK(r8.stderr_ > 0);
}

TEST_CASE("fractional moments")
{
    const auto m2 = fractional_moment(cache_1e7(), 2.0);
    CHECK(m2.M_hat / std::log(1e7) >= 0.7);
    CHECK(m2.M_hat / std::log(1e7) <= 1.4);
    for (double b : {0.5, 1.0, 2.0, 3.5}) {
        const auto m = fractional_moment(cache_1e6(), b);
        INFO("beta=" << b);
        CHECK(m.layered_rel_diff < 1e-10);
        CHECK(m.negative_part > 0);
        CHECK(m.negative_part < m.layered);
    }
    CHECK(fractional_moment(cache_1e6(), 1e-8).M_hat == doctest::Approx(1.0).epsilon(1e-6));
    CHECK_THROWS_AS(fractional_moment(cache_1e6(), 4.0), DomainError);
    CHECK_THROWS_AS(fractional_moment(cache_1e6(), 0.0), DomainError);
}

TEST_CASE("moment anchors")
{
    const auto f = fourth_moment_anchor(cache_1e6());
    const double L = std::log(1e6);
    CHECK(f.reference / (L * L * L * L) == doctest::Approx(0.050661).epsilon(1e-5));
    CHECK(f.ratio > 0.5);
    CHECK(f.ratio < 2.5);
    const auto s = second_moment_anchor(cache_1e6());
    CHECK(s.ratio == doctest::Approx(1.0).epsilon(0.2));
    const auto small = build_cache(1e4, 10, 1);
    CHECK_THROWS_AS(fourth_moment_anchor(small), DomainError);
    const auto ks = selberg_ks(cache_1e6());
    CHECK(ks.distance < 0.1);
    CHECK(ks.scale == doctest::Approx(std::sqrt(std::log(std::log(1e6)) / 2)));
}

TEST_CASE("windows")
{
    const auto& w = windows_theta1();
    CHECK(w.h <= 1 / std::log(1e6) + 1e-15);
    for (const auto& v : w.log_abs) {
        CHECK(window_moment(v, 0) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(window_level(v, -1e300) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(window_level(v, 1e300) == 0.0);
        double prev = 2;
        for (double V = -5; V < 6; V += 0.5) {
            const double s = window_level(v, V);
            CHECK(s <= prev);
            prev = s;
        }
    }
    CHECK_THROWS_AS(sample_windows(1e6, 3.0, 1, 1), DomainError);
    CHECK_THROWS_AS(sample_windows(1e6, 1.0, 1, 1, 2.0), DomainError);
}

TEST_CASE("discretization")
{
    const auto a = sample_windows(1e6, 0.5, 30, 7);
    const auto b = sample_windows(1e6, 0.5, 30, 7, 0.5);
    for (std::size_t i = 0; i < a.centers.size(); ++i) {
        const double ma = *std::max_element(a.log_abs[i].begin(), a.log_abs[i].end());
        const double mb = *std::max_element(b.log_abs[i].begin(), b.log_abs[i].end());
        CHECK(std::fabs(mb - ma) < std::log(2.0));
    }
}

TEST_CASE("short interval max")
{
    CHECK(beta_c(0) == 2.0);
    CHECK(beta_c(3) == 4.0);
    const double t = 3.0;
    CHECK(max_level(t, 0) == doctest::Approx(t - std::log(t) / 4));
    const auto r = short_interval_max(windows_theta1(), {0, 1, 2});
    REQUIRE(r.rows.size() == 3);
    CHECK(r.rows[0].freq > r.rows[1].freq);
    CHECK(r.rows[1].freq >= r.rows[2].freq);
    CHECK(r.rows[0].reference == 1.0);
    CHECK(r.level_S.front() > 0.9);
    CHECK(r.level_S.back() == 0.0);
}

TEST_CASE("short interval moments")
{
    const auto& w = windows_theta1();
    const auto r = short_interval_moments(w, {0, 1, 2, 3, 4}, {2, 10});
    REQUIRE(r.per_beta.size() == 5);
    for (double z : r.per_beta[0].per_window) CHECK(z == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(r.thresholds.size() == 10);
    for (const auto& row : r.thresholds) CHECK(row.reference == 1 / row.A);
    REQUIRE(r.super.size() == 2);  // beta above 2 sqrt 2
    CHECK(r.super[0].beta == 3.0);
    CHECK(r.super[0].median_Z > 0);

    for (const auto& a : subcritical_weights(2, 3, 1, 5)) CHECK(a.a >= 5 * 0.01 - 1e-15);
    const auto sup = supercritical_weights(4, 3, 1, 5);
    CHECK(!sup.empty());
    for (const auto& a : sup) CHECK(a.a >= 5.0);

    const auto f = freezing_fit(w);
    CHECK(f.beta.size() == 81);
    for (std::size_t i = 1; i < f.slope.size(); ++i) CHECK(f.slope[i] >= f.slope[i - 1] - 1e-12);
    CHECK(f.rel_error < 0.2);
}

TEST_CASE("critical")
{
    const auto w = sample_windows(1e6, 0.0, 300, 3);
    const auto r = critical_check(w, {-30, 0, 1, 2});
    CHECK(r.rows[0].S > 0.95);
    CHECK(r.rows[1].S > r.rows[2].S);
    CHECK(r.rows[2].S >= r.rows[3].S);
    CHECK(std::isfinite(r.z2_scaled));
    CHECK(r.z2_scaled > 0);
    CHECK_THROWS_AS(critical_check(windows_theta1(), {0}), DomainError);
}

TEST_CASE("event pipeline")
{
    const auto r = event_pipeline(1e6, 1.0, 2000, 5, ConstantsLedger::desk());
    CHECK(r.L == 1);
    CHECK(r.partition.sum() == r.partition.count_H);
    std::size_t pieces = 0;
    for (std::size_t i = 0; i + 1 < r.count.size(); ++i) pieces += r.count[i];
    CHECK(pieces == r.count.back());
    CHECK(r.inclusion_samples > 1000);
    CHECK(r.inclusion_violations == 0);
    const auto hi = event_pipeline(1e6, 1.5, 500, 5, ConstantsLedger::desk());
    CHECK(hi.partition.count_H == 0);
    for (double u : hi.upper_bound) CHECK(u > 0);
    CHECK_THROWS_AS(event_pipeline(1e6, 1.0, 10, 5, ConstantsLedger::paper()), ConfigError);
}

TEST_CASE("mollifier sweep")
{
    const auto s = mollifier_sweep(1e6, 2000, 9, ConstantsLedger::desk());
    CHECK(s.n_precondition > 0);
    CHECK(s.fraction >= 0.99);
    for (const auto& v : s.violations) CHECK(v.lhs > v.rhs);
}

TEST_CASE("thread count invariance")
{
    set_threads(1);
    const auto a = sample_windows(1e5, 0.5, 16, 11);
    const auto ca = build_cache(1e5, 64, 11);
    set_threads(4);
    const auto b = sample_windows(1e5, 0.5, 16, 11);
    const auto cb = build_cache(1e5, 64, 11);
    set_threads(1);
    CHECK(a.log_abs == b.log_abs);
    CHECK(ca.log_abs == cb.log_abs);
}
