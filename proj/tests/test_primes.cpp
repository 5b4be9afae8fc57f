#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <numeric>

#include "zld/errors.hpp"
#include "zld/primes.hpp"
#include "zld/rng.hpp"

using namespace zld;

namespace {

bool is_prime_td(std::uint64_t n)
{
    if (n < 2) return false;
    for (std::uint64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

int mobius_td(std::uint64_t n)
{
    int s = 1;
    for (std::uint64_t d = 2; d * d <= n; ++d) {
        if (n % d) continue;
        n /= d;
        if (n % d == 0) return 0;
        s = -s;
    }
    if (n > 1) s = -s;
    return s;
}

}  // namespace

TEST_CASE("sieve small cases")
{
    CHECK(sieve_primes(10) == std::vector<std::uint64_t>{2, 3, 5, 7});
    CHECK(sieve_primes(2) == std::vector<std::uint64_t>{2});
    CHECK_THROWS_AS(sieve_primes(1), DomainError);
}

TEST_CASE("sieve matches trial division")
{
    auto v = sieve_primes(1000000);
    std::size_t cnt = 0;
    for (std::uint64_t n = 2; n <= 1000000; ++n) cnt += is_prime_td(n);
    CHECK(v.size() == cnt);
    CHECK(v.size() == 78498);
    for (std::size_t i = 1; i < v.size(); ++i) REQUIRE(v[i] > v[i - 1]);
    for (std::size_t i = 0; i < v.size(); i += 997) CHECK(is_prime_td(v[i]));
}

TEST_CASE("segmented sieve counts")
{
    CHECK(sieve_primes(10000000).size() == 664579);
    auto v = sieve_primes((1 << 20) + 7);
    std::size_t cnt = 0;
    for (std::uint64_t n = 2; n <= (1 << 20) + 7; ++n) cnt += is_prime_td(n);
    CHECK(v.size() == cnt);
}

TEST_CASE("sieve cap is a resource error")
{
    set_sieve_cap(1000);
    CHECK_THROWS_AS(sieve_primes(1001), ResourceError);
    try {
        sieve_primes(5000);
    } catch (const ResourceError& e) {
        CHECK(std::string(e.what()).find("1000") != std::string::npos);
    }
    set_sieve_cap(kDefaultSieveCap);
}

TEST_CASE("mobius")
{
    CHECK(mobius(1) == 1);
    CHECK(mobius(4) == 0);
    CHECK(mobius(30) == -1);
    CHECK_THROWS_AS(mobius(0), DomainError);
    for (std::uint64_t n = 1; n < 3000; ++n) REQUIRE(mobius(n) == mobius_td(n));
    CHECK(mobius(10000019ULL * 3) == mobius_td(10000019ULL * 3));
}

TEST_CASE("mobius multiplicative on coprime pairs")
{
    for (std::uint64_t i = 0; i < 2000; ++i) {
        const auto a = 1 + (hash2(7, i) % 1000000);
        const auto b = 1 + (hash2(8, i) % 1000000);
        if (std::gcd(a, b) != 1) continue;
        REQUIRE(mobius(a * b) == mobius(a) * mobius(b));
    }
}

TEST_CASE("omega_in_range")
{
    const auto r23 = PrimeRange::upto(3);
    CHECK(omega_in_range(12, r23) == 3);
    CHECK(omega_in_range(1, r23) == 0);
    const auto r7 = PrimeRange::between(5, 7);
    CHECK(omega_in_range(2 * 7 * 7 * 7, r7) == 3);
    const auto r = PrimeRange::between(10, 100);
    for (std::uint64_t m = 1; m < 500; ++m)
        for (std::uint64_t p : {11, 13, 97})
            REQUIRE(omega_in_range(m * p, r) == omega_in_range(m, r) + 1);
}

TEST_CASE("primes_in_range")
{
    PrimeRange r;
    r.t_hi = std::log(std::log(10.0));
    CHECK(primes_in_range(r) == std::vector<std::uint64_t>{2, 3, 5, 7});
    PrimeRange e{1.0, 1.0};
    CHECK(primes_in_range(e).empty());
    CHECK(primes_in_range(PrimeRange::upto(100)).size() == 25);
    CHECK(primes_in_range(PrimeRange::upto(7)).back() == 7);
}

TEST_CASE("consecutive ranges partition the primes")
{
    const double pts[] = {-INFINITY, 0.3, 1.0, 1.5, 2.2, 2.5};
    std::vector<std::uint64_t> all;
    for (int i = 0; i + 1 < 6; ++i) {
        auto v = primes_in_range({pts[i], pts[i + 1]});
        all.insert(all.end(), v.begin(), v.end());
    }
    auto ref = primes_in_range({-INFINITY, 2.5});
    CHECK(all == ref);
    CHECK(ref.size() > 1000);
}

TEST_CASE("range beyond the cap")
{
    set_sieve_cap(1 << 20);
    CHECK_THROWS_AS(primes_in_range({-INFINITY, 3.0}), ResourceError);
    set_sieve_cap(kDefaultSieveCap);
}

TEST_CASE("sieve cache file")
{
    const auto path = std::filesystem::temp_directory_path() / "zld_prime_cache_test.bin";
    std::filesystem::remove(path);
    setenv("ZLDP_SIEVE_CACHE", path.c_str(), 1);
    auto t = prime_table(3000000);
    CHECK(std::filesystem::exists(path));
    std::FILE* f = std::fopen(path.c_str(), "rb");
    REQUIRE(f);
    char magic[8];
    REQUIRE(std::fread(magic, 1, 8, f) == 8);
    std::fclose(f);
    CHECK(std::string(magic, 8) == "ZLDPPRM1");
    CHECK(std::filesystem::file_size(path) == 8 + 8 * t->size());
    unsetenv("ZLDP_SIEVE_CACHE");
    std::filesystem::remove(path);
}
