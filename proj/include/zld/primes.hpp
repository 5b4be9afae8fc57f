#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <vector>

namespace zld {

// Primes p with log log p in (t_lo, t_hi].  t_lo = -inf admits p = 2.
struct PrimeRange {
    double t_lo = -std::numeric_limits<double>::infinity();
    double t_hi = -std::numeric_limits<double>::infinity();

    static PrimeRange upto(double x);          // p <= x
    static PrimeRange between(double lo, double hi);  // lo < p <= hi

    bool empty() const { return !(t_hi > t_lo); }
    bool contains(std::uint64_t p) const;
    // integer bound covering every member, floor(exp(e^t_hi)) plus slack
    std::uint64_t hi_value() const;
};

// log log p evaluated in long double; the single membership test used everywhere
long double loglog(std::uint64_t p);

constexpr std::uint64_t kDefaultSieveCap = 1ULL << 34;

void set_sieve_cap(std::uint64_t cap);
std::uint64_t sieve_cap();

std::vector<std::uint64_t> sieve_primes(std::uint64_t limit);

// shared ascending table covering at least `limit`; grows on demand,
// optionally backed by the file named in ZLDP_SIEVE_CACHE
std::shared_ptr<const std::vector<std::uint64_t>> prime_table(std::uint64_t limit);

int mobius(std::uint64_t n);

// multiplicity weighted count of prime factors of m inside r
int omega_in_range(std::uint64_t m, const PrimeRange& r);

std::vector<std::uint64_t> primes_in_range(const PrimeRange& r);

// (prime, exponent) pairs
std::vector<std::pair<std::uint64_t, int>> factorize(std::uint64_t n);

}  // namespace zld
