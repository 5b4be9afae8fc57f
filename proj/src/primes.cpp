#include "zld/primes.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <mutex>
#include <string>

#include "zld/errors.hpp"

namespace zld {

namespace {

std::atomic<std::uint64_t> g_cap{kDefaultSieveCap};

constexpr char kMagic[8] = {'Z', 'L', 'D', 'P', 'P', 'R', 'M', '1'};

std::uint64_t isqrt(std::uint64_t n)
{
    auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<long double>(n)));
    while (r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    return r;
}

std::vector<std::uint64_t> small_sieve(std::uint64_t limit)
{
    std::vector<std::uint64_t> out;
    if (limit < 2) return out;
    std::vector<char> comp(limit + 1, 0);
    for (std::uint64_t i = 2; i <= limit; ++i) {
        if (comp[i]) continue;
        out.push_back(i);
        for (std::uint64_t j = i * i; j <= limit; j += i) comp[j] = 1;
    }
    return out;
}

std::vector<std::uint64_t> segmented(std::uint64_t limit)
{
    const std::uint64_t root = isqrt(limit);
    const auto base = small_sieve(root);
    std::vector<std::uint64_t> out;
    out.reserve(static_cast<std::size_t>(1.1 * limit / std::max(1.0, std::log(double(limit)) - 1.1)) + 16);
    out.push_back(2);
    // odd numbers only: index i stands for lo + 2i
    const std::uint64_t seg = 1ULL << 19;
    std::vector<char> mark(seg);
    for (std::uint64_t lo = 3; lo <= limit; lo += 2 * seg) {
        const std::uint64_t hi = std::min(limit, lo + 2 * seg - 1);
        const std::uint64_t cnt = (hi - lo) / 2 + 1;
        std::fill(mark.begin(), mark.begin() + cnt, 0);
        for (std::size_t k = 1; k < base.size(); ++k) {
            const std::uint64_t p = base[k];
            if (p * p > hi) break;
            std::uint64_t s = std::max(p * p, ((lo + p - 1) / p) * p);
            if (s % 2 == 0) s += p;
            for (std::uint64_t m = s; m <= hi; m += 2 * p) mark[(m - lo) / 2] = 1;
        }
        for (std::uint64_t i = 0; i < cnt; ++i)
            if (!mark[i]) out.push_back(lo + 2 * i);
    }
    return out;
}

std::shared_ptr<const std::vector<std::uint64_t>> load_cache(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) return nullptr;
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0) return nullptr;
    auto v = std::make_shared<std::vector<std::uint64_t>>();
    unsigned char buf[8];
    while (in.read(reinterpret_cast<char*>(buf), 8)) {
        std::uint64_t x = 0;
        for (int i = 7; i >= 0; --i) x = (x << 8) | buf[i];
        v->push_back(x);
    }
    if (v->empty()) return nullptr;
    return v;
}

void store_cache(const std::string& path, const std::vector<std::uint64_t>& v)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) return;
    out.write(kMagic, 8);
    unsigned char buf[8];
    for (auto x : v) {
        for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(x >> (8 * i));
        out.write(reinterpret_cast<char*>(buf), 8);
    }
}

struct Table {
    std::mutex mu;
    std::shared_ptr<const std::vector<std::uint64_t>> primes;
    std::uint64_t covered = 0;
};

Table& table()
{
    static Table t;
    return t;
}

// smallest prime factor below 10^7
constexpr std::uint32_t kSpfLimit = 10000000;

const std::vector<std::uint32_t>& spf()
{
    static const std::vector<std::uint32_t> s = [] {
        std::vector<std::uint32_t> v(kSpfLimit + 1, 0);
        for (std::uint32_t i = 2; i <= kSpfLimit; ++i) {
            if (v[i]) continue;
            for (std::uint64_t j = i; j <= kSpfLimit; j += i)
                if (!v[j]) v[j] = i;
        }
        return v;
    }();
    return s;
}

}  // namespace

long double loglog(std::uint64_t p)
{
    return std::log(std::log(static_cast<long double>(p)));
}

PrimeRange PrimeRange::upto(double x)
{
    PrimeRange r;
    if (x < 2) return r;
    r.t_hi = static_cast<double>(loglog(static_cast<std::uint64_t>(std::floor(x))));
    return r;
}

PrimeRange PrimeRange::between(double lo, double hi)
{
    PrimeRange r = upto(hi);
    if (lo >= 1) r.t_lo = static_cast<double>(loglog(static_cast<std::uint64_t>(std::floor(lo))));
    return r;
}

bool PrimeRange::contains(std::uint64_t p) const
{
    const double v = static_cast<double>(loglog(p));
    return v > t_lo && v <= t_hi;
}

std::uint64_t PrimeRange::hi_value() const
{
    if (!(t_hi > -1e300)) return 1;
    const long double x = std::exp(std::exp(static_cast<long double>(t_hi)));
    if (!(x < 1.8e19L)) return UINT64_MAX;
    return static_cast<std::uint64_t>(std::floor(x)) + 2;
}

void set_sieve_cap(std::uint64_t cap) { g_cap = cap; }
std::uint64_t sieve_cap() { return g_cap; }

std::vector<std::uint64_t> sieve_primes(std::uint64_t limit)
{
    if (limit < 2) throw DomainError("sieve_primes: limit must be >= 2");
    if (limit > sieve_cap())
        throw ResourceError("sieve limit " + std::to_string(limit) + " exceeds hard cap " +
                            std::to_string(sieve_cap()));
    if (limit < (1ULL << 20)) return small_sieve(limit);
    return segmented(limit);
}

std::shared_ptr<const std::vector<std::uint64_t>> prime_table(std::uint64_t limit)
{
    if (limit < 2) limit = 2;
    if (limit > sieve_cap())
        throw ResourceError("prime table limit " + std::to_string(limit) + " exceeds hard cap " +
                            std::to_string(sieve_cap()));
    Table& t = table();
    std::lock_guard<std::mutex> lock(t.mu);
    if (t.primes && t.covered >= limit) return t.primes;

    const char* env = std::getenv("ZLDP_SIEVE_CACHE");
    if (env && *env) {
        auto c = load_cache(env);
        // coverage of a flat file is only known up to its last prime
        if (c && c->back() >= limit) {
            t.primes = c;
            t.covered = c->back();
            return t.primes;
        }
    }
    std::uint64_t want = std::max<std::uint64_t>(limit, 1 << 16);
    if (t.covered) want = std::max(want, std::min(sieve_cap(), 2 * t.covered));
    auto v = std::make_shared<std::vector<std::uint64_t>>(sieve_primes(want));
    if (env && *env) store_cache(env, *v);
    t.primes = v;
    t.covered = want;
    return t.primes;
}

std::vector<std::pair<std::uint64_t, int>> factorize(std::uint64_t n)
{
    std::vector<std::pair<std::uint64_t, int>> f;
    if (n < 2) return f;
    auto push = [&](std::uint64_t p) {
        if (!f.empty() && f.back().first == p)
            ++f.back().second;
        else
            f.emplace_back(p, 1);
    };
    if (n <= kSpfLimit) {
        const auto& s = spf();
        while (n > 1) {
            const std::uint64_t p = s[n];
            push(p);
            n /= p;
        }
        return f;
    }
    const std::uint64_t root = isqrt(n);
    auto tab = prime_table(std::max<std::uint64_t>(root, 2));
    for (auto p : *tab) {
        if (p * p > n) break;
        while (n % p == 0) {
            push(p);
            n /= p;
        }
    }
    if (n > 1) push(n);
    return f;
}

int mobius(std::uint64_t n)
{
    if (n == 0) throw DomainError("mobius: n must be >= 1");
    int sign = 1;
    for (auto [p, e] : factorize(n)) {
        if (e > 1) return 0;
        sign = -sign;
    }
    return sign;
}

int omega_in_range(std::uint64_t m, const PrimeRange& r)
{
    if (m == 0) throw DomainError("omega_in_range: m must be >= 1");
    int c = 0;
    for (auto [p, e] : factorize(m))
        if (r.contains(p)) c += e;
    return c;
}

std::vector<std::uint64_t> primes_in_range(const PrimeRange& r)
{
    std::vector<std::uint64_t> out;
    if (r.empty()) return out;
    const std::uint64_t hi = r.hi_value();
    if (hi > sieve_cap())
        throw ResourceError("prime range upper end exceeds sieve cap " + std::to_string(sieve_cap()));
    if (hi < 2) return out;
    auto tab = prime_table(hi);
    std::uint64_t lo_guess = 0;
    if (r.t_lo > -1e300) {
        const long double x = std::exp(std::exp(static_cast<long double>(r.t_lo)));
        lo_guess = x > 3 ? static_cast<std::uint64_t>(x) - 2 : 0;
    }
    auto it = std::lower_bound(tab->begin(), tab->end(), lo_guess);
    for (; it != tab->end() && *it <= hi; ++it)
        if (r.contains(*it)) out.push_back(*it);
    return out;
}

}  // namespace zld
