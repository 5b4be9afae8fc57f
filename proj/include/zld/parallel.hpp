#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace zld {

// worker count used by every Monte Carlo loop; default 1
void set_threads(int n);
int threads();

// Runs f(i) for i in [0,n).  Work is split in contiguous chunks; callers
// write into per-index slots and reduce serially afterwards, which keeps
// results independent of the worker count.
template <class F>
void parallel_for(std::size_t n, F&& f)
{
    const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(threads()), n);
    if (w <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(w);
    const std::size_t chunk = (n + w - 1) / w;
    for (std::size_t k = 0; k < w; ++k) {
        pool.emplace_back([&, k] {
            try {
                const std::size_t lo = k * chunk, hi = std::min(n, lo + chunk);
                for (std::size_t i = lo; i < hi; ++i) f(i);
            } catch (...) {
                errs[k] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

}  // namespace zld
