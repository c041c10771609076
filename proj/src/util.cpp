#include "kfp/util.hpp"

#include <cstdio>
#include <thread>
#include <vector>

namespace kfp {

void parallel_for(std::size_t n, int workers,
                  const std::function<void(std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    if (workers <= 1 || n == 1) {
        fn(0, n);
        return;
    }
    const std::size_t nthreads = std::min<std::size_t>(workers, n);
    const std::size_t chunk = (n + nthreads - 1) / nthreads;
    std::vector<std::thread> threads;
    threads.reserve(nthreads);
    for (std::size_t t = 0; t < nthreads; ++t) {
        const std::size_t lo = t * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        threads.emplace_back([&, lo, hi] { fn(lo, hi); });
    }
    for (auto& th : threads) th.join();
}

std::string format_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace kfp
