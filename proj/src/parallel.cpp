#include "drf/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace drf {

int thread_count() {
    static const int cached = [] {
        const char* env = std::getenv("DRF_THREADS");
        if (!env) return 1;
        const int n = std::atoi(env);
        return n > 0 ? n : 1;
    }();
    return cached;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers =
        std::min(static_cast<std::size_t>(thread_count()), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    const std::size_t block = (n + workers - 1) / workers;
    auto run = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
    };
    for (std::size_t w = 1; w < workers; ++w) {
        const std::size_t lo = w * block;
        const std::size_t hi = std::min(n, lo + block);
        if (lo < hi) pool.emplace_back(run, lo, hi);
    }
    run(0, std::min(n, block));
    for (auto& t : pool) t.join();
}

} // namespace drf
