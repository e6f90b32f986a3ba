#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace gou {

inline int default_threads() {
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

// Static chunked partition of [0, n). Each task writes its own output
// slots and owns its RNG substreams, so results are independent of the
// parallelism degree.
inline void parallel_for(std::size_t n, int threads,
                         const std::function<void(std::size_t, std::size_t)>& body) {
    if (threads <= 0) threads = default_threads();
    if (threads == 1 || n <= 1) {
        if (n > 0) body(0, n);
        return;
    }
    const std::size_t nt = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    std::vector<std::thread> pool;
    pool.reserve(nt);
    const std::size_t chunk = (n + nt - 1) / nt;
    for (std::size_t t = 0; t < nt; ++t) {
        const std::size_t b = t * chunk;
        const std::size_t e = std::min(n, b + chunk);
        if (b >= e) break;
        pool.emplace_back(body, b, e);
    }
    for (auto& th : pool) th.join();
}

}  // namespace gou
