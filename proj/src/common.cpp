#include "pinnsel/common.hpp"

#include <atomic>
#include <thread>

namespace pinnsel {

void parallel_chunks(std::size_t n, std::size_t chunk_size, int threads,
                     const std::function<void(std::size_t, std::size_t,
                                              std::size_t)>& fn) {
    if (n == 0) return;
    const std::size_t chunks = chunk_count(n, chunk_size);
    int workers = threads;
    if (workers <= 0) {
        workers = static_cast<int>(std::thread::hardware_concurrency());
        if (workers <= 0) workers = 1;
    }
    workers = static_cast<int>(
        std::min<std::size_t>(static_cast<std::size_t>(workers), chunks));

    if (workers <= 1) {
        for (std::size_t c = 0; c < chunks; ++c) {
            const std::size_t begin = c * chunk_size;
            const std::size_t end = std::min(begin + chunk_size, n);
            fn(begin, end, c);
        }
        return;
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t c = next.fetch_add(1);
            if (c >= chunks) break;
            const std::size_t begin = c * chunk_size;
            const std::size_t end = std::min(begin + chunk_size, n);
            fn(begin, end, c);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers) - 1);
    for (int i = 1; i < workers; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
}

}  // namespace pinnsel
