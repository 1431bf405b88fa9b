#pragma once

#include "ppinv/rng.hpp"

#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace ppinv {

inline int worker_count() {
    if (const char* env = std::getenv("PPINV_WORKERS")) {
        const int w = std::atoi(env);
        if (w >= 1) return w;
    }
    return 1;
}

// Deterministic chunked Monte Carlo driver.  The sample range is split into a
// fixed number of chunks regardless of the worker count; chunk c draws from
// streams (seed, base + 2c) and (seed, base + 2c + 1), and the per-chunk
// accumulators are merged in chunk order.  Results are therefore identical
// for any PPINV_WORKERS setting.
//
// Accum needs: default construction and merge(const Accum&).
// Body signature: (long sample_index, rng_stream& cfg, rng_stream& quad, Accum&).
template <typename Accum, typename Body>
Accum mc_chunked(long samples, std::uint64_t seed, std::uint64_t stream_base, Body body,
                 int workers = worker_count()) {
    const long chunk_count = samples < 64 ? (samples > 0 ? samples : 1) : 64;
    const long chunk_size = (samples + chunk_count - 1) / chunk_count;

    std::vector<Accum> partial(chunk_count);
    std::atomic<long> next{0};
    auto run = [&]() {
        for (;;) {
            const long c = next.fetch_add(1);
            if (c >= chunk_count) return;
            rng_stream cfg(seed, stream_base + 2 * static_cast<std::uint64_t>(c));
            rng_stream quad(seed, stream_base + 2 * static_cast<std::uint64_t>(c) + 1);
            const long lo = c * chunk_size;
            const long hi = std::min(samples, lo + chunk_size);
            for (long i = lo; i < hi; ++i) body(i, cfg, quad, partial[c]);
        }
    };

    if (workers <= 1) {
        run();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) pool.emplace_back(run);
        for (auto& t : pool) t.join();
    }

    Accum total;
    for (const auto& p : partial) total.merge(p);
    return total;
}

} // namespace ppinv
