#pragma once
// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 riskbounds contributors

#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace riskbounds {

/**
 * Runs `per_chunk(chunk_index, begin, end)` over fixed-size chunks of
 * [0, total) and merges the per-chunk accumulators in chunk order.
 * Chunk boundaries depend only on (total, chunk_size), so the merged
 * result is bit-identical for every `jobs` value.
 */
template <typename Acc, typename ChunkFn, typename MergeFn>
Acc chunked_reduce(std::size_t total, std::size_t chunk_size, unsigned jobs, ChunkFn per_chunk, MergeFn merge,
                   Acc init) {
    if (total == 0) return init;
    if (chunk_size == 0) chunk_size = 1;
    const std::size_t num_chunks = (total + chunk_size - 1) / chunk_size;
    std::vector<Acc> partials(num_chunks);

    if (jobs == 0) jobs = std::thread::hardware_concurrency();
    if (jobs == 0) jobs = 1;
    jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, num_chunks));

    if (jobs <= 1) {
        for (std::size_t c = 0; c < num_chunks; ++c) {
            const std::size_t b = c * chunk_size;
            const std::size_t e = std::min(total, b + chunk_size);
            partials[c] = per_chunk(c, b, e);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr first_error;
        std::atomic<bool> failed{false};
        auto worker = [&]() {
            for (;;) {
                const std::size_t c = next.fetch_add(1);
                if (c >= num_chunks || failed.load()) return;
                const std::size_t b = c * chunk_size;
                const std::size_t e = std::min(total, b + chunk_size);
                try {
                    partials[c] = per_chunk(c, b, e);
                } catch (...) {
                    if (!failed.exchange(true)) first_error = std::current_exception();
                    return;
                }
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(jobs);
        for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
        if (failed.load()) std::rethrow_exception(first_error);
    }

    Acc out = init;
    for (std::size_t c = 0; c < num_chunks; ++c) merge(out, partials[c]);
    return out;
}

}  // namespace riskbounds
