#pragma once

#include "nmlc/quadrature.hpp"

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace nmlc::detail {

inline constexpr std::size_t kChunk = 4096;

/// Sums chunk(begin, end) over fixed-size chunks of [0, n). Chunk boundaries
/// do not depend on the worker count and chunk results are combined in index
/// order, so the result is identical for any number of threads.
template <typename ChunkFn>
double parallel_sum(std::size_t n, ChunkFn&& chunk)
{
    const std::size_t chunks = (n + kChunk - 1) / kChunk;
    std::vector<double> partial(chunks, 0.0);
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_count(), chunks));

    auto run = [&](unsigned w) {
        for (std::size_t c = w; c < chunks; c += workers)
            partial[c] = chunk(c * kChunk, std::min(n, (c + 1) * kChunk));
    };
    if (workers <= 1) {
        run(0);
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
    }

    KahanSum total;
    for (double p : partial) total += p;
    return total.value();
}

} // namespace nmlc::detail
