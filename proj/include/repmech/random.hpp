#pragma once
/* Seeded randomness and deterministic parallel trial loops.
 *
 * Trial t of a run seeded with `master` always draws from the engine
 * make_engine(master, t), and trials are reduced in fixed-size blocks that
 * are merged in block order. Results therefore do not depend on the number
 * of worker threads.
 */

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

namespace repmech::random {

using Engine = std::mt19937_64;

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Independent substream for (master seed, stream label, counter).
inline constexpr std::uint64_t substream_seed(std::uint64_t master, std::uint64_t stream,
                                              std::uint64_t counter) noexcept {
    return splitmix64(splitmix64(master ^ splitmix64(stream)) + counter);
}

inline Engine make_engine(std::uint64_t master, std::uint64_t counter, std::uint64_t stream = 0) {
    return Engine(substream_seed(master, stream, counter));
}

inline double normal(Engine& eng, double mean, double std) {
    if (std == 0.0) return mean;
    std::normal_distribution<double> dist(mean, std);
    return dist(eng);
}

inline double uniform01(Engine& eng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(eng);
}

inline constexpr std::size_t kTrialBlock = 512;

/// Runs trial(t, acc) for t in [0, trials) on up to `workers` threads.
/// Each block of kTrialBlock trials accumulates into its own copy of `zero`;
/// blocks are then folded left-to-right with merge(total, block).
template <class Acc, class TrialFn, class MergeFn>
Acc run_blocked(std::size_t trials, unsigned workers, const Acc& zero, TrialFn trial, MergeFn merge) {
    const std::size_t blocks = (trials + kTrialBlock - 1) / kTrialBlock;
    std::vector<Acc> partial(blocks, zero);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto work = [&] {
        try {
            for (std::size_t b = next++; b < blocks; b = next++) {
                const std::size_t end = std::min(trials, (b + 1) * kTrialBlock);
                for (std::size_t t = b * kTrialBlock; t < end; ++t) trial(t, partial[b]);
            }
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = blocks;
        }
    };

    const unsigned n = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(blocks, 1))));
    if (n == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n);
        for (unsigned w = 0; w < n; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    Acc total = zero;
    for (const Acc& p : partial) merge(total, p);
    return total;
}

} // namespace repmech::random
