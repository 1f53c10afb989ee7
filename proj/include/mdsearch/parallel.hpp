#pragma once

#include <thread>
#include <vector>

namespace mdsearch {

// Runs body(trial_index, acc) for trial_index in [0, trials) across up to
// `threads` workers. Each worker owns one accumulator; partials are merged in
// fixed chunk order after join, so results are bit-identical for any thread
// count as long as per-trial work depends only on the trial index.
template <class Acc, class Body>
Acc parallel_trials(long long trials, int threads, Body&& body) {
    if (threads < 1) threads = 1;
    const int workers = static_cast<int>(
        std::min<long long>(threads, std::max<long long>(1, trials)));
    std::vector<Acc> parts(workers);
    if (workers == 1) {
        for (long long t = 0; t < trials; ++t) body(t, parts[0]);
        return parts[0];
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const long long chunk = (trials + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const long long lo = w * chunk;
        const long long hi = std::min(trials, lo + chunk);
        pool.emplace_back([&body, &parts, w, lo, hi]() {
            for (long long t = lo; t < hi; ++t) body(t, parts[w]);
        });
    }
    for (auto& th : pool) th.join();
    for (int w = 1; w < workers; ++w) parts[0].merge(parts[w]);
    return parts[0];
}

}  // namespace mdsearch
