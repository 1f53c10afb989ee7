#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mdsearch/channel.hpp"
#include "mdsearch/stats.hpp"

#include "json.hpp"

namespace mdsearch {

// Shared knob set for the stationary-target search schemes. Unset optional
// knobs (negative / NaN) are resolved by the runners; the resolved values are
// echoed in the report.
struct SearchConfig {
    ChannelModel model;
    double delta = 0.0;      // target resolution; bin count M = round(1/delta)
    double rate = 0.0;       // bits per query; ignored when n > 0
    int n = 0;               // block length; 0 = derive from rate
    double prior = -1.0;     // codeword bit probability; <0 = optimized value
    double forney_threshold = 0.05;  // per-query acceptance margin, bits
    double yi_lambda = -1.0;         // validation fraction; <0 = rate-derived
    double val_threshold = std::numeric_limits<double>::quiet_NaN();
    // NaN = Neyman-Pearson default at val_false_erase
    double val_false_erase = 1e-2;
    double alpha = 0.1;      // two-phase coarse resolution
    int n1 = 0, n2 = 0, n3 = 0;  // two-phase stage lengths
    double q2 = -1.0;        // phase-2 bit probability; <0 = optimized value
    long long trials = 1000;
    std::uint64_t seed = 1;
    int threads = 1;
    bool sweep_w = false;    // false: uniform target; true: deterministic sweep
    int sweep_points = 50;
    long long max_attempts = 100000;  // per-trial restart guard
};

struct SimReport {
    std::string scheme_tag;
    long long trials = 0;
    int block_length = 0;        // queries per attempt
    double rate = 0.0;           // log2(bins) / block_length
    double error_rate = 0.0;
    CI error_ci;
    double erasure_rate = 0.0;   // first-attempt erasure probability
    CI erasure_ci;
    double mean_stopping_time = 0.0;
    CI stopping_time_ci;
    long long truncated_trials = 0;  // hit max_attempts without accepting
    double restart_identity_dev = 0.0;
    double restart_identity_halfwidth = 0.0;
    // Resolved knobs.
    int bins = 0;
    double resolved_prior = 0.0;
    double resolved_lambda = -1.0;   // -1 = not applicable
    double resolved_val_threshold = 0.0;
    double resolved_q2 = -1.0;       // -1 = not applicable
    // Per-sweep-position error counts (empty unless sweep_w).
    std::vector<long long> sweep_errors;
    std::vector<long long> sweep_counts;
    // Moving-target extras (class_count == 0 means not applicable).
    long long class_count = 0;
    double secondary_error_rate = -1.0;
    CI secondary_error_ci;
    double achievable_rate_bound = 0.0;
    double converse_rate_bound = 0.0;

    nlohmann::ordered_json to_json() const;
};

// Accept/erase decision on a validation block: accepts iff the accumulated
// log2-likelihood ratio for hypothesis x=1 over x=0 at query size q_val
// meets threshold_bits.
bool validation_accepts(const std::vector<Observation>& y_val, const ChannelModel& model,
                        double q_val, double threshold_bits);

// Neyman-Pearson default threshold: normal approximation to the LLR sum under
// x=1, placed so the false-erase probability is about false_erase.
double default_validation_threshold(const ChannelModel& model, double q_val, int n_val,
                                    double false_erase);

// Fixed-length search: one codebook, one block, maximum-likelihood decision.
SimReport run_nonadaptive(const SearchConfig& cfg);

// Decision-feedback search: ML decision plus a likelihood-margin erasure test;
// erasures restart with a fresh codebook.
SimReport run_forney(const SearchConfig& cfg);

// Two-stage search: ML decision on the first (1-lambda)N queries, then a
// validation probe of the decoded bin on the remaining queries; failed
// validation restarts.
SimReport run_yamamoto_itoh(const SearchConfig& cfg);

// Coarse/fine/validate search: resolve an alpha-interval, then a delta-bin
// inside it, then validate the declared bin; any validation failure restarts
// the whole attempt.
SimReport run_two_phase(const SearchConfig& cfg);

}  // namespace mdsearch
