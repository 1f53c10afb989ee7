#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "mdsearch/channel.hpp"

namespace mdsearch {

// Random query codebook: M rows (one per resolution bin), N columns (one per
// query), entries i.i.d. Bernoulli(prior), plus a uniform dither in [0,1)
// applied as a cyclic sensor shift at dither_shift() = floor(dither*M)
// granularity. Fully reconstructible from (M, N, prior, seed): entries come
// from a counter-based hash, not a sequential generator, so generation order
// is irrelevant.
//
// Rows and columns are 0-based throughout.
class Codebook {
public:
    static Codebook generate(int M, int N, double q, std::uint64_t seed);

    int rows() const { return m_; }
    int cols() const { return n_; }
    double prior() const { return prior_; }
    double dither() const { return dither_; }
    std::uint64_t seed() const { return seed_; }
    int dither_shift() const { return static_cast<int>(dither_ * m_); }

    bool bit(int m, int n) const {
        return (words_[static_cast<size_t>(m) * wpr_ + (n >> 6)] >> (n & 63)) & 1ULL;
    }
    const std::uint64_t* row_words(int m) const {
        return words_.data() + static_cast<size_t>(m) * wpr_;
    }
    int words_per_row() const { return wpr_; }

    int column_weight(int n) const { return col_weight_[n]; }
    double query_size(int n) const { return static_cast<double>(col_weight_[n]) / m_; }

    // dither-shifted support of column n as sorted sensor indices, plus q_n
    std::pair<std::vector<int>, double> query_set(int n) const;

    // bin index of the dither-shifted target: (floor(w*M) - dither_shift) mod M
    int encode_target(double w) const;

    // true iff every column has |weight/M - prior| <= eps; second member is
    // the worst column deviation
    std::pair<bool, double> concentration_event(double eps) const;

private:
    int m_ = 0, n_ = 0, wpr_ = 0;
    double prior_ = 0.0, dither_ = 0.0;
    std::uint64_t seed_ = 0;
    std::vector<std::uint64_t> words_;  // row-major, wpr_ words per row
    std::vector<int> col_weight_;
};

// Chernoff/union bound on the probability that some column weight deviates
// from the prior by more than eps (two-sided): min(1, 2 N 2^{-M D}) with D the
// smaller of the two binary divergences D(q+eps || q), D(q-eps || q).
double lemma1_bound(int M, int N, double q, double eps);

// argmax_m sum_n log2 P_{q_decode}(y_n | bit(m,n)), ties toward the smallest
// row index. For linear_bsc this reduces exactly to minimum Hamming distance
// (integer arithmetic, same tie order), which is the fast path taken.
int ml_decode(const Codebook& cb, const std::vector<Observation>& y,
              const ChannelModel& model, double q_decode);

// the generic float log-likelihood path, exposed for cross-checks
int ml_decode_loglik(const Codebook& cb, const std::vector<Observation>& y,
                     const ChannelModel& model, double q_decode);

struct ForneyDecision {
    bool erased = true;
    int index = -1;
};

// Erasure decoding: accept m iff P(y|x_m) >= 2^{N T} * sum_{m' != m} P(y|x_m').
// Only the likelihood argmax can pass for T > 0; computed in log2 space with
// log-sum-exp. T = 0 is allowed (accepts iff the top posterior reaches 1/2).
ForneyDecision forney_decision(const Codebook& cb, const std::vector<Observation>& y,
                               const ChannelModel& model, double T, double q_decode);

}  // namespace mdsearch
