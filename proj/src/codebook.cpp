#include "mdsearch/codebook.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "mdsearch/errors.hpp"
#include "mdsearch/rng.hpp"

namespace mdsearch {

Codebook Codebook::generate(int M, int N, double q, std::uint64_t seed) {
    if (M < 2 || N < 1) throw ConfigError("codebook requires M >= 2, N >= 1");
    if (!(q > 0.0 && q < 1.0)) throw ConfigError("codebook prior must lie in (0,1)");

    Codebook cb;
    cb.m_ = M;
    cb.n_ = N;
    cb.wpr_ = (N + 63) / 64;
    cb.prior_ = q;
    cb.seed_ = seed;
    cb.words_.assign(static_cast<size_t>(M) * cb.wpr_, 0);
    cb.col_weight_.assign(N, 0);

    const std::uint64_t base = hash_combine(seed, TAG_CODEBOOK);
    for (int m = 0; m < M; ++m) {
        std::uint64_t* row = cb.words_.data() + static_cast<size_t>(m) * cb.wpr_;
        for (int n = 0; n < N; ++n) {
            const std::uint64_t h =
                hash_combine(base, static_cast<std::uint64_t>(m) * N + n);
            const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
            if (u < q) {
                row[n >> 6] |= 1ULL << (n & 63);
                ++cb.col_weight_[n];
            }
        }
    }
    cb.dither_ =
        static_cast<double>(hash_combine(seed, TAG_DITHER) >> 11) * 0x1.0p-53;
    return cb;
}

std::pair<std::vector<int>, double> Codebook::query_set(int n) const {
    std::vector<int> sensors;
    sensors.reserve(col_weight_[n]);
    const int s = dither_shift();
    for (int r = 0; r < m_; ++r)
        if (bit(r, n)) sensors.push_back((r + s) % m_);
    std::sort(sensors.begin(), sensors.end());
    return {std::move(sensors), query_size(n)};
}

int Codebook::encode_target(double w) const {
    if (!(w >= 0.0 && w < 1.0)) throw ConfigError("target position must lie in [0,1)");
    const int j = std::min(static_cast<int>(w * m_), m_ - 1);
    const int s = dither_shift();
    return ((j - s) % m_ + m_) % m_;
}

std::pair<bool, double> Codebook::concentration_event(double eps) const {
    if (!(eps > 0.0)) throw ConfigError("concentration eps must be positive");
    double worst = 0.0;
    for (int n = 0; n < n_; ++n)
        worst = std::max(worst, std::abs(query_size(n) - prior_));
    return {worst <= eps, worst};
}

namespace {
double xlog2_ratio(double x, double y) {  // x log2(x/y), with 0 log 0 = 0
    return x > 0.0 ? x * std::log2(x / y) : 0.0;
}
double binary_divergence(double x, double q) {
    x = std::clamp(x, 0.0, 1.0);
    return xlog2_ratio(x, q) + xlog2_ratio(1.0 - x, 1.0 - q);
}
}  // namespace

double lemma1_bound(int M, int N, double q, double eps) {
    const double d =
        std::min(binary_divergence(q + eps, q), binary_divergence(q - eps, q));
    return std::min(1.0, 2.0 * N * std::exp2(-static_cast<double>(M) * d));
}

namespace {

// pack observations (0/1) the same way codebook rows are packed
std::vector<std::uint64_t> pack_bits(const std::vector<Observation>& y) {
    std::vector<std::uint64_t> out((y.size() + 63) / 64, 0);
    for (size_t n = 0; n < y.size(); ++n)
        if (y[n].value != 0.0) out[n >> 6] |= 1ULL << (n & 63);
    return out;
}

}  // namespace

int ml_decode_loglik(const Codebook& cb, const std::vector<Observation>& y,
                     const ChannelModel& model, double q_decode) {
    int best = 0;
    double best_ll = -HUGE_VAL;
    for (int m = 0; m < cb.rows(); ++m) {
        double ll = 0.0;
        for (size_t n = 0; n < y.size(); ++n)
            ll += model.log_likelihood(y[n].value, cb.bit(m, static_cast<int>(n)), q_decode);
        if (ll > best_ll) {
            best_ll = ll;
            best = m;
        }
    }
    return best;
}

int ml_decode(const Codebook& cb, const std::vector<Observation>& y,
              const ChannelModel& model, double q_decode) {
    if (static_cast<int>(y.size()) != cb.cols())
        throw ConfigError("ml_decode: observation length != codebook columns");
    if (model.kind() != ChannelKind::linear_bsc || model.crossover_prob(q_decode) >= 0.5)
        return ml_decode_loglik(cb, y, model, q_decode);

    // constant sub-1/2 crossover per query => likelihood is monotone in
    // Hamming distance; integer distances make tie order exact
    const std::vector<std::uint64_t> packed = pack_bits(y);
    const int wpr = cb.words_per_row();
    int best = 0, best_d = cb.cols() + 1;
    for (int m = 0; m < cb.rows(); ++m) {
        const std::uint64_t* row = cb.row_words(m);
        int d = 0;
        for (int w = 0; w < wpr; ++w) d += std::popcount(row[w] ^ packed[w]);
        if (d < best_d) {
            best_d = d;
            best = m;
        }
    }
    return best;
}

ForneyDecision forney_decision(const Codebook& cb, const std::vector<Observation>& y,
                               const ChannelModel& model, double T, double q_decode) {
    if (T < 0.0) throw ConfigError("forney threshold must be >= 0");
    const int M = cb.rows();
    std::vector<double> ll(M, 0.0);
    for (int m = 0; m < M; ++m)
        for (size_t n = 0; n < y.size(); ++n)
            ll[m] += model.log_likelihood(y[n].value, cb.bit(m, static_cast<int>(n)), q_decode);

    int top = 0;
    for (int m = 1; m < M; ++m)
        if (ll[m] > ll[top]) top = m;

    // log2 sum of the non-top likelihoods
    double rest_max = -HUGE_VAL;
    for (int m = 0; m < M; ++m)
        if (m != top) rest_max = std::max(rest_max, ll[m]);

    ForneyDecision d;
    if (ll[top] == -HUGE_VAL) return d;  // nothing is even possible: erase
    if (rest_max == -HUGE_VAL) {         // all alternatives impossible: accept
        d.erased = false;
        d.index = top;
        return d;
    }
    double acc = 0.0;
    for (int m = 0; m < M; ++m)
        if (m != top && ll[m] != -HUGE_VAL) acc += std::exp2(ll[m] - rest_max);
    const double lse_rest = rest_max + std::log2(acc);
    if (ll[top] - lse_rest >= static_cast<double>(y.size()) * T) {
        d.erased = false;
        d.index = top;
    }
    return d;
}

}  // namespace mdsearch
