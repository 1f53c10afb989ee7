#pragma once

#include <string>

#include "mdsearch/rng.hpp"

namespace mdsearch {

enum class ChannelKind { linear_bsc, gaussian_pair };

// Observation through the channel: a bit for linear_bsc (stored as 0.0/1.0),
// a real for gaussian_pair.
struct Observation {
    double value = 0.0;
    ChannelKind kind = ChannelKind::linear_bsc;
    int bit() const { return value != 0.0 ? 1 : 0; }
};

// Binary-input observation channel whose noise level depends on the size q of
// the probed region.
//
//   linear_bsc:     crossover p(q) = a*q + b, required < 1/2 on the operating
//                   range [0, 1/2] (which keeps p < 1 up to q = 1, so columns
//                   heavier than half the circle still sample fine).
//                   p(q) == 0 (a noiseless channel) is accepted as a
//                   degenerate special case, and is the default construction.
//   gaussian_pair:  hit  (x=1):  Normal(mu, 1 + a_var*q)
//                   miss (x=0):  Normal(0,  2 + b_var*q),   a_var <= b_var.
//
// Construction verifies monotone degradation numerically: both the capacity
// C(q) and the hit/miss divergence C1(q) must be non-increasing in q (grid
// check with 1e-9 slack). Violations throw ConfigError.
class ChannelModel {
public:
    ChannelModel() = default;  // noiseless linear_bsc
    static ChannelModel make_linear_bsc(double a, double b);
    static ChannelModel make_gaussian_pair(double mu, double a_var, double b_var);

    ChannelKind kind() const { return kind_; }
    std::string kind_name() const;

    double a() const { return a_; }
    double b() const { return b_; }
    double mu() const { return mu_; }
    double a_var() const { return a_var_; }
    double b_var() const { return b_var_; }

    // linear_bsc only; q in [0,1]
    double crossover_prob(double q) const;

    double hit_variance(double q) const { return 1.0 + a_var_ * q; }   // gaussian_pair
    double miss_variance(double q) const { return 2.0 + b_var_ * q; }  // gaussian_pair

    Observation sample_output(int x, double q, Stream& rng) const;

    // log2 P_q(y | x); a density value for gaussian_pair. -inf is possible
    // only for the noiseless linear_bsc case.
    double log_likelihood(const Observation& y, int x, double q) const {
        return log_likelihood(y.value, x, q);
    }
    double log_likelihood(double y_value, int x, double q) const;

    // C1(q) = D( P_q(.|1) || P_q(.|0) ) in bits; closed form for both kinds.
    double divergence_c1(double q) const;

private:
    void validate() const;

    ChannelKind kind_ = ChannelKind::linear_bsc;
    double a_ = 0.0, b_ = 0.0;                     // linear_bsc
    double mu_ = 0.0, a_var_ = 0.0, b_var_ = 0.0;  // gaussian_pair
};

}  // namespace mdsearch
