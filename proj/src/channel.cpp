#include "mdsearch/channel.hpp"

#include <cmath>
#include <string>

#include "mdsearch/errors.hpp"
#include "mdsearch/optimize.hpp"

namespace mdsearch {

namespace {
constexpr double kLog2E = 1.4426950408889634074;  // 1/ln(2)

double gaussian_log2_density(double y, double mean, double var) {
    const double d = y - mean;
    return kLog2E * (-0.5 * std::log(6.283185307179586476925286766559 * var) -
                     d * d / (2.0 * var));
}
}  // namespace

ChannelModel ChannelModel::make_linear_bsc(double a, double b) {
    ChannelModel m;
    m.kind_ = ChannelKind::linear_bsc;
    m.a_ = a;
    m.b_ = b;
    m.validate();
    return m;
}

ChannelModel ChannelModel::make_gaussian_pair(double mu, double a_var, double b_var) {
    ChannelModel m;
    m.kind_ = ChannelKind::gaussian_pair;
    m.mu_ = mu;
    m.a_var_ = a_var;
    m.b_var_ = b_var;
    m.validate();
    return m;
}

std::string ChannelModel::kind_name() const {
    return kind_ == ChannelKind::linear_bsc ? "linear_bsc" : "gaussian_pair";
}

void ChannelModel::validate() const {
    if (kind_ == ChannelKind::linear_bsc) {
        if (a_ < 0.0 || b_ < 0.0)
            throw ConfigError("linear_bsc requires a >= 0 and b >= 0");
        // p(q) = a*q + b is linear, so checking q = 1/2 covers the operating
        // range [0, 1/2]. p == 0 (noiseless) is allowed as a degenerate case.
        // Realized per-column query fractions can exceed 1/2; those stay
        // samplable because this bound also forces p(1) = a + b < 1.
        if (0.5 * a_ + b_ >= 0.5)
            throw ConfigError("linear_bsc requires a*q + b < 1/2 on [0,1/2], got p(1/2) = " +
                              std::to_string(0.5 * a_ + b_));
    } else {
        if (a_var_ > b_var_)
            throw ConfigError("gaussian_pair requires a_var <= b_var");
        if (1.0 + a_var_ <= 0.0 || 1.0 + std::min(a_var_, 0.0) <= 0.0)
            throw ConfigError("gaussian_pair hit variance must stay positive on [0,1]");
        if (2.0 + b_var_ <= 0.0 || 2.0 + std::min(b_var_, 0.0) <= 0.0)
            throw ConfigError("gaussian_pair miss variance must stay positive on [0,1]");
    }

    // Monotone degradation: C(q) and C1(q) non-increasing. The bsc forms are
    // monotone analytically, but the check is cheap and catches future
    // parameterization changes; the gaussian capacity check uses a coarser
    // grid because each point is a 1-D optimization over quadratures.
    const double slack = 1e-9;
    double prev = divergence_c1(0.0);
    for (int i = 1; i <= 100; ++i) {
        const double qq = 0.5 * i / 100.0;
        const double cur = divergence_c1(qq);
        if (cur > prev + slack)
            throw ConfigError("channel violates monotone degradation: C1 increases near q=" +
                              std::to_string(qq));
        prev = cur;
    }
    const int cap_points = kind_ == ChannelKind::linear_bsc ? 100 : 20;
    prev = capacity(*this, 0.0);
    for (int i = 1; i <= cap_points; ++i) {
        const double qq = 0.5 * i / cap_points;
        const double cur = capacity(*this, qq);
        if (cur > prev + slack)
            throw ConfigError("channel violates monotone degradation: C increases near q=" +
                              std::to_string(qq));
        prev = cur;
    }
}

double ChannelModel::crossover_prob(double q) const {
    if (kind_ != ChannelKind::linear_bsc)
        throw ConfigError("crossover_prob is defined for linear_bsc only");
    if (q < 0.0 || q > 1.0) throw ConfigError("query size must lie in [0,1]");
    return a_ * q + b_;
}

Observation ChannelModel::sample_output(int x, double q, Stream& rng) const {
    Observation y;
    y.kind = kind_;
    if (kind_ == ChannelKind::linear_bsc) {
        const double p = crossover_prob(q);
        const int flip = rng.bernoulli(p) ? 1 : 0;
        y.value = static_cast<double>((x ^ flip) & 1);
    } else {
        y.value = x ? rng.normal(mu_, std::sqrt(hit_variance(q)))
                    : rng.normal(0.0, std::sqrt(miss_variance(q)));
    }
    return y;
}

double ChannelModel::log_likelihood(double y_value, int x, double q) const {
    if (kind_ == ChannelKind::linear_bsc) {
        const double p = a_ * q + b_;
        const bool flipped = (y_value != 0.0 ? 1 : 0) != (x & 1);
        if (p == 0.0) return flipped ? -HUGE_VAL : 0.0;
        return flipped ? std::log2(p) : std::log2(1.0 - p);
    }
    return x ? gaussian_log2_density(y_value, mu_, hit_variance(q))
             : gaussian_log2_density(y_value, 0.0, miss_variance(q));
}

double ChannelModel::divergence_c1(double q) const {
    if (kind_ == ChannelKind::linear_bsc) {
        const double p = a_ * q + b_;
        if (p == 0.0) return HUGE_VAL;  // laws have disjoint support
        if (p == 0.5) return 0.0;
        // D(Bern(1-p) || Bern(p)) = (1-2p) log2((1-p)/p)
        return (1.0 - 2.0 * p) * std::log2((1.0 - p) / p);
    }
    // D(N(mu, v1) || N(0, v0)) in bits
    const double v1 = hit_variance(q), v0 = miss_variance(q);
    return kLog2E * (0.5 * std::log(v0 / v1) + (v1 + mu_ * mu_) / (2.0 * v0) - 0.5);
}

}  // namespace mdsearch
