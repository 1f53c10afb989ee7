#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mdsearch/channel.hpp"

namespace mdsearch {

// All rates, exponents, entropies and divergences are in bits (log base 2).

double binary_entropy(double p);  // throws std::domain_error outside [0,1]

// binary convolution p * eps = p(1-eps) + (1-p)eps
inline double binary_convolve(double p, double eps) {
    return p * (1.0 - eps) + (1.0 - p) * eps;
}

// I(X;Y) with X ~ Bernoulli(p_input) through P_{q_size}. Closed form for
// linear_bsc; Gaussian mixture output entropy by adaptive quadrature
// (QuadratureError on non-convergence, carrying the achieved tolerance).
double mutual_information(double p_input, double q_size, const ChannelModel& model);

// Gallager function
//   E0(rho) = -log2 sum_y [ sum_x Q(x) P_q(y|x)^{1/(1+rho)} ]^{1+rho}
// with Q = (1-prior, prior); integral over y for gaussian_pair.
double gallager_e0(double rho, double q, double prior, const ChannelModel& model);

struct ExponentDetail {
    double value = 0.0;
    double rho_star = 0.0;
    bool boundary_hit = false;  // maximizer landed on the search boundary
};

// max_{rho in [0,1]} E0(rho) - rho R, clamped at 0. Uniform rho grid followed
// by golden-section refinement (E0 is concave in rho).
double random_coding_exponent(double R, double q, double prior, const ChannelModel& model);
ExponentDetail random_coding_exponent_detail(double R, double q, double prior,
                                             const ChannelModel& model);

// E0 sampled once on a uniform rho grid so that many rates can be swept
// without recomputing the (possibly quadrature-backed) Gallager function.
class E0Table {
public:
    E0Table(const ChannelModel& model, double q, double prior, double rho_step = 1e-4);
    ExponentDetail exponent(double R) const;

private:
    const ChannelModel model_;
    double q_, prior_, step_;
    std::vector<double> e0_;  // e0_[i] = E0(i*step), last point rho=1
};

// Decision-feedback (erasure-decoding) exponent, with the codebook input
// distribution Q = (1-q_star, q_star):
//   E0F(rho) = sum_y sum_x Q(x) P(y|x) [ log2 P(y|x)
//                                        - rho log2 sum_x' Q(x') P(y|x')^{1/rho} ]
//   E(R)    = max_{rho in [1, rho_max]} E0F(rho) - rho R.
// E0F is increasing and saturating in rho, so small R pushes the maximizer to
// rho_max; boundary_hit reports that.
double forney_e0(double rho, double q, double prior, const ChannelModel& model);
ExponentDetail forney_exponent_detail(double R, double q_star, const ChannelModel& model,
                                      double rho_max = 20.0);
double forney_exponent(double R, double q_star, const ChannelModel& model,
                       double rho_max = 20.0);

// Validation-based tradeoff C1(validation_q) * (1 - R / I_XY(q_star, q_star)),
// clamped at 0. validation_q = 0 probes the final resolution interval;
// validation_q = q_star keeps the search query size.
double yi_exponent(double R, double q_star, double validation_q, const ChannelModel& model);

// Adaptive two-phase tradeoff C1(0) * (1 - R / C(0)), clamped at 0; zero
// exactly at the best-channel capacity C(0).
double two_phase_tradeoff(double R, const ChannelModel& model);

// (achievable, converse) targeting-rate pair for a moving target with speed
// bound v_max: ( 0.5 I(q,q) (1 - 2 v_max), 0.5 I(q,q) ).
std::pair<double, double> moving_rate_bounds(double q, double v_max,
                                             const ChannelModel& model);

enum class SchemeTag { random_coding, forney, yamamoto_itoh, two_phase_burnashev };
std::string scheme_tag_name(SchemeTag t);

struct ExponentCurve {
    std::vector<double> rate_grid;
    std::vector<double> exponent_values;  // non-negative, same length as rate_grid
    SchemeTag scheme_tag = SchemeTag::random_coding;

    void validate() const;        // length match + non-negativity
    std::string to_csv() const;   // long format: rate,exponent,scheme_tag
};

}  // namespace mdsearch
