#include "mdsearch/info_theory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "mdsearch/errors.hpp"
#include "mdsearch/optimize.hpp"
#include "mdsearch/quadrature.hpp"

namespace mdsearch {

namespace {

constexpr double kLn2 = 0.69314718055994530942;

double xlog2x(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

// natural-log Gaussian density
double ln_density(double y, double mean, double var) {
    const double d = y - mean;
    return -0.5 * std::log(6.283185307179586476925286766559 * var) - d * d / (2.0 * var);
}

struct GaussParams {
    double mu, v1, v0, lo, hi;
};

GaussParams gauss_params(const ChannelModel& m, double q) {
    GaussParams g;
    g.mu = m.mu();
    g.v1 = m.hit_variance(q);
    g.v0 = m.miss_variance(q);
    const double spread = 10.0 * (std::sqrt(g.v1) + std::sqrt(g.v0));
    g.lo = std::min(0.0, g.mu) - spread;
    g.hi = std::max(0.0, g.mu) + spread;
    return g;
}

// differential entropy of N(., var) in bits
double gaussian_entropy_bits(double var) {
    return 0.5 * std::log2(6.283185307179586476925286766559 *
                           2.718281828459045235360287471353 * var);
}

}  // namespace

double binary_entropy(double p) {
    if (!(p >= 0.0 && p <= 1.0))
        throw std::domain_error("binary_entropy: argument outside [0,1]");
    return -xlog2x(p) - xlog2x(1.0 - p);
}

double mutual_information(double p_input, double q_size, const ChannelModel& model) {
    if (!(p_input >= 0.0 && p_input <= 1.0))
        throw std::domain_error("mutual_information: input prior outside [0,1]");
    if (p_input == 0.0 || p_input == 1.0) return 0.0;

    if (model.kind() == ChannelKind::linear_bsc) {
        const double eps = model.crossover_prob(q_size);
        return binary_entropy(binary_convolve(p_input, eps)) - binary_entropy(eps);
    }

    const GaussParams g = gauss_params(model, q_size);
    const double w = p_input;
    const double h_y = integrate(
        [&](double y) {
            const double f = w * std::exp(ln_density(y, g.mu, g.v1)) +
                             (1.0 - w) * std::exp(ln_density(y, 0.0, g.v0));
            return -xlog2x(f);
        },
        g.lo, g.hi);
    const double h_y_given_x =
        w * gaussian_entropy_bits(g.v1) + (1.0 - w) * gaussian_entropy_bits(g.v0);
    const double mi = h_y - h_y_given_x;
    return mi < 0.0 && mi > -1e-6 ? 0.0 : mi;  // quadrature noise at degenerate inputs
}

double gallager_e0(double rho, double q, double prior, const ChannelModel& model) {
    if (!(rho >= 0.0 && rho <= 1.0))
        throw std::domain_error("gallager_e0: rho outside [0,1]");
    const double w = prior, s = 1.0 / (1.0 + rho);

    if (model.kind() == ChannelKind::linear_bsc) {
        const double eps = model.crossover_prob(q);
        const double a0 = (1.0 - w) * std::pow(1.0 - eps, s) + w * std::pow(eps, s);
        const double a1 = (1.0 - w) * std::pow(eps, s) + w * std::pow(1.0 - eps, s);
        return -std::log2(std::pow(a0, 1.0 + rho) + std::pow(a1, 1.0 + rho));
    }

    const GaussParams g = gauss_params(model, q);
    const double total = integrate(
        [&](double y) {
            const double t = (1.0 - w) * std::exp(s * ln_density(y, 0.0, g.v0)) +
                             w * std::exp(s * ln_density(y, g.mu, g.v1));
            return std::pow(t, 1.0 + rho);
        },
        g.lo, g.hi);
    return -std::log2(total);
}

namespace {

// Concave-objective maximizer: coarse uniform grid to bracket, then
// golden-section inside the bracketing cells. Deterministic.
template <class F>
ExponentDetail maximize_on(F&& f, double lo, double hi, double step) {
    const int n = static_cast<int>(std::ceil((hi - lo) / step)) + 1;
    int best = 0;
    double best_v = f(lo);
    for (int i = 1; i < n; ++i) {
        const double x = std::min(lo + i * step, hi);
        const double v = f(x);
        if (v > best_v) {
            best_v = v;
            best = i;
        }
    }
    const double bl = std::max(lo, lo + (best - 1) * step);
    const double bh = std::min(hi, lo + (best + 1) * step);
    auto [xs, vs] = golden_max(f, bl, bh);
    ExponentDetail d;
    d.rho_star = xs;
    d.value = vs;
    d.boundary_hit = xs >= hi - 2e-10 || (best == n - 1 && hi - xs < step);
    return d;
}

double rc_grid_step(const ChannelModel& m) {
    // each gaussian E0 is a quadrature; the objective is concave, so a coarser
    // bracket grid loses nothing
    return m.kind() == ChannelKind::linear_bsc ? 1e-4 : 1e-2;
}

}  // namespace

ExponentDetail random_coding_exponent_detail(double R, double q, double prior,
                                             const ChannelModel& model) {
    auto obj = [&](double rho) { return gallager_e0(rho, q, prior, model) - rho * R; };
    ExponentDetail d = maximize_on(obj, 0.0, 1.0, rc_grid_step(model));
    if (d.value < 0.0) {
        d.value = 0.0;
        d.rho_star = 0.0;
    }
    return d;
}

double random_coding_exponent(double R, double q, double prior, const ChannelModel& model) {
    return random_coding_exponent_detail(R, q, prior, model).value;
}

E0Table::E0Table(const ChannelModel& model, double q, double prior, double rho_step)
    : model_(model), q_(q), prior_(prior), step_(rho_step) {
    const int n = static_cast<int>(std::round(1.0 / rho_step)) + 1;
    e0_.resize(n);

    if (model.kind() == ChannelKind::linear_bsc) {
        for (int i = 0; i < n; ++i) e0_[i] = gallager_e0(std::min(i * step_, 1.0), q, prior, model);
        return;
    }

    // gaussian: fix one converged node grid, precompute the log densities once
    const GaussParams g = gauss_params(model, q);
    const double w = prior;
    int panels = 0;
    integrate([&](double y) { return std::exp(ln_density(y, g.mu, g.v1)); }, g.lo, g.hi, 1e-10,
              &panels);
    const QuadGrid grid = make_quad_grid(g.lo, g.hi, std::max(2 * panels, 32));
    std::vector<double> ln1(grid.x.size()), ln0(grid.x.size());
    for (size_t i = 0; i < grid.x.size(); ++i) {
        ln1[i] = ln_density(grid.x[i], g.mu, g.v1);
        ln0[i] = ln_density(grid.x[i], 0.0, g.v0);
    }
    for (int k = 0; k < n; ++k) {
        const double rho = std::min(k * step_, 1.0);
        const double s = 1.0 / (1.0 + rho);
        double total = 0.0;
        for (size_t i = 0; i < grid.x.size(); ++i) {
            const double t = (1.0 - w) * std::exp(s * ln0[i]) + w * std::exp(s * ln1[i]);
            total += grid.w[i] * std::pow(t, 1.0 + rho);
        }
        e0_[k] = -std::log2(total);
    }
}

ExponentDetail E0Table::exponent(double R) const {
    int best = 0;
    double best_v = e0_[0];
    for (size_t i = 1; i < e0_.size(); ++i) {
        const double v = e0_[i] - std::min(i * step_, 1.0) * R;
        if (v > best_v) {
            best_v = v;
            best = static_cast<int>(i);
        }
    }
    const double bl = std::max(0.0, (best - 1) * step_);
    const double bh = std::min(1.0, (best + 1) * step_);
    auto obj = [&](double rho) { return gallager_e0(rho, q_, prior_, model_) - rho * R; };
    auto [xs, vs] = golden_max(obj, bl, bh);
    ExponentDetail d;
    d.rho_star = xs;
    d.value = std::max(vs, 0.0);
    d.boundary_hit = xs >= 1.0 - 2e-10;
    if (d.value == 0.0) d.rho_star = 0.0;
    return d;
}

double forney_e0(double rho, double q, double prior, const ChannelModel& model) {
    if (!(rho >= 1.0)) throw std::domain_error("forney_e0: rho must be >= 1");
    const double w = prior, inv_rho = 1.0 / rho;

    if (model.kind() == ChannelKind::linear_bsc) {
        const double eps = model.crossover_prob(q);
        double total = 0.0;
        for (int y = 0; y < 2; ++y) {
            const double p1 = y == 1 ? 1.0 - eps : eps;  // P(y|x=1)
            const double p0 = y == 1 ? eps : 1.0 - eps;  // P(y|x=0)
            const double inner =
                (1.0 - w) * std::pow(p0, inv_rho) + w * std::pow(p1, inv_rho);
            const double log_inner = std::log2(inner);
            total += (1.0 - w) * (xlog2x(p0) - p0 * rho * log_inner) +
                     w * (xlog2x(p1) - p1 * rho * log_inner);
        }
        return total;
    }

    const GaussParams g = gauss_params(model, q);
    return integrate(
        [&](double y) {
            const double l1 = ln_density(y, g.mu, g.v1), l0 = ln_density(y, 0.0, g.v0);
            const double p1 = std::exp(l1), p0 = std::exp(l0);
            const double inner =
                (1.0 - w) * std::exp(inv_rho * l0) + w * std::exp(inv_rho * l1);
            const double log_inner = std::log2(inner);
            return (1.0 - w) * p0 * (l0 / kLn2 - rho * log_inner) +
                   w * p1 * (l1 / kLn2 - rho * log_inner);
        },
        g.lo, g.hi);
}

ExponentDetail forney_exponent_detail(double R, double q_star, const ChannelModel& model,
                                      double rho_max) {
    if (rho_max <= 1.0) throw ConfigError("forney rho_max must exceed 1");
    auto obj = [&](double rho) { return forney_e0(rho, q_star, q_star, model) - rho * R; };
    const double step = model.kind() == ChannelKind::linear_bsc ? 1e-4 : 1e-3;
    ExponentDetail d = maximize_on(obj, 1.0, rho_max, step);
    if (d.value < 0.0) {
        d.value = 0.0;
        d.boundary_hit = false;
    }
    return d;
}

double forney_exponent(double R, double q_star, const ChannelModel& model, double rho_max) {
    return forney_exponent_detail(R, q_star, model, rho_max).value;
}

double yi_exponent(double R, double q_star, double validation_q, const ChannelModel& model) {
    const double mi = mutual_information(q_star, q_star, model);
    const double v = model.divergence_c1(validation_q) * (1.0 - R / mi);
    return std::max(v, 0.0);
}

double two_phase_tradeoff(double R, const ChannelModel& model) {
    const double v = model.divergence_c1(0.0) * (1.0 - R / capacity(model, 0.0));
    return std::max(v, 0.0);
}

std::pair<double, double> moving_rate_bounds(double q, double v_max,
                                             const ChannelModel& model) {
    if (!(v_max > 0.0 && v_max <= 0.5))
        throw ConfigError("moving_rate_bounds: v_max must lie in (0, 1/2]");
    const double half_mi = 0.5 * mutual_information(q, q, model);
    return {half_mi * (1.0 - 2.0 * v_max), half_mi};
}

std::string scheme_tag_name(SchemeTag t) {
    switch (t) {
        case SchemeTag::random_coding: return "random_coding";
        case SchemeTag::forney: return "forney";
        case SchemeTag::yamamoto_itoh: return "yamamoto_itoh";
        case SchemeTag::two_phase_burnashev: return "two_phase_burnashev";
    }
    return "unknown";
}

void ExponentCurve::validate() const {
    if (rate_grid.size() != exponent_values.size())
        throw ConfigError("exponent curve: grid/value length mismatch");
    for (double v : exponent_values)
        if (v < 0.0) throw ConfigError("exponent curve: negative exponent value");
}

std::string ExponentCurve::to_csv() const {
    validate();
    std::string out = "rate,exponent,scheme_tag\n";
    char line[128];
    for (size_t i = 0; i < rate_grid.size(); ++i) {
        std::snprintf(line, sizeof line, "%.12g,%.12g,%s\n", rate_grid[i],
                      exponent_values[i], scheme_tag_name(scheme_tag).c_str());
        out += line;
    }
    return out;
}

}  // namespace mdsearch
