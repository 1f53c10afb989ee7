#pragma once

#include <cmath>
#include <cstdio>
#include <utility>
#include <vector>

#include "mdsearch/errors.hpp"

namespace mdsearch {

// 15-point Gauss-Legendre rule on [-1, 1].
inline constexpr int kGL15 = 15;
inline constexpr double kGL15Node[kGL15] = {
    0.0,
    -0.20119409399743452230, 0.20119409399743452230,
    -0.39415134707756336989, 0.39415134707756336989,
    -0.57097217260853884754, 0.57097217260853884754,
    -0.72441773136017004742, 0.72441773136017004742,
    -0.84820658341042721620, 0.84820658341042721620,
    -0.93727339240070590431, 0.93727339240070590431,
    -0.98799251802048542848, 0.98799251802048542848,
};
inline constexpr double kGL15Weight[kGL15] = {
    0.20257824192556127288,
    0.19843148532711157646, 0.19843148532711157646,
    0.18616100001556221103, 0.18616100001556221103,
    0.16626920581699393355, 0.16626920581699393355,
    0.13957067792615431445, 0.13957067792615431445,
    0.10715922046717193501, 0.10715922046717193501,
    0.07036604748810812471, 0.07036604748810812471,
    0.03075324199611726835, 0.03075324199611726835,
};

// Fixed composite quadrature grid, for callers that evaluate many integrands
// over the same interval (node positions precomputable).
struct QuadGrid {
    std::vector<double> x;
    std::vector<double> w;
};

inline QuadGrid make_quad_grid(double lo, double hi, int panels) {
    QuadGrid g;
    g.x.reserve(static_cast<size_t>(panels) * kGL15);
    g.w.reserve(static_cast<size_t>(panels) * kGL15);
    const double h = (hi - lo) / panels;
    for (int p = 0; p < panels; ++p) {
        const double c = lo + (p + 0.5) * h;
        for (int i = 0; i < kGL15; ++i) {
            g.x.push_back(c + 0.5 * h * kGL15Node[i]);
            g.w.push_back(0.5 * h * kGL15Weight[i]);
        }
    }
    return g;
}

template <class F>
double integrate_fixed(F&& f, const QuadGrid& g) {
    double s = 0.0;
    for (size_t i = 0; i < g.x.size(); ++i) s += g.w[i] * f(g.x[i]);
    return s;
}

// Adaptive composite GL15: doubles the panel count until two successive
// refinements agree within abs_tol. Smooth integrands (everything here is a
// Gaussian mixture expression) converge in a few rounds; failure to converge
// by max_panels raises QuadratureError carrying the achieved tolerance.
template <class F>
double integrate(F&& f, double lo, double hi, double abs_tol = 1e-8,
                 int* panels_used = nullptr, int max_panels = 1 << 14) {
    double prev = integrate_fixed(f, make_quad_grid(lo, hi, 4));
    for (int panels = 8; panels <= max_panels; panels *= 2) {
        const double cur = integrate_fixed(f, make_quad_grid(lo, hi, panels));
        if (std::abs(cur - prev) < abs_tol) {
            if (panels_used) *panels_used = panels;
            return cur;
        }
        prev = cur;
    }
    char msg[128];
    std::snprintf(msg, sizeof msg,
                  "quadrature did not reach tol=%.3g (achieved %.3g)", abs_tol,
                  std::abs(prev));
    throw QuadratureError(msg, std::abs(prev));
}

// Deterministic golden-section maximization of a unimodal f on [lo, hi].
// Returns (argmax, max). Tolerance is on the argument.
template <class F>
std::pair<double, double> golden_max(F&& f, double lo, double hi, double x_tol = 1e-10) {
    const double inv_phi = 0.6180339887498948482;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > x_tol) {
        if (fc >= fd) {
            b = d; d = c; fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    const double xm = 0.5 * (a + b);
    return {xm, f(xm)};
}

}  // namespace mdsearch
