#include "mdsearch/optimize.hpp"

#include <algorithm>
#include <cmath>

#include "mdsearch/errors.hpp"
#include "mdsearch/info_theory.hpp"
#include "mdsearch/quadrature.hpp"

namespace mdsearch {

namespace {

// grid over (0, 0.5]: multiples of step, with the right endpoint pinned to
// exactly 0.5 (the functional's domain edge and a common reporting point)
std::vector<double> q_grid(double step) {
    if (!(step > 0.0 && step <= 1e-2))
        throw ConfigError("grid_step must lie in (0, 1e-2]");
    std::vector<double> qs;
    const int k_max = static_cast<int>(std::floor(0.5 / step + 1e-12));
    qs.reserve(k_max + 1);
    for (int k = 1; k <= k_max; ++k) qs.push_back(k * step);
    if (qs.empty() || std::abs(qs.back() - 0.5) > 1e-12)
        qs.push_back(0.5);
    else
        qs.back() = 0.5;
    return qs;
}

}  // namespace

OptimumReport optimal_query_size(const ChannelModel& model, double grid_step) {
    const std::vector<double> qs = q_grid(grid_step);
    auto f = [&](double q) { return mutual_information(q, q, model); };

    size_t best = 0;
    double best_v = f(qs[0]);
    for (size_t i = 1; i < qs.size(); ++i) {
        const double v = f(qs[i]);
        if (v > best_v) {  // strict: ties resolve toward the smaller q
            best_v = v;
            best = i;
        }
    }

    // the functional is not concave in q, but it is smooth, so a local
    // golden-section pass within the bracketing cells sharpens the grid argmax
    const double lo = best == 0 ? qs[0] : qs[best - 1];
    const double hi = best + 1 < qs.size() ? qs[best + 1] : 0.5;
    auto [xs, vs] = golden_max(f, lo, hi);

    OptimumReport r;
    r.q_star = xs;
    r.value = vs;
    r.grid_resolution = grid_step;
    r.refined = true;
    if (vs < best_v) {  // refinement can only help; keep the grid point if not
        r.q_star = qs[best];
        r.value = best_v;
    }
    if (0.5 - r.q_star < 1e-9) {
        r.q_star = 0.5;
        r.value = f(0.5);
        r.boundary_hit = true;
    }
    return r;
}

double capacity(const ChannelModel& model, double q) {
    if (model.kind() == ChannelKind::linear_bsc)
        return 1.0 - binary_entropy(model.crossover_prob(q));  // uniform input optimal
    auto f = [&](double p) { return mutual_information(p, q, model); };
    return golden_max(f, 0.0, 1.0).second;
}

std::vector<std::pair<double, double>> mi_curve(const ChannelModel& model, double grid_step) {
    std::vector<std::pair<double, double>> out;
    for (double q : q_grid(grid_step)) out.emplace_back(q, mutual_information(q, q, model));
    return out;
}

}  // namespace mdsearch
