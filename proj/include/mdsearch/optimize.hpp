#pragma once

#include <utility>
#include <vector>

#include "mdsearch/channel.hpp"

namespace mdsearch {

struct OptimumReport {
    double q_star = 0.0;
    double value = 0.0;           // I_XY(q_star, q_star) in bits
    double grid_resolution = 0.0;
    bool refined = false;         // golden-section refinement ran
    bool boundary_hit = false;    // maximizer sits at the domain edge q = 0.5
};

// Maximize I_XY(q,q) over q in (0, 0.5]: exhaustive grid (the functional is
// not concave in q) then golden-section refinement around the best grid cell.
// Ties break toward smaller q. grid_step must be in (0, 1e-2].
OptimumReport optimal_query_size(const ChannelModel& model, double grid_step = 1e-3);

// C(q) = max_p I_XY(p, q). Closed form 1 - h2(p(q)) for linear_bsc (uniform
// input is optimal by symmetry); golden-section over the input prior for
// gaussian_pair (mutual information is concave in the input distribution).
double capacity(const ChannelModel& model, double q);

// The functional I_XY(q,q) sampled on (0, 0.5]: points k*grid_step plus the
// right endpoint 0.5 exactly.
std::vector<std::pair<double, double>> mi_curve(const ChannelModel& model,
                                                double grid_step = 1e-3);

}  // namespace mdsearch
