#pragma once

#include <cstdint>
#include <vector>

#include "mdsearch/channel.hpp"
#include "mdsearch/codebook.hpp"
#include "mdsearch/sim_stationary.hpp"

namespace mdsearch {

// Constant-velocity target on the unit circle, quantized to the sensor grid:
// start at a sensor center, position w0 + v*n observed through sensor index
// floor(position * M) mod M at each query time n in [0, N).

struct QuantizedTrajectory {
    int start_sensor = 0;
    double velocity = 0.0;
    std::vector<int> path;  // sensor index per query time
};

// All (start, velocity) pairs that produce one sensor path. The start sensor
// is shared (the path pins it at n = 0); velocities form closed intervals
// between consecutive crossing velocities, plus the range endpoints.
struct VelocityInterval {
    double lo = 0.0, hi = 0.0, mid = 0.0;
};

struct TrajectoryClass {
    int start_sensor = 0;
    double v_repr = 0.0;  // lowest member sample; repr = (start_sensor, v_repr)
    std::vector<int> path;
    std::vector<VelocityInterval> velocities;
};

struct MovingConfig {
    ChannelModel model;
    double delta = 0.0;   // resolution; sensor count M = n/delta must be integral
    int n = 0;            // block length
    double v_max = 0.0;   // speed bound, cycles per query step; 0 degenerates to
                          // the stationary search over sensor bins
    double prior = -1.0;  // query bit probability; <0 = optimized value
    long long trials = 1000;
    std::uint64_t seed = 1;
    int threads = 1;
    int sweep_points = 50;           // start-position stratification cells
    long long path_eval_cap = 50000000;  // enumeration resource guard
};

double cyclic_distance(double a, double b);

// Exact enumeration of distinct sensor paths over start centers and the full
// velocity range. Crossing velocities (where some coordinate sits exactly on
// a sensor boundary) are the same half-integer grid (k+1/2)/(M n) for every
// start, so the class set is complete: sampling every open interval midpoint
// plus both endpoints reaches every realizable path, including the paths at
// the crossings themselves (which floor onto the interval just above).
// Throws ResourceGuardError when starts * samples * n exceeds cap.
std::vector<TrajectoryClass> enumerate_trajectories(int sensors, int n, double v_max,
                                                    long long cap = 50000000);

// Parameter closeness at resolution delta: start centers within delta
// cyclically AND velocities within delta/n.
bool are_close(const QuantizedTrajectory& a, const QuantizedTrajectory& b, int sensors,
               double delta, int n);

// Class-level closeness against a continuous ground truth: some member
// velocity interval comes within delta/n of v (and the start center within
// delta of w0).
bool class_close_to(const TrajectoryClass& c, int sensors, double w0, double v, double delta,
                    int n);

int count_intersections(const std::vector<int>& path_a, const std::vector<int>& path_b);

// argmax over enumerated classes of the block likelihood of y, columns read
// from the codebook rows along each class path; ties toward the first class
// in enumeration order, i.e. the lexicographically smallest
// (start_sensor, velocity) representative.
int ml_decode_trajectory_index(const Codebook& cb, const std::vector<TrajectoryClass>& classes,
                               const std::vector<Observation>& y, const ChannelModel& model,
                               double q_decode);
QuantizedTrajectory ml_decode_trajectory(const Codebook& cb,
                                         const std::vector<TrajectoryClass>& classes,
                                         const std::vector<Observation>& y,
                                         const ChannelModel& model, double q_decode);

// Error rate of trajectory search against continuous ground truth: per trial,
// w0 stratified-uniform, V uniform on [-v_max, v_max], fresh codebook; an
// error is a decoded class with no member close to the truth. The secondary
// rate judges the representative's endpoint position and velocity instead.
SimReport run_moving_sim(const MovingConfig& cfg);

// Enumeration-size and pairwise-intersection audit at resolution
// delta = n/sensors:
//   class_count      <= (2 n v_max + 3) n^2 M^2
//   far pairs meet in <= ceil(2 n v_max) sensors ("violations" counts those
//                        that do not; far = not close at resolution delta)
struct MovingAudit {
    int n = 0, sensors = 0;
    double v_max = 0.0;
    long long class_count = 0;
    double count_bound = 0.0;
    int max_far_intersections = 0;
    int intersection_bound = 0;
    long long violations = 0;
};
MovingAudit audit_trajectory_bounds(int sensors, int n, double v_max,
                                    long long cap = 50000000);

}  // namespace mdsearch
