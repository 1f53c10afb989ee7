#include "mdsearch/sim_moving.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>
#include <unordered_map>

#include "mdsearch/errors.hpp"
#include "mdsearch/info_theory.hpp"
#include "mdsearch/optimize.hpp"
#include "mdsearch/parallel.hpp"
#include "mdsearch/rng.hpp"
#include "mdsearch/stats.hpp"

namespace mdsearch {

namespace {

// fractional part can round to exactly 1.0 for tiny negative positions, so
// the index needs the final mod, not a clamp
inline int sensor_of(double pos, int sensors) {
    const double u = pos - std::floor(pos);
    return static_cast<int>(u * sensors) % sensors;
}

void fill_path(double w0, double v, int sensors, int n, std::vector<int>& path) {
    path.resize(n);
    for (int i = 0; i < n; ++i) path[i] = sensor_of(w0 + v * i, sensors);
}

double interval_distance(const VelocityInterval& a, const VelocityInterval& b) {
    return std::max(0.0, std::max(a.lo, b.lo) - std::min(a.hi, b.hi));
}

double interval_point_distance(const VelocityInterval& a, double v) {
    if (v < a.lo) return a.lo - v;
    if (v > a.hi) return v - a.hi;
    return 0.0;
}

bool classes_close(const TrajectoryClass& a, const TrajectoryClass& b, int sensors,
                   double delta, int n) {
    const double ca = (a.start_sensor + 0.5) / sensors;
    const double cb = (b.start_sensor + 0.5) / sensors;
    if (cyclic_distance(ca, cb) > delta) return false;
    const double tol = delta / n;
    for (const auto& ia : a.velocities)
        for (const auto& ib : b.velocities)
            if (interval_distance(ia, ib) <= tol) return true;
    return false;
}

}  // namespace

double cyclic_distance(double a, double b) {
    double d = std::fabs(a - b);
    d -= std::floor(d);
    return std::min(d, 1.0 - d);
}

std::vector<TrajectoryClass> enumerate_trajectories(int sensors, int n, double v_max,
                                                    long long cap) {
    if (sensors < 2) throw ConfigError("trajectory enumeration needs at least 2 sensors");
    if (n < 1) throw ConfigError("trajectory enumeration needs block length >= 1");
    if (!(v_max >= 0.0 && v_max <= 0.5))
        throw ConfigError("v_max must lie in [0, 1/2]");

    // Crossing velocities: (k + 1/2)/(M j), j = 1..n-1, within [-v_max, v_max].
    // Independent of the start sensor because starts sit at bin centers.
    std::vector<double> crossings;
    for (int j = 1; j < n; ++j) {
        const double denom = static_cast<double>(sensors) * j;
        for (int k = 0;; ++k) {
            const double v = (k + 0.5) / denom;
            if (v >= v_max) break;
            crossings.push_back(v);
            crossings.push_back(-v);
        }
    }
    std::sort(crossings.begin(), crossings.end());
    // distinct crossing rationals differ by at least 1/(M n)^2, far above 1e-12
    crossings.erase(std::unique(crossings.begin(), crossings.end(),
                                [](double x, double y) { return std::fabs(x - y) < 1e-12; }),
                    crossings.end());

    // samples: both range endpoints plus every open-interval midpoint
    std::vector<VelocityInterval> samples;
    samples.push_back({-v_max, -v_max, -v_max});
    double prev = -v_max;
    for (double c : crossings) {
        if (c - prev > 1e-12) samples.push_back({prev, c, 0.5 * (prev + c)});
        prev = c;
    }
    if (v_max - prev > 1e-12) samples.push_back({prev, v_max, 0.5 * (prev + v_max)});
    if (v_max > 0.0) samples.push_back({v_max, v_max, v_max});

    const long long evals =
        static_cast<long long>(sensors) * static_cast<long long>(samples.size()) * n;
    if (evals > cap)
        throw ResourceGuardError("trajectory enumeration needs " + std::to_string(evals) +
                                 " path evaluations, cap is " + std::to_string(cap));

    std::vector<TrajectoryClass> classes;
    std::unordered_map<std::string, int> seen;
    seen.reserve(static_cast<size_t>(sensors) * samples.size());
    std::vector<int> path;
    std::string key;
    for (int s = 0; s < sensors; ++s) {
        const double w0 = (s + 0.5) / sensors;
        for (const auto& iv : samples) {
            fill_path(w0, iv.mid, sensors, n, path);
            key.assign(reinterpret_cast<const char*>(path.data()), path.size() * sizeof(int));
            auto [it, fresh] = seen.emplace(key, static_cast<int>(classes.size()));
            if (fresh) {
                TrajectoryClass c;
                c.start_sensor = s;
                c.v_repr = iv.mid;
                c.path = path;
                c.velocities.push_back(iv);
                classes.push_back(std::move(c));
            } else {
                classes[it->second].velocities.push_back(iv);
            }
        }
    }
    return classes;
}

bool are_close(const QuantizedTrajectory& a, const QuantizedTrajectory& b, int sensors,
               double delta, int n) {
    const double ca = (a.start_sensor + 0.5) / sensors;
    const double cb = (b.start_sensor + 0.5) / sensors;
    return cyclic_distance(ca, cb) <= delta && std::fabs(a.velocity - b.velocity) <= delta / n;
}

bool class_close_to(const TrajectoryClass& c, int sensors, double w0, double v, double delta,
                    int n) {
    const double center = (c.start_sensor + 0.5) / sensors;
    if (cyclic_distance(center, w0) > delta) return false;
    const double tol = delta / n;
    for (const auto& iv : c.velocities)
        if (interval_point_distance(iv, v) <= tol) return true;
    return false;
}

int count_intersections(const std::vector<int>& path_a, const std::vector<int>& path_b) {
    int c = 0;
    const size_t n = std::min(path_a.size(), path_b.size());
    for (size_t i = 0; i < n; ++i) c += path_a[i] == path_b[i] ? 1 : 0;
    return c;
}

int ml_decode_trajectory_index(const Codebook& cb, const std::vector<TrajectoryClass>& classes,
                               const std::vector<Observation>& y, const ChannelModel& model,
                               double q_decode) {
    if (classes.empty()) throw ConfigError("trajectory decode needs a nonempty class list");
    const int n = cb.cols();
    if (static_cast<int>(y.size()) != n)
        throw ConfigError("observation length does not match codebook columns");
    if (model.kind() == ChannelKind::linear_bsc && model.crossover_prob(q_decode) < 0.5) {
        // constant sub-1/2 crossover per query: likelihood is monotone in the
        // mismatch count, and integer counts keep the first-index tie order exact
        std::vector<unsigned char> yb(n);
        for (int i = 0; i < n; ++i) yb[i] = static_cast<unsigned char>(y[i].bit());
        int best = 0, best_d = n + 1;
        for (size_t c = 0; c < classes.size(); ++c) {
            const auto& path = classes[c].path;
            int d = 0;
            for (int i = 0; i < n; ++i) d += (cb.bit(path[i], i) ? 1 : 0) != yb[i];
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(c);
            }
        }
        return best;
    }
    // per-(time, bit) log-likelihoods; a class path only selects which bit
    std::vector<double> ll0(n), ll1(n);
    for (int i = 0; i < n; ++i) {
        ll0[i] = model.log_likelihood(y[i], 0, q_decode);
        ll1[i] = model.log_likelihood(y[i], 1, q_decode);
    }
    int best = 0;
    double best_ll = -HUGE_VAL;
    for (size_t c = 0; c < classes.size(); ++c) {
        double s = 0.0;
        const auto& path = classes[c].path;
        for (int i = 0; i < n; ++i) s += cb.bit(path[i], i) ? ll1[i] : ll0[i];
        if (s > best_ll) {
            best_ll = s;
            best = static_cast<int>(c);
        }
    }
    return best;
}

QuantizedTrajectory ml_decode_trajectory(const Codebook& cb,
                                         const std::vector<TrajectoryClass>& classes,
                                         const std::vector<Observation>& y,
                                         const ChannelModel& model, double q_decode) {
    const auto& c = classes[static_cast<size_t>(
        ml_decode_trajectory_index(cb, classes, y, model, q_decode))];
    return {c.start_sensor, c.v_repr, c.path};
}

namespace {

struct MovingAcc {
    long long trials = 0;
    long long errors = 0;
    long long sec_errors = 0;
    void merge(const MovingAcc& o) {
        trials += o.trials;
        errors += o.errors;
        sec_errors += o.sec_errors;
    }
};

}  // namespace

SimReport run_moving_sim(const MovingConfig& cfg) {
    if (!(cfg.delta > 0.0)) throw ConfigError("delta must be positive");
    if (cfg.n < 1) throw ConfigError("block length n must be positive");
    const double sensors_exact = cfg.n / cfg.delta;
    const int sensors = static_cast<int>(std::lround(sensors_exact));
    if (sensors < 2 || std::fabs(sensors_exact - sensors) > 1e-9 * sensors)
        throw ConfigError("sensor count n/delta must be a positive integer, got " +
                          std::to_string(sensors_exact));
    if (!(cfg.v_max >= 0.0 && cfg.v_max <= 0.5))
        throw ConfigError("v_max must lie in [0, 1/2]");
    if (cfg.trials <= 0) throw ConfigError("trials must be positive");
    double q = cfg.prior;
    if (q < 0.0)
        q = optimal_query_size(cfg.model).q_star;
    else if (!(q > 0.0 && q < 1.0))
        throw ConfigError("prior must lie in (0,1)");

    const auto classes = enumerate_trajectories(sensors, cfg.n, cfg.v_max, cfg.path_eval_cap);
    const long long n_classes = static_cast<long long>(classes.size());

    // flat copy of the paths for the decode hot loop
    std::vector<int> flat(static_cast<size_t>(n_classes) * cfg.n);
    for (long long c = 0; c < n_classes; ++c)
        std::memcpy(flat.data() + c * cfg.n, classes[c].path.data(),
                    sizeof(int) * cfg.n);

    const bool bsc = cfg.model.kind() == ChannelKind::linear_bsc;
    const int pts = std::max(1, cfg.sweep_points);

    const MovingAcc acc = parallel_trials<MovingAcc>(
        cfg.trials, cfg.threads, [&](long long t, MovingAcc& a) {
            const std::uint64_t ts =
                hash_combine(hash_combine(cfg.seed, TAG_TRIAL), static_cast<std::uint64_t>(t));
            Stream target(hash_combine(ts, TAG_TARGET));
            const double w0 = (static_cast<double>(t % pts) + target.u01()) / pts;
            const double v = cfg.v_max > 0.0 ? -cfg.v_max + target.u01() * 2.0 * cfg.v_max : 0.0;
            const Codebook cb = Codebook::generate(sensors, cfg.n, q, ts);
            Stream ch(hash_combine(ts, TAG_CHANNEL));

            // truth path and observations; queries are the raw column supports
            // (no dither: it has no analog for unknown velocity)
            std::vector<int> truth(cfg.n);
            long long best = 0;
            if (bsc) {
                std::vector<unsigned char> mismatch(static_cast<size_t>(cfg.n) * sensors);
                for (int i = 0; i < cfg.n; ++i) {
                    truth[i] = sensor_of(w0 + v * i, sensors);
                    const int x = cb.bit(truth[i], i) ? 1 : 0;
                    const Observation yo =
                        cfg.model.sample_output(x, cb.query_size(i), ch);
                    const int yb = yo.value != 0.0 ? 1 : 0;
                    unsigned char* row = mismatch.data() + static_cast<size_t>(i) * sensors;
                    for (int j = 0; j < sensors; ++j)
                        row[j] = static_cast<unsigned char>((cb.bit(j, i) ? 1 : 0) != yb);
                }
                int best_d = cfg.n + 1;
                const int* p = flat.data();
                for (long long c = 0; c < n_classes; ++c) {
                    int d = 0;
                    for (int i = 0; i < cfg.n; ++i)
                        d += mismatch[static_cast<size_t>(i) * sensors + p[i]];
                    if (d < best_d) {
                        best_d = d;
                        best = c;
                    }
                    p += cfg.n;
                }
            } else {
                std::vector<double> ll(static_cast<size_t>(cfg.n) * sensors);
                for (int i = 0; i < cfg.n; ++i) {
                    truth[i] = sensor_of(w0 + v * i, sensors);
                    const int x = cb.bit(truth[i], i) ? 1 : 0;
                    const Observation yo =
                        cfg.model.sample_output(x, cb.query_size(i), ch);
                    const double l0 = cfg.model.log_likelihood(yo, 0, q);
                    const double l1 = cfg.model.log_likelihood(yo, 1, q);
                    double* row = ll.data() + static_cast<size_t>(i) * sensors;
                    for (int j = 0; j < sensors; ++j) row[j] = cb.bit(j, i) ? l1 : l0;
                }
                double best_ll = -HUGE_VAL;
                const int* p = flat.data();
                for (long long c = 0; c < n_classes; ++c) {
                    double s = 0.0;
                    for (int i = 0; i < cfg.n; ++i)
                        s += ll[static_cast<size_t>(i) * sensors + p[i]];
                    if (s > best_ll) {
                        best_ll = s;
                        best = c;
                    }
                    p += cfg.n;
                }
            }

            const auto& dec = classes[static_cast<size_t>(best)];
            const bool err = !class_close_to(dec, sensors, w0, v, cfg.delta, cfg.n);
            const double center = (dec.start_sensor + 0.5) / sensors;
            const double end_true = w0 + v * cfg.n;
            const double end_est = center + dec.v_repr * cfg.n;
            const bool sec_err = !(cyclic_distance(end_est, end_true) <= cfg.delta &&
                                   std::fabs(dec.v_repr - v) <= cfg.delta / cfg.n);
            ++a.trials;
            a.errors += err ? 1 : 0;
            a.sec_errors += sec_err ? 1 : 0;
        });

    SimReport r;
    r.scheme_tag = "moving";
    r.trials = acc.trials;
    r.block_length = cfg.n;
    r.rate = std::log2(static_cast<double>(sensors) / cfg.n) / cfg.n;
    r.bins = sensors;
    r.resolved_prior = q;
    r.error_rate = acc.trials ? static_cast<double>(acc.errors) / acc.trials : 0.0;
    r.error_ci = wilson_ci(acc.errors, acc.trials);
    r.mean_stopping_time = cfg.n;
    r.stopping_time_ci = {static_cast<double>(cfg.n), static_cast<double>(cfg.n)};
    r.class_count = n_classes;
    r.secondary_error_rate = acc.trials ? static_cast<double>(acc.sec_errors) / acc.trials : 0.0;
    r.secondary_error_ci = wilson_ci(acc.sec_errors, acc.trials);
    if (cfg.v_max > 0.0) {
        const auto bounds = moving_rate_bounds(q, cfg.v_max, cfg.model);
        r.achievable_rate_bound = bounds.first;
        r.converse_rate_bound = bounds.second;
    } else {
        const double half = 0.5 * mutual_information(q, q, cfg.model);
        r.achievable_rate_bound = half;
        r.converse_rate_bound = half;
    }
    return r;
}

MovingAudit audit_trajectory_bounds(int sensors, int n, double v_max, long long cap) {
    const auto classes = enumerate_trajectories(sensors, n, v_max, cap);
    const int count = static_cast<int>(classes.size());
    MovingAudit audit;
    audit.n = n;
    audit.sensors = sensors;
    audit.v_max = v_max;
    audit.class_count = count;
    audit.count_bound = (2.0 * n * v_max + 3.0) * n * n * static_cast<double>(sensors) * sensors;
    audit.intersection_bound = static_cast<int>(std::ceil(2.0 * n * v_max));
    const double delta = static_cast<double>(n) / sensors;

    // co-occurrence buckets: classes listed per (time, sensor) cell; two paths
    // meet exactly as often as they share a cell
    std::vector<std::vector<int>> buckets(static_cast<size_t>(n) * sensors);
    for (int c = 0; c < count; ++c)
        for (int i = 0; i < n; ++i)
            buckets[static_cast<size_t>(i) * sensors + classes[c].path[i]].push_back(c);

    std::vector<int> meet(count, 0);
    std::vector<int> touched;
    touched.reserve(1024);
    // scan floor: low enough to report how close far pairs come to the bound,
    // lowered further only if no far pair reaches it
    int floor_cnt = std::max(1, audit.intersection_bound - 2);
    for (;;) {
        long long violations = 0;
        int max_far = 0;
        bool any_far = false;
        for (int c = 0; c < count; ++c) {
            touched.clear();
            for (int i = 0; i < n; ++i) {
                const auto& cell =
                    buckets[static_cast<size_t>(i) * sensors + classes[c].path[i]];
                for (int other : cell) {
                    if (other <= c) continue;
                    if (meet[other]++ == 0) touched.push_back(other);
                }
            }
            for (int other : touched) {
                const int m = meet[other];
                meet[other] = 0;
                if (m < floor_cnt) continue;
                if (classes_close(classes[c], classes[other], sensors, delta, n)) continue;
                any_far = true;
                max_far = std::max(max_far, m);
                if (m > audit.intersection_bound) ++violations;
            }
        }
        audit.violations = violations;
        audit.max_far_intersections = max_far;
        if (any_far || floor_cnt == 1) break;
        floor_cnt = 1;
    }
    return audit;
}

}  // namespace mdsearch
