#include "mdsearch/sim_stationary.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mdsearch/codebook.hpp"
#include "mdsearch/errors.hpp"
#include "mdsearch/info_theory.hpp"
#include "mdsearch/optimize.hpp"
#include "mdsearch/parallel.hpp"
#include "mdsearch/quadrature.hpp"
#include "mdsearch/rng.hpp"

namespace mdsearch {

namespace {

struct Resolved {
    int bins = 0;
    int n = 0;
    double rate = 0.0;
};

Resolved resolve_block(const SearchConfig& cfg) {
    if (!(cfg.delta > 0.0) || cfg.delta > 0.5)
        throw ConfigError("delta must lie in (0, 1/2]");
    const int bins = static_cast<int>(std::lround(1.0 / cfg.delta));
    if (bins < 2) throw ConfigError("delta must give at least 2 bins");
    int n = cfg.n;
    if (n <= 0) {
        if (!(cfg.rate > 0.0))
            throw ConfigError("either block length n or rate must be positive");
        n = std::max(1, static_cast<int>(
                            std::ceil(std::log2(static_cast<double>(bins)) / cfg.rate - 1e-9)));
    }
    return {bins, n, std::log2(static_cast<double>(bins)) / n};
}

double resolve_prior(const SearchConfig& cfg) {
    if (cfg.prior < 0.0) return optimal_query_size(cfg.model).q_star;
    if (!(cfg.prior > 0.0 && cfg.prior < 1.0)) throw ConfigError("prior must lie in (0,1)");
    return cfg.prior;
}

// Deterministic worst-case placement: sweep_points grid centers plus the two
// offsets just inside the center's resolution-bin boundaries, cycled by trial
// index. *cell gets the sweep position for per-position statistics (-1 when
// the target is drawn uniformly instead).
double target_position(const SearchConfig& cfg, int bins, long long t, Stream& ts, int* cell) {
    if (!cfg.sweep_w) {
        *cell = -1;
        return ts.u01();
    }
    const int pts = std::max(1, cfg.sweep_points);
    const long long idx = t % (3LL * pts);
    const int p = static_cast<int>(idx % pts);
    const int variant = static_cast<int>(idx / pts);
    *cell = p;
    const double w = (p + 0.5) / pts;
    if (variant == 0) return w;
    const int bin = std::min(static_cast<int>(w * bins), bins - 1);
    const double width = 1.0 / bins;
    return variant == 1 ? bin * width + 1e-9 : (bin + 1) * width - 1e-9;
}

struct Acc {
    long long trials = 0;
    long long errors = 0;
    long long erase_first = 0;
    long long truncated = 0;
    double tau_sum = 0.0, tau_sq = 0.0;
    RestartIdentity rid;
    std::vector<long long> sweep_err, sweep_cnt;

    void record(bool err, int e_first, double tau, bool trunc, int cell, int cells) {
        ++trials;
        errors += err ? 1 : 0;
        erase_first += e_first;
        truncated += trunc ? 1 : 0;
        tau_sum += tau;
        tau_sq += tau * tau;
        rid.add(tau, e_first);
        if (cell >= 0) {
            if (sweep_err.empty()) {
                sweep_err.assign(cells, 0);
                sweep_cnt.assign(cells, 0);
            }
            sweep_err[cell] += err ? 1 : 0;
            sweep_cnt[cell] += 1;
        }
    }
    void merge(const Acc& o) {
        trials += o.trials;
        errors += o.errors;
        erase_first += o.erase_first;
        truncated += o.truncated;
        tau_sum += o.tau_sum;
        tau_sq += o.tau_sq;
        rid.merge(o.rid);
        if (!o.sweep_err.empty()) {
            if (sweep_err.empty()) {
                sweep_err.assign(o.sweep_err.size(), 0);
                sweep_cnt.assign(o.sweep_cnt.size(), 0);
            }
            for (size_t i = 0; i < o.sweep_err.size(); ++i) {
                sweep_err[i] += o.sweep_err[i];
                sweep_cnt[i] += o.sweep_cnt[i];
            }
        }
    }
};

void fill_stats(SimReport& r, const Acc& acc, int block_len) {
    r.trials = acc.trials;
    r.error_rate = acc.trials ? static_cast<double>(acc.errors) / acc.trials : 0.0;
    r.error_ci = wilson_ci(acc.errors, acc.trials);
    r.erasure_rate = acc.trials ? static_cast<double>(acc.erase_first) / acc.trials : 0.0;
    r.erasure_ci = wilson_ci(acc.erase_first, acc.trials);
    r.mean_stopping_time = acc.trials ? acc.tau_sum / acc.trials : 0.0;
    r.stopping_time_ci = mean_ci(acc.tau_sum, acc.tau_sq, acc.trials);
    r.truncated_trials = acc.truncated;
    r.restart_identity_dev = acc.rid.deviation(block_len);
    r.restart_identity_halfwidth = acc.rid.halfwidth();
    r.sweep_errors = acc.sweep_err;
    r.sweep_counts = acc.sweep_cnt;
}

std::uint64_t trial_seed(const SearchConfig& cfg, long long t) {
    return hash_combine(hash_combine(cfg.seed, TAG_TRIAL), static_cast<std::uint64_t>(t));
}

void sample_block(const Codebook& cb, int m_true, const ChannelModel& model, Stream& ch,
                  std::vector<Observation>& y) {
    y.clear();
    for (int n = 0; n < cb.cols(); ++n) {
        const int x = (m_true >= 0 && cb.bit(m_true, n)) ? 1 : 0;
        y.push_back(model.sample_output(x, cb.query_size(n), ch));
    }
}

void check_trials(const SearchConfig& cfg) {
    if (cfg.trials <= 0) throw ConfigError("trials must be positive");
    if (cfg.max_attempts <= 0) throw ConfigError("max_attempts must be positive");
}

}  // namespace

bool validation_accepts(const std::vector<Observation>& y_val, const ChannelModel& model,
                        double q_val, double threshold_bits) {
    double s = 0.0;
    for (const auto& y : y_val)
        s += model.log_likelihood(y, 1, q_val) - model.log_likelihood(y, 0, q_val);
    // NaN (contradictory noiseless evidence) fails the comparison and erases.
    return s >= threshold_bits;
}

double default_validation_threshold(const ChannelModel& model, double q_val, int n_val,
                                    double false_erase) {
    if (n_val <= 0) throw ConfigError("validation block length must be positive");
    if (!(false_erase > 0.0 && false_erase < 0.5))
        throw ConfigError("false-erase target must lie in (0, 1/2)");
    const double z = normal_quantile(1.0 - false_erase);
    double mu1 = 0.0, var1 = 0.0;
    if (model.kind() == ChannelKind::linear_bsc) {
        const double p = model.crossover_prob(q_val);
        if (p == 0.0) return 0.0;  // noiseless validation: consistent evidence suffices
        const double kap = std::log2((1.0 - p) / p);
        mu1 = (1.0 - 2.0 * p) * kap;
        var1 = 4.0 * p * (1.0 - p) * kap * kap;
    } else {
        const double sd = std::sqrt(model.hit_variance(q_val));
        const double lo = model.mu() - 12.0 * sd, hi = model.mu() + 12.0 * sd;
        auto llr = [&](double y) {
            return model.log_likelihood(y, 1, q_val) - model.log_likelihood(y, 0, q_val);
        };
        auto f1 = [&](double y) { return std::exp2(model.log_likelihood(y, 1, q_val)); };
        mu1 = integrate([&](double y) { return llr(y) * f1(y); }, lo, hi);
        const double m2 = integrate([&](double y) { const double l = llr(y); return l * l * f1(y); },
                                    lo, hi);
        var1 = std::max(0.0, m2 - mu1 * mu1);
    }
    return n_val * mu1 - z * std::sqrt(static_cast<double>(n_val) * var1);
}

SimReport run_nonadaptive(const SearchConfig& cfg) {
    const Resolved rb = resolve_block(cfg);
    const double q = resolve_prior(cfg);
    check_trials(cfg);
    const int cells = cfg.sweep_w ? std::max(1, cfg.sweep_points) : 0;
    const Acc acc = parallel_trials<Acc>(cfg.trials, cfg.threads, [&](long long t, Acc& a) {
        const std::uint64_t ts = trial_seed(cfg, t);
        Stream target_stream(hash_combine(ts, TAG_TARGET));
        int cell = -1;
        const double w = target_position(cfg, rb.bins, t, target_stream, &cell);
        const Codebook cb = Codebook::generate(rb.bins, rb.n, q, ts);
        const int m_true = cb.encode_target(w);
        Stream ch(hash_combine(ts, TAG_CHANNEL));
        std::vector<Observation> y;
        y.reserve(rb.n);
        sample_block(cb, m_true, cfg.model, ch, y);
        const bool err = ml_decode(cb, y, cfg.model, q) != m_true;
        a.record(err, 0, rb.n, false, cell, cells);
    });
    SimReport r;
    r.scheme_tag = "nonadaptive";
    r.block_length = rb.n;
    r.rate = rb.rate;
    r.bins = rb.bins;
    r.resolved_prior = q;
    fill_stats(r, acc, rb.n);
    return r;
}

SimReport run_forney(const SearchConfig& cfg) {
    const Resolved rb = resolve_block(cfg);
    const double q = resolve_prior(cfg);
    check_trials(cfg);
    if (!(cfg.forney_threshold >= 0.0))
        throw ConfigError("acceptance threshold must be >= 0");
    const int cells = cfg.sweep_w ? std::max(1, cfg.sweep_points) : 0;
    const Acc acc = parallel_trials<Acc>(cfg.trials, cfg.threads, [&](long long t, Acc& a) {
        const std::uint64_t ts = trial_seed(cfg, t);
        Stream target_stream(hash_combine(ts, TAG_TARGET));
        int cell = -1;
        const double w = target_position(cfg, rb.bins, t, target_stream, &cell);
        bool err = false, trunc = false;
        int e_first = 0;
        long long attempts = 0;
        std::vector<Observation> y;
        y.reserve(rb.n);
        for (;;) {
            const std::uint64_t as = hash_combine(ts, static_cast<std::uint64_t>(attempts));
            const Codebook cb = Codebook::generate(rb.bins, rb.n, q, as);
            const int m_true = cb.encode_target(w);
            Stream ch(hash_combine(as, TAG_CHANNEL));
            sample_block(cb, m_true, cfg.model, ch, y);
            const ForneyDecision d =
                forney_decision(cb, y, cfg.model, cfg.forney_threshold, q);
            ++attempts;
            if (attempts == 1) e_first = d.erased ? 1 : 0;
            if (!d.erased) {
                err = d.index != m_true;
                break;
            }
            if (attempts >= cfg.max_attempts) {
                trunc = true;
                break;
            }
        }
        a.record(err, e_first, static_cast<double>(attempts) * rb.n, trunc, cell, cells);
    });
    SimReport r;
    r.scheme_tag = "forney";
    r.block_length = rb.n;
    r.rate = rb.rate;
    r.bins = rb.bins;
    r.resolved_prior = q;
    fill_stats(r, acc, rb.n);
    return r;
}

SimReport run_yamamoto_itoh(const SearchConfig& cfg) {
    const Resolved rb = resolve_block(cfg);
    if (rb.n < 2) throw ConfigError("two-stage block needs length >= 2");
    const double q = resolve_prior(cfg);
    check_trials(cfg);
    const double istar = mutual_information(q, q, cfg.model);
    double lam = cfg.yi_lambda;
    if (lam < 0.0)
        lam = std::clamp(1.0 - rb.rate / istar, 0.05, 0.95);
    else if (!(lam > 0.0 && lam < 1.0))
        throw ConfigError("lambda must lie in (0,1)");
    const int n1 = std::clamp(static_cast<int>(std::lround((1.0 - lam) * rb.n)), 1, rb.n - 1);
    const int n_val = rb.n - n1;
    const double q_val = 1.0 / rb.bins;  // probe exactly the decoded bin
    const double thr = std::isnan(cfg.val_threshold)
                           ? default_validation_threshold(cfg.model, q_val, n_val,
                                                          cfg.val_false_erase)
                           : cfg.val_threshold;
    const int cells = cfg.sweep_w ? std::max(1, cfg.sweep_points) : 0;
    const Acc acc = parallel_trials<Acc>(cfg.trials, cfg.threads, [&](long long t, Acc& a) {
        const std::uint64_t ts = trial_seed(cfg, t);
        Stream target_stream(hash_combine(ts, TAG_TARGET));
        int cell = -1;
        const double w = target_position(cfg, rb.bins, t, target_stream, &cell);
        bool err = false, trunc = false;
        int e_first = 0;
        long long attempts = 0;
        std::vector<Observation> y, y_val;
        y.reserve(n1);
        y_val.reserve(n_val);
        for (;;) {
            const std::uint64_t as = hash_combine(ts, static_cast<std::uint64_t>(attempts));
            const Codebook cb = Codebook::generate(rb.bins, n1, q, as);
            const int m_true = cb.encode_target(w);
            Stream ch(hash_combine(as, TAG_CHANNEL));
            sample_block(cb, m_true, cfg.model, ch, y);
            const int dec = ml_decode(cb, y, cfg.model, q);
            const int x_val = dec == m_true ? 1 : 0;  // queries the decoded bin
            y_val.clear();
            for (int i = 0; i < n_val; ++i)
                y_val.push_back(cfg.model.sample_output(x_val, q_val, ch));
            ++attempts;
            const bool accept = validation_accepts(y_val, cfg.model, q_val, thr);
            if (attempts == 1) e_first = accept ? 0 : 1;
            if (accept) {
                err = dec != m_true;
                break;
            }
            if (attempts >= cfg.max_attempts) {
                trunc = true;
                break;
            }
        }
        a.record(err, e_first, static_cast<double>(attempts) * rb.n, trunc, cell, cells);
    });
    SimReport r;
    r.scheme_tag = "yamamoto_itoh";
    r.block_length = rb.n;
    r.rate = rb.rate;
    r.bins = rb.bins;
    r.resolved_prior = q;
    r.resolved_lambda = lam;
    r.resolved_val_threshold = thr;
    fill_stats(r, acc, rb.n);
    return r;
}

SimReport run_two_phase(const SearchConfig& cfg) {
    if (!(cfg.alpha > 0.0) || cfg.alpha > 0.5)
        throw ConfigError("alpha must lie in (0, 1/2]");
    if (!(cfg.delta > 0.0) || cfg.delta >= cfg.alpha)
        throw ConfigError("delta must lie in (0, alpha)");
    const int m1 = static_cast<int>(std::lround(1.0 / cfg.alpha));
    const int m2 = static_cast<int>(std::lround(cfg.alpha / cfg.delta));
    if (m1 < 2) throw ConfigError("alpha must give at least 2 coarse intervals");
    if (m2 < 2) throw ConfigError("delta must give at least 2 bins per coarse interval");
    if (cfg.n1 <= 0 || cfg.n2 <= 0 || cfg.n3 <= 0)
        throw ConfigError("stage lengths n1, n2, n3 must all be positive");
    check_trials(cfg);
    const double alpha_eff = 1.0 / m1;
    const long long bins_total = static_cast<long long>(m1) * m2;
    const double q1 = resolve_prior(cfg);

    // Refinement stage: queries are subsets of the declared alpha-interval, so
    // a bit probability q there is a circle fraction alpha*q at the channel.
    auto phase2_mi = [&](double q) { return mutual_information(q, alpha_eff * q, cfg.model); };
    double best_q = 0.5, best_v = -1.0;
    {
        const int pts = 1000;
        std::vector<double> vals(pts - 1);
        int best_i = 0;
        for (int i = 1; i < pts; ++i) {
            vals[i - 1] = phase2_mi(static_cast<double>(i) / pts);
            if (vals[i - 1] > vals[best_i]) best_i = i - 1;
        }
        const double lo = static_cast<double>(best_i) / pts;          // one cell left
        const double hi = static_cast<double>(best_i + 2) / pts;      // one cell right
        const auto ref = golden_max(phase2_mi, std::max(lo, 1e-12), std::min(hi, 1.0 - 1e-12));
        best_q = ref.first;
        best_v = ref.second;
        if (vals[best_i] > best_v) {
            best_q = static_cast<double>(best_i + 1) / pts;
            best_v = vals[best_i];
        }
    }
    double q2 = cfg.q2;
    if (q2 < 0.0)
        q2 = best_q;
    else if (!(q2 > 0.0 && q2 < 1.0))
        throw ConfigError("q2 must lie in (0,1)");
    const double r2 = std::log2(static_cast<double>(m2)) / cfg.n2;
    if (r2 > best_v + 1e-12)
        throw ConfigError("refinement rate " + std::to_string(r2) +
                          " bits/query exceeds the stage maximum " + std::to_string(best_v));

    const double q_val = 1.0 / static_cast<double>(bins_total);
    const double thr = std::isnan(cfg.val_threshold)
                           ? default_validation_threshold(cfg.model, q_val, cfg.n3,
                                                          cfg.val_false_erase)
                           : cfg.val_threshold;
    const int block = cfg.n1 + cfg.n2 + cfg.n3;
    const int cells = cfg.sweep_w ? std::max(1, cfg.sweep_points) : 0;

    const Acc acc = parallel_trials<Acc>(cfg.trials, cfg.threads, [&](long long t, Acc& a) {
        const std::uint64_t ts = trial_seed(cfg, t);
        Stream target_stream(hash_combine(ts, TAG_TARGET));
        int cell = -1;
        const double w = target_position(cfg, static_cast<int>(bins_total), t, target_stream,
                                         &cell);
        bool err = false, trunc = false;
        int e_first = 0;
        long long attempts = 0;
        std::vector<Observation> y1, y2, y3;
        y1.reserve(cfg.n1);
        y2.reserve(cfg.n2);
        y3.reserve(cfg.n3);
        const long long true_g =
            std::min(static_cast<long long>(w * bins_total), bins_total - 1);
        for (;;) {
            const std::uint64_t as = hash_combine(ts, static_cast<std::uint64_t>(attempts));
            Stream ch(hash_combine(as, TAG_CHANNEL));

            const Codebook cb1 = Codebook::generate(m1, cfg.n1, q1, hash_combine(as, 1));
            const int m1_true = cb1.encode_target(w);
            sample_block(cb1, m1_true, cfg.model, ch, y1);
            const int dec1 = ml_decode(cb1, y1, cfg.model, q1);
            const int declared1 = (dec1 + cb1.dither_shift()) % m1;

            const Codebook cb2 = Codebook::generate(m2, cfg.n2, q2, hash_combine(as, 2));
            int m2_true = -1;
            if (static_cast<int>(true_g / m2) == declared1)
                m2_true = cb2.encode_target(w * m1 - declared1);
            y2.clear();
            for (int n = 0; n < cfg.n2; ++n) {
                const int x = (m2_true >= 0 && cb2.bit(m2_true, n)) ? 1 : 0;
                y2.push_back(cfg.model.sample_output(x, cb2.query_size(n) * alpha_eff, ch));
            }
            const int dec2 = ml_decode(cb2, y2, cfg.model, q2 * alpha_eff);
            const int declared2 = (dec2 + cb2.dither_shift()) % m2;

            const long long g = static_cast<long long>(declared1) * m2 + declared2;
            const int x3 = g == true_g ? 1 : 0;
            y3.clear();
            for (int i = 0; i < cfg.n3; ++i)
                y3.push_back(cfg.model.sample_output(x3, q_val, ch));
            ++attempts;
            const bool accept = validation_accepts(y3, cfg.model, q_val, thr);
            if (attempts == 1) e_first = accept ? 0 : 1;
            if (accept) {
                err = g != true_g;
                break;
            }
            if (attempts >= cfg.max_attempts) {
                trunc = true;
                break;
            }
        }
        a.record(err, e_first, static_cast<double>(attempts) * block, trunc, cell, cells);
    });
    SimReport r;
    r.scheme_tag = "two_phase";
    r.block_length = block;
    r.rate = std::log2(static_cast<double>(bins_total)) / block;
    r.bins = static_cast<int>(bins_total);
    r.resolved_prior = q1;
    r.resolved_q2 = q2;
    r.resolved_val_threshold = thr;
    fill_stats(r, acc, block);
    return r;
}

nlohmann::ordered_json SimReport::to_json() const {
    nlohmann::ordered_json j;
    j["scheme"] = scheme_tag;
    j["trials"] = trials;
    j["block_length"] = block_length;
    j["rate"] = rate;
    j["bins"] = bins;
    j["error_rate"] = error_rate;
    j["error_ci"] = {error_ci.lo, error_ci.hi};
    j["erasure_rate"] = erasure_rate;
    j["erasure_ci"] = {erasure_ci.lo, erasure_ci.hi};
    j["mean_stopping_time"] = mean_stopping_time;
    j["stopping_time_ci"] = {stopping_time_ci.lo, stopping_time_ci.hi};
    j["truncated_trials"] = truncated_trials;
    j["restart_identity_dev"] = restart_identity_dev;
    j["restart_identity_halfwidth"] = restart_identity_halfwidth;
    nlohmann::ordered_json res;
    res["prior"] = resolved_prior;
    res["lambda"] = resolved_lambda;
    res["val_threshold"] = resolved_val_threshold;
    res["q2"] = resolved_q2;
    j["resolved"] = res;
    if (!sweep_errors.empty()) {
        j["sweep_errors"] = sweep_errors;
        j["sweep_counts"] = sweep_counts;
    }
    if (class_count > 0) {
        j["class_count"] = class_count;
        j["secondary_error_rate"] = secondary_error_rate;
        j["secondary_error_ci"] = {secondary_error_ci.lo, secondary_error_ci.hi};
        j["achievable_rate_bound"] = achievable_rate_bound;
        j["converse_rate_bound"] = converse_rate_bound;
    }
    return j;
}

}  // namespace mdsearch
