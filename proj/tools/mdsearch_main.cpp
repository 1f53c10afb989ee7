#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "mdsearch/channel.hpp"
#include "mdsearch/config.hpp"
#include "mdsearch/errors.hpp"
#include "mdsearch/info_theory.hpp"
#include "mdsearch/optimize.hpp"
#include "mdsearch/rng.hpp"
#include "mdsearch/sim_moving.hpp"
#include "mdsearch/sim_stationary.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

using mdsearch::ConfigError;
using mdsearch::ConfigFile;

std::string fmt_g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string iso8601_now() {
    const std::time_t t = std::time(nullptr);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write output file: " + path);
    out << content;
    if (!out) throw ConfigError("failed writing output file: " + path);
}

// Every config key, overridable as a --section.key flag on any subcommand.
struct KeySpec {
    const char* key;
    const char* help;
};
const std::vector<KeySpec>& known_keys() {
    static const std::vector<KeySpec> keys = {
        {"channel.model", "channel family: linear_bsc | gaussian_pair"},
        {"channel.a", "linear_bsc crossover slope in p(q) = a*q + b"},
        {"channel.b", "linear_bsc crossover offset"},
        {"channel.mu", "gaussian_pair hit mean"},
        {"channel.a_var", "gaussian_pair hit variance slope"},
        {"channel.b_var", "gaussian_pair miss variance slope"},
        {"scheme.name", "nonadaptive | forney | yamamoto-itoh | two-phase | moving"},
        {"scheme.delta", "target resolution"},
        {"scheme.rate", "bits per query (used when scheme.n is unset)"},
        {"scheme.n", "block length per attempt"},
        {"scheme.prior", "query bit probability; unset = optimized"},
        {"scheme.threshold", "acceptance margin in bits/query (forney)"},
        {"scheme.lambda", "validation fraction (yamamoto-itoh); unset = rate-derived"},
        {"scheme.val_threshold", "validation LLR threshold in bits; unset = Neyman-Pearson"},
        {"scheme.val_false_erase", "validation false-erase target for the default threshold"},
        {"scheme.alpha", "coarse resolution (two-phase)"},
        {"scheme.n1", "coarse stage length (two-phase)"},
        {"scheme.n2", "refinement stage length (two-phase)"},
        {"scheme.n3", "validation stage length (two-phase)"},
        {"scheme.q2", "refinement bit probability (two-phase); unset = optimized"},
        {"scheme.v_max", "target speed bound (moving, bounds-audit)"},
        {"scheme.rho_max", "tilt cap for the erasure-decoding exponent"},
        {"scheme.max_attempts", "restart guard per trial"},
        {"sim.trials", "number of independent trials"},
        {"sim.seed", "master seed"},
        {"sim.threads", "worker threads"},
        {"sim.w_policy", "target placement: uniform | sweep"},
        {"sim.sweep_points", "grid positions for the sweep placement"},
        {"sim.grid_step", "q grid step for mi-curve / optimize"},
        {"sim.rate_points", "rate grid size for exponents"},
        {"sim.sweep_n", "comma-separated block lengths (simulate, bounds-audit)"},
        {"sim.export_trajectories", "CSV path for the enumerated classes (bounds-audit)"},
        {"sim.path_eval_cap", "trajectory enumeration resource guard"},
    };
    return keys;
}

struct CommonOpts {
    std::string config_path;
    std::string out_path;
    std::vector<std::pair<std::string, std::string>> overrides;
};

void add_common(CLI::App* cmd, CommonOpts& c) {
    cmd->add_option("--config", c.config_path, "INI config file");
    cmd->add_option("--out", c.out_path, "output file path");
    // short aliases for the common sim keys
    cmd->add_option_function<std::string>(
        "--seed", [&c](const std::string& v) { c.overrides.emplace_back("sim.seed", v); },
        "alias for --sim.seed");
    cmd->add_option_function<std::string>(
        "--trials", [&c](const std::string& v) { c.overrides.emplace_back("sim.trials", v); },
        "alias for --sim.trials");
    cmd->add_option_function<std::string>(
        "--threads", [&c](const std::string& v) { c.overrides.emplace_back("sim.threads", v); },
        "alias for --sim.threads");
    for (const auto& spec : known_keys()) {
        const std::string key = spec.key;
        cmd->add_option_function<std::string>(
            "--" + key, [&c, key](const std::string& v) { c.overrides.emplace_back(key, v); },
            spec.help);
    }
}

ConfigFile load_config(const CommonOpts& c) {
    ConfigFile cfg = c.config_path.empty() ? ConfigFile::parse_string("", "<defaults>")
                                           : ConfigFile::parse_file(c.config_path);
    for (const auto& [k, v] : cfg.entries()) {
        const bool known = std::any_of(known_keys().begin(), known_keys().end(),
                                       [&k](const KeySpec& s) { return k == s.key; });
        if (!known) throw ConfigError("unknown config key: " + k);
        (void)v;
    }
    for (const auto& [k, v] : c.overrides) cfg.set(k, v);
    return cfg;
}

mdsearch::ChannelModel build_channel(const ConfigFile& cfg) {
    const std::string kind = cfg.get("channel.model", "linear_bsc");
    if (kind == "linear_bsc")
        return mdsearch::ChannelModel::make_linear_bsc(cfg.get_double("channel.a", 0.0),
                                                       cfg.get_double("channel.b", 0.1));
    if (kind == "gaussian_pair")
        return mdsearch::ChannelModel::make_gaussian_pair(cfg.get_double("channel.mu", 1.0),
                                                          cfg.get_double("channel.a_var", 0.0),
                                                          cfg.get_double("channel.b_var", 0.0));
    throw ConfigError("unknown channel.model: " + kind);
}

mdsearch::SearchConfig build_search(const ConfigFile& cfg) {
    mdsearch::SearchConfig c;
    c.model = build_channel(cfg);
    c.delta = cfg.get_double("scheme.delta", 0.01);
    c.rate = cfg.get_double("scheme.rate", 0.0);
    c.n = static_cast<int>(cfg.get_int("scheme.n", 0));
    c.prior = cfg.get_double("scheme.prior", -1.0);
    c.forney_threshold = cfg.get_double("scheme.threshold", 0.05);
    c.yi_lambda = cfg.get_double("scheme.lambda", -1.0);
    c.val_threshold =
        cfg.get_double("scheme.val_threshold", std::numeric_limits<double>::quiet_NaN());
    c.val_false_erase = cfg.get_double("scheme.val_false_erase", 1e-2);
    c.alpha = cfg.get_double("scheme.alpha", 0.1);
    c.n1 = static_cast<int>(cfg.get_int("scheme.n1", 0));
    c.n2 = static_cast<int>(cfg.get_int("scheme.n2", 0));
    c.n3 = static_cast<int>(cfg.get_int("scheme.n3", 0));
    c.q2 = cfg.get_double("scheme.q2", -1.0);
    c.trials = cfg.get_int("sim.trials", 1000);
    c.seed = cfg.get_uint64("sim.seed", 1);
    c.threads = static_cast<int>(cfg.get_int("sim.threads", 1));
    const std::string wp = cfg.get("sim.w_policy", "uniform");
    if (wp == "sweep")
        c.sweep_w = true;
    else if (wp != "uniform")
        throw ConfigError("sim.w_policy must be uniform or sweep, got: " + wp);
    c.sweep_points = static_cast<int>(cfg.get_int("sim.sweep_points", 50));
    c.max_attempts = cfg.get_int("scheme.max_attempts", 100000);
    return c;
}

mdsearch::MovingConfig build_moving(const ConfigFile& cfg) {
    mdsearch::MovingConfig c;
    c.model = build_channel(cfg);
    c.delta = cfg.get_double("scheme.delta", 0.25);
    c.n = static_cast<int>(cfg.get_int("scheme.n", 0));
    c.v_max = cfg.get_double("scheme.v_max", 0.1);
    c.prior = cfg.get_double("scheme.prior", -1.0);
    c.trials = cfg.get_int("sim.trials", 1000);
    c.seed = cfg.get_uint64("sim.seed", 1);
    c.threads = static_cast<int>(cfg.get_int("sim.threads", 1));
    c.sweep_points = static_cast<int>(cfg.get_int("sim.sweep_points", 50));
    c.path_eval_cap = cfg.get_int("sim.path_eval_cap", 50000000);
    return c;
}

std::vector<int> parse_n_list(const ConfigFile& cfg) {
    std::vector<int> ns;
    const std::string list = cfg.get("sim.sweep_n", "");
    if (!list.empty()) {
        size_t pos = 0;
        while (pos < list.size()) {
            size_t comma = list.find(',', pos);
            if (comma == std::string::npos) comma = list.size();
            const std::string tok = list.substr(pos, comma - pos);
            try {
                ns.push_back(std::stoi(tok));
            } catch (const std::exception&) {
                throw ConfigError("sim.sweep_n: not an integer: '" + tok + "'");
            }
            pos = comma + 1;
        }
    }
    return ns;
}

void write_manifest(const std::string& out_path, const std::string& command,
                    const ConfigFile& cfg, const std::vector<std::string>& outputs,
                    const std::string& started, const std::string& finished) {
    nlohmann::ordered_json j;
    j["tool"] = "mdsearch";
    j["version"] = kVersion;
    j["command"] = command;
    j["seed"] = cfg.get_uint64("sim.seed", 1);
    nlohmann::ordered_json conf = nlohmann::ordered_json::object();
    for (const auto& [k, v] : cfg.entries()) conf[k] = v;
    j["config"] = conf;
    j["outputs"] = outputs;
    j["started_utc"] = started;
    j["finished_utc"] = finished;
    write_file(out_path + ".manifest.json", j.dump(2) + "\n");
}

int cmd_mi_curve(const CommonOpts& opts) {
    const std::string started = iso8601_now();
    ConfigFile cfg = load_config(opts);
    const auto model = build_channel(cfg);
    const double step = cfg.get_double("sim.grid_step", 1e-3);
    cfg.set("sim.grid_step", fmt_g(step));  // manifest carries the resolved value
    const auto curve = mdsearch::mi_curve(model, step);
    std::string csv = "q,mi_bits\n";
    for (const auto& [q, mi] : curve) csv += fmt_g(q) + "," + fmt_g(mi) + "\n";
    const std::string out = opts.out_path.empty() ? "mi_curve.csv" : opts.out_path;
    write_file(out, csv);
    write_manifest(out, "mi-curve", cfg, {out}, started, iso8601_now());
    std::cout << out << ": " << curve.size() << " points\n";
    return 0;
}

int cmd_optimize(const CommonOpts& opts) {
    const std::string started = iso8601_now();
    ConfigFile cfg = load_config(opts);
    const auto model = build_channel(cfg);
    const double step = cfg.get_double("sim.grid_step", 1e-3);
    cfg.set("sim.grid_step", fmt_g(step));  // manifest carries the resolved value
    const auto rep = mdsearch::optimal_query_size(model, step);
    nlohmann::ordered_json j;
    j["q_star"] = rep.q_star;
    j["value"] = rep.value;
    j["grid_resolution"] = rep.grid_resolution;
    j["refined"] = rep.refined;
    j["boundary_hit"] = rep.boundary_hit;
    const std::string out = opts.out_path.empty() ? "optimize.json" : opts.out_path;
    write_file(out, j.dump(2) + "\n");
    write_manifest(out, "optimize", cfg, {out}, started, iso8601_now());
    std::cout << "q_star = " << fmt_g(rep.q_star) << ", value = " << fmt_g(rep.value)
              << " bits/query" << (rep.boundary_hit ? " (boundary)" : "") << "\n";
    return 0;
}

int cmd_exponents(const CommonOpts& opts) {
    const std::string started = iso8601_now();
    const ConfigFile cfg = load_config(opts);
    const auto model = build_channel(cfg);
    double q_star = cfg.get_double("scheme.prior", -1.0);
    if (q_star < 0.0) q_star = mdsearch::optimal_query_size(model).q_star;
    const double rho_max = cfg.get_double("scheme.rho_max", 20.0);
    const int points = static_cast<int>(cfg.get_int("sim.rate_points", 50));
    if (points < 2) throw ConfigError("sim.rate_points must be at least 2");
    const double c0 = mdsearch::capacity(model, 0.0);
    const mdsearch::E0Table table(model, q_star, q_star);
    std::string csv = "rate,random_coding,forney,yamamoto_itoh_qstar,yamamoto_itoh_q0,"
                      "two_phase_burnashev\n";
    for (int i = 0; i < points; ++i) {
        const double r = c0 * i / (points - 1);
        const double rc = std::max(0.0, table.exponent(r).value);
        const double fo = mdsearch::forney_exponent(r, q_star, model, rho_max);
        const double yi_qs = mdsearch::yi_exponent(r, q_star, q_star, model);
        const double yi_0 = mdsearch::yi_exponent(r, q_star, 0.0, model);
        const double tp = mdsearch::two_phase_tradeoff(r, model);
        csv += fmt_g(r) + "," + fmt_g(rc) + "," + fmt_g(fo) + "," + fmt_g(yi_qs) + "," +
               fmt_g(yi_0) + "," + fmt_g(tp) + "\n";
    }
    const std::string out = opts.out_path.empty() ? "exponents.csv" : opts.out_path;
    write_file(out, csv);
    write_manifest(out, "exponents", cfg, {out}, started, iso8601_now());
    std::cout << out << ": " << points << " rates on [0, " << fmt_g(c0) << "], q_star = "
              << fmt_g(q_star) << "\n";
    return 0;
}

mdsearch::SimReport dispatch_scheme(const std::string& scheme, const ConfigFile& cfg) {
    if (scheme == "moving") return mdsearch::run_moving_sim(build_moving(cfg));
    const mdsearch::SearchConfig sc = build_search(cfg);
    if (scheme == "nonadaptive" || scheme == "forney" || scheme == "yamamoto-itoh") {
        // reject rates at or past what the query-size functional supports
        const double q =
            sc.prior >= 0.0 ? sc.prior : mdsearch::optimal_query_size(sc.model).q_star;
        const double max_rate = mdsearch::mutual_information(q, q, sc.model);
        const int bins = static_cast<int>(std::lround(1.0 / sc.delta));
        const double r = sc.n > 0 ? std::log2(static_cast<double>(bins)) / sc.n : sc.rate;
        if (r >= max_rate)
            throw ConfigError("rate " + fmt_g(r) + " bits/query is infeasible: " + scheme +
                              " supports rates below " + fmt_g(max_rate));
        if (scheme == "nonadaptive") return mdsearch::run_nonadaptive(sc);
        if (scheme == "forney") return mdsearch::run_forney(sc);
        return mdsearch::run_yamamoto_itoh(sc);
    }
    if (scheme == "two-phase") return mdsearch::run_two_phase(sc);
    throw ConfigError("unknown scheme.name: " + scheme +
                      " (expected nonadaptive | forney | yamamoto-itoh | two-phase | moving)");
}

int cmd_simulate(const CommonOpts& opts) {
    const std::string started = iso8601_now();
    ConfigFile cfg = load_config(opts);
    const std::string scheme = cfg.get("scheme.name", "nonadaptive");
    const std::vector<int> ns = parse_n_list(cfg);
    if (ns.empty()) {
        const mdsearch::SimReport rep = dispatch_scheme(scheme, cfg);
        const std::string out = opts.out_path.empty() ? "simulate.json" : opts.out_path;
        write_file(out, rep.to_json().dump(2) + "\n");
        write_manifest(out, "simulate", cfg, {out}, started, iso8601_now());
        std::cout << scheme << ": error_rate = " << fmt_g(rep.error_rate)
                  << ", mean_stopping_time = " << fmt_g(rep.mean_stopping_time) << " over "
                  << rep.trials << " trials\n";
        return 0;
    }
    // block-length sweep: CSV summary plus the full reports alongside
    std::string csv = "n,rate,error_rate,ci_low,ci_high,erasure_rate,mean_tau\n";
    nlohmann::ordered_json reports = nlohmann::ordered_json::array();
    for (const int n : ns) {
        cfg.set("scheme.n", std::to_string(n));
        const mdsearch::SimReport rep = dispatch_scheme(scheme, cfg);
        csv += std::to_string(n) + "," + fmt_g(rep.rate) + "," + fmt_g(rep.error_rate) + "," +
               fmt_g(rep.error_ci.lo) + "," + fmt_g(rep.error_ci.hi) + "," +
               fmt_g(rep.erasure_rate) + "," + fmt_g(rep.mean_stopping_time) + "\n";
        reports.push_back(rep.to_json());
    }
    const std::string out = opts.out_path.empty() ? "sweep.csv" : opts.out_path;
    write_file(out, csv);
    write_file(out + ".reports.json", reports.dump(2) + "\n");
    write_manifest(out, "simulate", cfg, {out, out + ".reports.json"}, started, iso8601_now());
    std::cout << scheme << ": swept " << ns.size() << " block lengths -> " << out << "\n";
    return 0;
}

int cmd_bounds_audit(const CommonOpts& opts) {
    const std::string started = iso8601_now();
    const ConfigFile cfg = load_config(opts);
    const double delta = cfg.get_double("scheme.delta", 0.25);
    const double v_max = cfg.get_double("scheme.v_max", 0.1);
    const long long cap = cfg.get_int("sim.path_eval_cap", 50000000);
    std::vector<int> ns = parse_n_list(cfg);
    if (ns.empty()) {
        const int n = static_cast<int>(cfg.get_int("scheme.n", 0));
        if (n <= 0) throw ConfigError("bounds-audit needs scheme.n or sim.sweep_n");
        ns.push_back(n);
    }
    const std::string traj_out = cfg.get("sim.export_trajectories", "");
    if (!traj_out.empty() && ns.size() != 1)
        throw ConfigError("sim.export_trajectories needs a single block length");
    std::string csv =
        "n,m,v_max,class_count,count_bound,max_far_intersections,intersection_bound,"
        "violations\n";
    std::vector<std::string> outputs;
    for (const int n : ns) {
        const double sensors_exact = n / delta;
        const int sensors = static_cast<int>(std::lround(sensors_exact));
        if (sensors < 2 || std::fabs(sensors_exact - sensors) > 1e-9 * sensors)
            throw ConfigError("sensor count n/delta must be a positive integer, got " +
                              fmt_g(sensors_exact));
        const auto audit = mdsearch::audit_trajectory_bounds(sensors, n, v_max, cap);
        csv += std::to_string(audit.n) + "," + std::to_string(audit.sensors) + "," +
               fmt_g(audit.v_max) + "," + std::to_string(audit.class_count) + "," +
               fmt_g(audit.count_bound) + "," + std::to_string(audit.max_far_intersections) +
               "," + std::to_string(audit.intersection_bound) + "," +
               std::to_string(audit.violations) + "\n";
        if (!traj_out.empty()) {
            const auto classes = mdsearch::enumerate_trajectories(sensors, n, v_max, cap);
            std::string tcsv = "start_sensor,velocity,path_hash\n";
            for (const auto& c : classes) {
                std::uint64_t h = 0;
                for (const int s : c.path) h = mdsearch::hash_combine(h, s);
                char hex[24];
                std::snprintf(hex, sizeof(hex), "%016llx",
                              static_cast<unsigned long long>(h));
                tcsv += std::to_string(c.start_sensor) + "," + fmt_g(c.v_repr) + "," + hex +
                        "\n";
            }
            write_file(traj_out, tcsv);
            outputs.push_back(traj_out);
        }
    }
    const std::string out = opts.out_path.empty() ? "bounds_audit.csv" : opts.out_path;
    write_file(out, csv);
    outputs.insert(outputs.begin(), out);
    write_manifest(out, "bounds-audit", cfg, outputs, started, iso8601_now());
    std::cout << out << ": " << ns.size() << " block lengths audited\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"search with measurement-dependent noise: analysis and simulation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    CommonOpts opt_mi, opt_opt, opt_exp, opt_sim, opt_audit;
    CLI::App* mi = app.add_subcommand("mi-curve", "targeting-rate functional over query sizes");
    add_common(mi, opt_mi);
    CLI::App* op = app.add_subcommand("optimize", "optimal query size and its value");
    add_common(op, opt_opt);
    CLI::App* ex = app.add_subcommand("exponents", "error-exponent families on a rate grid");
    add_common(ex, opt_exp);
    CLI::App* si = app.add_subcommand("simulate", "empirical error statistics for one scheme");
    add_common(si, opt_sim);
    CLI::App* au = app.add_subcommand("bounds-audit", "trajectory enumeration bound checks");
    add_common(au, opt_audit);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (mi->parsed()) return cmd_mi_curve(opt_mi);
        if (op->parsed()) return cmd_optimize(opt_opt);
        if (ex->parsed()) return cmd_exponents(opt_exp);
        if (si->parsed()) return cmd_simulate(opt_sim);
        if (au->parsed()) return cmd_bounds_audit(opt_audit);
    } catch (const mdsearch::ResourceGuardError& e) {
        std::cerr << "resource guard: " << e.what() << "\n";
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
