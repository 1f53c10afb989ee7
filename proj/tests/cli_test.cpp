#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using doctest::Approx;

namespace {

struct RunResult {
    int code = -1;
    std::string out, err;
};

const fs::path& work_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "mdsearch_cli_test";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunResult run(const std::string& args) {
    const fs::path out = work_dir() / "stdout.txt";
    const fs::path err = work_dir() / "stderr.txt";
    const std::string cmd = std::string(MDSEARCH_CLI_PATH) + " " + args + " >" +
                            out.string() + " 2>" + err.string();
    const int raw = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

std::vector<std::string> fields_of(const std::string& line) {
    std::vector<std::string> fields;
    std::istringstream in(line);
    std::string f;
    while (std::getline(in, f, ',')) fields.push_back(f);
    return fields;
}

double col(const std::string& line, size_t idx) {
    const auto f = fields_of(line);
    REQUIRE(idx < f.size());
    return std::stod(f[idx]);
}

std::string path_in(const std::string& name) { return (work_dir() / name).string(); }

json manifest_of(const std::string& out_path) {
    return json::parse(slurp(out_path + ".manifest.json"));
}

bool contains(const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("help, version, and argument errors") {
    CHECK(run("--help").code == 0);
    CHECK(contains(run("--help").out, "simulate"));
    const auto ver = run("--version");
    CHECK(ver.code == 0);
    CHECK(contains(ver.out, "0.1.0"));

    CHECK(run("").code == 2);             // a subcommand is required
    CHECK(run("frobnicate").code == 2);   // unknown subcommand
    CHECK(run("simulate --no-such-flag 1").code == 2);
}

TEST_CASE("mi-curve emits the functional over query sizes") {
    const std::string out = path_in("mi.csv");
    const auto r = run("mi-curve --channel.a 0.7 --channel.b 0.1 --out " + out);
    REQUIRE(r.code == 0);
    CHECK(contains(r.out, "500 points"));

    const auto rows = lines_of(slurp(out));
    REQUIRE(rows.size() == 501);
    CHECK(rows[0] == "q,mi_bits");
    CHECK(col(rows[1], 0) == Approx(1e-3).epsilon(1e-12));
    CHECK(col(rows[500], 0) == Approx(0.5).epsilon(1e-12));
    // right endpoint is the dependent-noise value, far below the interior max
    CHECK(col(rows[500], 1) == Approx(0.0072255460121917063).epsilon(1e-4));
    CHECK(std::fabs(col(rows[500], 1) - 0.0072255460121917063) < 1e-6);
    double best = 0.0, best_q = 0.0;
    for (size_t i = 1; i < rows.size(); ++i)
        if (col(rows[i], 1) > best) {
            best = col(rows[i], 1);
            best_q = col(rows[i], 0);
        }
    CHECK(best > col(rows[1], 1));
    CHECK(best > col(rows[500], 1));
    CHECK(best_q > 0.05);
    CHECK(best_q < 0.45);

    const json m = manifest_of(out);
    CHECK(m["tool"] == "mdsearch");
    CHECK(m["version"] == "0.1.0");
    CHECK(m["command"] == "mi-curve");
    CHECK(m["seed"] == 1);
    CHECK(m["config"]["sim.grid_step"] == "0.001");  // resolved default echoed
    CHECK(m["outputs"] == json::array({out}));
    CHECK(m["started_utc"].get<std::string>().back() == 'Z');
    CHECK(m["finished_utc"].get<std::string>().size() == 20);
}

TEST_CASE("mi-curve on a size-independent channel is monotone") {
    const std::string out = path_in("mi_flat.csv");
    const auto r =
        run("mi-curve --channel.a 0 --channel.b 0.1 --sim.grid_step 0.01 --out " + out);
    REQUIRE(r.code == 0);
    const auto rows = lines_of(slurp(out));
    REQUIRE(rows.size() == 51);
    for (size_t i = 2; i < rows.size(); ++i) CHECK(col(rows[i], 1) > col(rows[i - 1], 1));
    CHECK(col(rows[50], 1) == Approx(0.53100440641071519).epsilon(1e-9));
}

TEST_CASE("optimize reports the interior optimum") {
    const std::string out = path_in("opt.json");
    const auto r = run("optimize --channel.a 0.7 --channel.b 0.1 --out " + out);
    REQUIRE(r.code == 0);
    CHECK(contains(r.out, "q_star"));
    const json j = json::parse(slurp(out));
    CHECK(std::fabs(j["q_star"].get<double>() - 0.14999777735191) < 1e-6);
    CHECK(j["value"].get<double>() == Approx(0.14138353326450003).epsilon(1e-9));
    CHECK(j["refined"] == true);
    CHECK(j["boundary_hit"] == false);
    CHECK(j.contains("grid_resolution"));
    CHECK(manifest_of(out)["command"] == "optimize");
}

TEST_CASE("exponents evaluates the five families on a shared grid") {
    const std::string out = path_in("exp.csv");
    const auto r = run("exponents --out " + out);
    REQUIRE(r.code == 0);
    CHECK(contains(r.out, "50 rates"));

    const auto rows = lines_of(slurp(out));
    REQUIRE(rows.size() == 51);
    CHECK(rows[0] ==
          "rate,random_coding,forney,yamamoto_itoh_qstar,yamamoto_itoh_q0,"
          "two_phase_burnashev");
    CHECK(col(rows[1], 0) == 0.0);
    CHECK(col(rows[50], 0) == Approx(0.53100440641071519).epsilon(1e-9));
    for (size_t i = 1; i < rows.size(); ++i)
        for (size_t c = 1; c < 6; ++c) CHECK(col(rows[i], c) >= 0.0);
    // zero-rate ordering of the columns
    CHECK(col(rows[1], 1) <= col(rows[1], 2));
    CHECK(col(rows[1], 3) <= col(rows[1], 4));
    // pointwise: random coding never beats erasure decoding; validation at the
    // optimized prior never beats validation at the noiseless limit
    for (size_t i = 1; i < rows.size(); ++i) {
        CHECK(col(rows[i], 1) <= col(rows[i], 2) + 1e-12);
        CHECK(col(rows[i], 3) <= col(rows[i], 4) + 1e-12);
    }
    // the validation bound for the vanishing-size channel dies exactly at C(0)
    const auto last = fields_of(rows[50]);
    CHECK(last[5] == "0");
}

TEST_CASE("simulate smoke run with deterministic reruns") {
    const std::string cfg = path_in("basic.ini");
    std::ofstream(cfg) << "[channel]\n"
                          "a = 0\n"
                          "b = 0.1\n"
                          "\n"
                          "[scheme]\n"
                          "name = nonadaptive\n"
                          "delta = 0.0625\n"
                          "n = 16\n"
                          "prior = 0.3\n"
                          "\n"
                          "[sim]\n"
                          "trials = 200\n"
                          "seed = 9\n";

    const std::string out1 = path_in("s1.json");
    const auto r1 = run("simulate --config " + cfg + " --out " + out1);
    REQUIRE(r1.code == 0);
    CHECK(contains(r1.out, "nonadaptive"));
    CHECK(contains(r1.out, "error_rate"));

    const json j = json::parse(slurp(out1));
    CHECK(j["scheme"] == "nonadaptive");
    CHECK(j["trials"] == 200);
    CHECK(j["block_length"] == 16);
    CHECK(j["bins"] == 16);
    for (const char* key :
         {"rate", "error_rate", "error_ci", "erasure_rate", "erasure_ci",
          "mean_stopping_time", "stopping_time_ci", "truncated_trials",
          "restart_identity_dev", "restart_identity_halfwidth", "resolved"})
        CHECK(j.contains(key));
    CHECK(j["resolved"]["prior"] == 0.3);
    CHECK(j["mean_stopping_time"] == 16.0);

    const std::string out2 = path_in("s2.json");
    REQUIRE(run("simulate --config " + cfg + " --out " + out2).code == 0);
    CHECK(slurp(out1) == slurp(out2));

    json m1 = manifest_of(out1), m2 = manifest_of(out2);
    CHECK(m1["seed"] == 9);
    CHECK(m1["config"]["scheme.name"] == "nonadaptive");
    for (json* m : {&m1, &m2}) {
        m->erase("started_utc");
        m->erase("finished_utc");
        (*m)["outputs"] = json::array();
    }
    CHECK(m1.dump() == m2.dump());

    // a different master seed must change the data
    const std::string out3 = path_in("s3.json");
    REQUIRE(run("simulate --config " + cfg + " --seed 10 --out " + out3).code == 0);
    CHECK(slurp(out1) != slurp(out3));
}

TEST_CASE("flag overrides beat config file values") {
    const std::string cfg = path_in("basic.ini");  // written by the smoke case
    REQUIRE(fs::exists(cfg));
    const std::string out = path_in("ovr.json");
    REQUIRE(run("simulate --config " + cfg + " --sim.trials 10 --out " + out).code == 0);
    CHECK(json::parse(slurp(out))["trials"] == 10);
    CHECK(manifest_of(out)["config"]["sim.trials"] == "10");

    REQUIRE(run("simulate --config " + cfg + " --trials 25 --out " + out).code == 0);
    CHECK(json::parse(slurp(out))["trials"] == 25);
}

TEST_CASE("simulate sweeps block lengths into a summary table") {
    const std::string out = path_in("sweep.csv");
    const auto r = run(
        "simulate --channel.a 0 --channel.b 0.1 --scheme.name nonadaptive "
        "--scheme.delta 0.0625 --scheme.prior 0.3 --sim.sweep_n 16,24,32 "
        "--trials 6000 --seed 4 --out " +
        out);
    REQUIRE(r.code == 0);
    CHECK(contains(r.out, "3 block lengths"));

    const auto rows = lines_of(slurp(out));
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == "n,rate,error_rate,ci_low,ci_high,erasure_rate,mean_tau");
    CHECK(col(rows[1], 0) == 16);
    CHECK(col(rows[2], 0) == 24);
    CHECK(col(rows[3], 0) == 32);
    for (int i = 1; i <= 3; ++i) {
        const double n = col(rows[i], 0);
        CHECK(col(rows[i], 1) == Approx(std::log2(16.0) / n).epsilon(1e-9));
        CHECK(col(rows[i], 5) == 0.0);
        CHECK(col(rows[i], 6) == Approx(n));
        CHECK(col(rows[i], 3) <= col(rows[i], 2));
        CHECK(col(rows[i], 2) <= col(rows[i], 4));
    }
    CHECK(col(rows[1], 2) >= col(rows[2], 2));
    CHECK(col(rows[2], 2) >= col(rows[3], 2));

    const json reports = json::parse(slurp(out + ".reports.json"));
    REQUIRE(reports.is_array());
    REQUIRE(reports.size() == 3);
    for (const auto& rep : reports) CHECK(rep["scheme"] == "nonadaptive");
    const json m = manifest_of(out);
    CHECK(m["outputs"] == json::array({out, out + ".reports.json"}));
}

TEST_CASE("simulate runs the moving-target scheme") {
    const std::string out = path_in("mv.json");
    const auto r = run(
        "simulate --scheme.name moving --channel.a 0 --channel.b 0.1 "
        "--scheme.delta 0.5 --scheme.n 8 --scheme.v_max 0.05 --trials 50 "
        "--seed 2 --out " +
        out);
    REQUIRE(r.code == 0);
    const json j = json::parse(slurp(out));
    CHECK(j["scheme"] == "moving");
    CHECK(j["trials"] == 50);
    CHECK(j["bins"] == 16);
    CHECK(j["mean_stopping_time"] == 8.0);
    CHECK(j["class_count"].get<long long>() >= 16);
    CHECK(j["achievable_rate_bound"].get<double>() <
          j["converse_rate_bound"].get<double>());
}

TEST_CASE("config and scheme errors exit with code 2") {
    const auto bad_scheme = run("simulate --scheme.name bogus");
    CHECK(bad_scheme.code == 2);
    CHECK(contains(bad_scheme.err, "unknown scheme.name"));
    CHECK(contains(bad_scheme.err, "bogus"));

    // infeasible rate names the computed maximum
    const auto infeasible = run("simulate --scheme.name nonadaptive --channel.a 0.7 --channel.b 0.1 "
        "--scheme.rate 0.5");
    CHECK(infeasible.code == 2);
    CHECK(contains(infeasible.err, "infeasible"));
    CHECK(contains(infeasible.err, "supports rates below 0.1413835"));

    const std::string bad_key = path_in("bad_key.ini");
    std::ofstream(bad_key) << "[foo]\nbar = 1\n";
    const auto unknown_key = run("simulate --config " + bad_key);
    CHECK(unknown_key.code == 2);
    CHECK(contains(unknown_key.err, "unknown config key: foo.bar"));

    const std::string bad_syntax = path_in("bad_syntax.ini");
    std::ofstream(bad_syntax) << "[unterminated\n";
    const auto parse_err = run("simulate --config " + bad_syntax);
    CHECK(parse_err.code == 2);
    CHECK(contains(parse_err.err, ":1:"));

    CHECK(run("simulate --config /no/such/file.ini").code == 2);
    CHECK(run("simulate --sim.w_policy diagonal").code == 2);
    CHECK(run("mi-curve --channel.model warp_drive").code == 2);
    // hit variance growing faster than miss variance is rejected
    CHECK(run("optimize --channel.model gaussian_pair --channel.a_var 2 "
              "--channel.b_var 1")
              .code == 2);
}

TEST_CASE("resource guard trips exit with code 3") {
    const auto r = run(
        "simulate --scheme.name moving --channel.a 0 --channel.b 0.1 "
        "--scheme.delta 0.25 --scheme.n 12 --scheme.v_max 0.25 "
        "--sim.path_eval_cap 100");
    CHECK(r.code == 3);
    CHECK(contains(r.err, "resource guard"));
}

TEST_CASE("bounds-audit emits the enumeration audit table") {
    const std::string out = path_in("audit.csv");
    const std::string traj = path_in("traj.csv");
    const auto r = run("bounds-audit --scheme.delta 0.5 --scheme.n 4 --scheme.v_max 0.1 "
                       "--sim.export_trajectories " +
                       traj + " --out " + out);
    REQUIRE(r.code == 0);

    const auto rows = lines_of(slurp(out));
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] ==
          "n,m,v_max,class_count,count_bound,max_far_intersections,"
          "intersection_bound,violations");
    CHECK(rows[1] == "4,8,0.1,72,3891.2,2,1,8");

    const auto trows = lines_of(slurp(traj));
    REQUIRE(trows.size() == 73);  // header + one row per class
    CHECK(trows[0] == "start_sensor,velocity,path_hash");
    const auto f = fields_of(trows[1]);
    REQUIRE(f.size() == 3);
    CHECK(std::stoi(f[0]) >= 0);
    CHECK(std::stoi(f[0]) < 8);
    CHECK(std::fabs(std::stod(f[1])) <= 0.1 + 1e-12);
    CHECK(f[2].size() == 16);
    CHECK(f[2].find_first_not_of("0123456789abcdef") == std::string::npos);
    CHECK(manifest_of(out)["outputs"] == json::array({out, traj}));

    // block-length sweep over sim.sweep_n
    const std::string out2 = path_in("audit2.csv");
    REQUIRE(run("bounds-audit --scheme.delta 0.5 --scheme.v_max 0.1 "
                "--sim.sweep_n 4,8 --out " +
                out2)
                .code == 0);
    const auto rows2 = lines_of(slurp(out2));
    REQUIRE(rows2.size() == 3);
    CHECK(col(rows2[1], 0) == 4);
    CHECK(col(rows2[2], 0) == 8);
    for (int i = 1; i <= 2; ++i) CHECK(col(rows2[i], 3) <= col(rows2[i], 4));

    // error paths
    CHECK(run("bounds-audit --scheme.delta 0.5 --scheme.v_max 0.1").code == 2);
    CHECK(run("bounds-audit --scheme.delta 0.5 --scheme.v_max 0.1 --sim.sweep_n 4,x")
              .code == 2);
    CHECK(run("bounds-audit --scheme.delta 0.3 --scheme.n 10 --scheme.v_max 0.1")
              .code == 2);
    CHECK(run("bounds-audit --scheme.delta 0.5 --scheme.v_max 0.1 --sim.sweep_n 4,8 "
              "--sim.export_trajectories " +
              traj)
              .code == 2);
}
