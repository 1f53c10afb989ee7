#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "mdsearch/errors.hpp"
#include "mdsearch/info_theory.hpp"
#include "mdsearch/optimize.hpp"
#include "mdsearch/rng.hpp"

using namespace mdsearch;
using doctest::Approx;

namespace {

// brute-force 1e-6-grid maximizer value, frozen before the build (see the
// matching constants in the optimizer tests)
constexpr double kQStar = 0.14999777735191;
constexpr double kIStar = 0.14138353326450003;

ChannelModel steep_channel() { return ChannelModel::make_linear_bsc(0.7, 0.1); }
ChannelModel flat_bsc() { return ChannelModel::make_linear_bsc(0.0, 0.1); }
ChannelModel gauss_dep() { return ChannelModel::make_gaussian_pair(1.0, 2.0, 5.0); }

}  // namespace

TEST_CASE("binary entropy values and domain") {
    CHECK(binary_entropy(0.0) == 0.0);
    CHECK(binary_entropy(1.0) == 0.0);
    CHECK(binary_entropy(0.5) == Approx(1.0).epsilon(1e-14));
    CHECK(binary_entropy(0.1) == Approx(0.46899559358928122).epsilon(1e-12));
    CHECK_THROWS_AS(binary_entropy(-0.01), std::domain_error);
    CHECK_THROWS_AS(binary_entropy(1.01), std::domain_error);
}

TEST_CASE("binary convolution") {
    CHECK(binary_convolve(0.5, 0.3) == Approx(0.5));
    CHECK(binary_convolve(0.2, 0.0) == Approx(0.2));
    CHECK(binary_convolve(0.0, 0.17) == Approx(0.17));
}

TEST_CASE("mutual information closed forms for the measurement-dependent bsc") {
    const ChannelModel m = steep_channel();
    CHECK(mutual_information(0.0, 0.3, m) == 0.0);
    CHECK(mutual_information(1.0, 0.3, m) == 0.0);
    CHECK(mutual_information(0.5, 0.5, m) == Approx(0.0072255460121917063).epsilon(1e-12));
    CHECK(mutual_information(0.1, 0.1, m) == Approx(0.13062012164916106).epsilon(1e-12));
    CHECK(mutual_information(0.01, 0.01, m) == Approx(0.023603144870247761).epsilon(1e-12));
    CHECK(mutual_information(kQStar, kQStar, m) == Approx(kIStar).epsilon(1e-12));

    // flat bsc at p = 0.1: capacity form 1 - h2(0.1) at the uniform input
    CHECK(mutual_information(0.5, 0.5, flat_bsc()) ==
          Approx(1.0 - 0.46899559358928122).epsilon(1e-12));
}

TEST_CASE("mutual information by quadrature matches the independent oracle") {
    const ChannelModel g = gauss_dep();
    CHECK(mutual_information(0.5, 0.1, g) == Approx(0.125500982374164).epsilon(1e-8));
    CHECK(mutual_information(0.5, 0.3, g) == Approx(0.108632632098781).epsilon(1e-8));
    CHECK(mutual_information(0.5, 0.5, g) == Approx(0.099178161057655).epsilon(1e-8));
    CHECK(mutual_information(0.3, 0.2, g) == Approx(0.090915656255200).epsilon(1e-8));
    CHECK(mutual_information(0.0, 0.2, g) == 0.0);

    const ChannelModel fixed = ChannelModel::make_gaussian_pair(0.0, 0.0, 0.0);
    CHECK(mutual_information(0.5, 0.0, fixed) == Approx(0.039684132324227406).epsilon(1e-8));
    CHECK(mutual_information(0.5, 0.9, fixed) == Approx(0.039684132324227406).epsilon(1e-8));
}

TEST_CASE("quadrature mutual information agrees with a monte carlo entropy estimate") {
    // output entropy of the mixture sampled directly; conditional entropy in
    // closed form. 1e7 samples put the MC sigma well under the 3e-3 band.
    const ChannelModel g = gauss_dep();
    const double q = 0.3;
    const double quad = mutual_information(0.5, q, g);

    const double v1 = g.hit_variance(q), v0 = g.miss_variance(q);
    const double s1 = std::sqrt(v1), s0 = std::sqrt(v0);
    const double c1 = 1.0 / (s1 * std::sqrt(2.0 * 3.14159265358979323846));
    const double c0 = 1.0 / (s0 * std::sqrt(2.0 * 3.14159265358979323846));
    Stream rng(777);
    const long long n = 10000000;
    double h_sum = 0.0;
    for (long long i = 0; i < n; ++i) {
        const bool hit = rng.bernoulli(0.5);
        const double y = hit ? rng.normal(g.mu(), s1) : rng.normal(0.0, s0);
        const double d1 = y - g.mu();
        const double f = 0.5 * c1 * std::exp(-d1 * d1 / (2.0 * v1)) +
                         0.5 * c0 * std::exp(-y * y / (2.0 * v0));
        h_sum -= std::log2(f);
    }
    const double h_y = h_sum / n;
    const double h_cond = 0.5 * (0.5 * std::log2(2.0 * 3.14159265358979323846 *
                                                 2.71828182845904523536 * v1) +
                                 0.5 * std::log2(2.0 * 3.14159265358979323846 *
                                                 2.71828182845904523536 * v0));
    CHECK(std::abs((h_y - h_cond) - quad) < 3e-3);
}

TEST_CASE("gallager function endpoints and cutoff rate") {
    const ChannelModel m = flat_bsc();
    CHECK(gallager_e0(0.0, 0.5, 0.5, m) == Approx(0.0).epsilon(1e-12));
    // 1 - log2(1 + 2 sqrt(0.1*0.9)) = log2(1.25)
    CHECK(gallager_e0(1.0, 0.5, 0.5, m) == Approx(0.32192809488736235).epsilon(1e-12));
    CHECK_THROWS_AS(gallager_e0(-0.1, 0.5, 0.5, m), std::domain_error);
    CHECK_THROWS_AS(gallager_e0(1.1, 0.5, 0.5, m), std::domain_error);

    const ChannelModel g = gauss_dep();
    CHECK(gallager_e0(0.0, 0.2, 0.4, g) == Approx(0.0).epsilon(1e-9));
    CHECK(gallager_e0(1.0, 0.2, 0.4, g) == Approx(0.062369702846406).epsilon(1e-8));
}

TEST_CASE("gallager slope at rho=0 recovers mutual information") {
    const double h = 1e-5;
    for (const ChannelModel& m : {steep_channel(), flat_bsc()}) {
        const double slope = gallager_e0(h, 0.3, 0.3, m) / h;
        CHECK(slope == Approx(mutual_information(0.3, 0.3, m)).epsilon(1e-4));
    }
    const ChannelModel g = gauss_dep();
    const double slope = gallager_e0(h, 0.2, 0.4, g) / h;
    CHECK(slope == Approx(mutual_information(0.4, 0.2, g)).epsilon(1e-4));
}

TEST_CASE("gallager function is concave and non-decreasing in rho") {
    struct Case {
        ChannelModel m;
        double q, prior;
    };
    const std::vector<Case> cases = {{steep_channel(), kQStar, kQStar},
                                     {flat_bsc(), 0.5, 0.5},
                                     {gauss_dep(), 0.2, 0.4}};
    for (const auto& c : cases) {
        std::vector<double> e0;
        for (int i = 0; i <= 40; ++i) e0.push_back(gallager_e0(i / 40.0, c.q, c.prior, c.m));
        for (size_t i = 1; i < e0.size(); ++i) CHECK(e0[i] >= e0[i - 1] - 1e-9);
        for (size_t i = 1; i + 1 < e0.size(); ++i)
            CHECK(e0[i + 1] - e0[i] <= e0[i] - e0[i - 1] + 1e-9);
    }
}

TEST_CASE("random coding exponent oracle values") {
    const ChannelModel m = flat_bsc();
    // dense-grid oracle values, frozen before the build
    CHECK(random_coding_exponent(0.25, 0.5, 0.5, m) ==
          Approx(0.08195753732893071).epsilon(1e-6));
    CHECK(random_coding_exponent(0.0, 0.5, 0.5, m) ==
          Approx(0.3219280948873623).epsilon(1e-9));
    const ExponentDetail d = random_coding_exponent_detail(0.25, 0.5, 0.5, m);
    CHECK(d.rho_star == Approx(0.692775).epsilon(1e-3));
    CHECK_FALSE(d.boundary_hit);
    const ExponentDetail d0 = random_coding_exponent_detail(0.0, 0.5, 0.5, m);
    CHECK(d0.rho_star == Approx(1.0).epsilon(1e-9));
    CHECK(d0.boundary_hit);

    const ChannelModel f = steep_channel();
    CHECK(random_coding_exponent(0.05, kQStar, kQStar, f) ==
          Approx(0.024491136327025875).epsilon(1e-6));
    CHECK(random_coding_exponent(0.0, kQStar, kQStar, f) ==
          Approx(0.0726529033171029).epsilon(1e-6));
}

TEST_CASE("random coding exponent is convex, non-increasing, zero above the rate limit") {
    const ChannelModel m = flat_bsc();
    const double mi = mutual_information(0.5, 0.5, m);
    std::vector<double> vals;
    for (int i = 0; i <= 30; ++i) vals.push_back(random_coding_exponent(i * mi / 25.0, 0.5, 0.5, m));
    for (size_t i = 1; i < vals.size(); ++i) CHECK(vals[i] <= vals[i - 1] + 1e-12);
    for (size_t i = 1; i + 1 < vals.size(); ++i)
        CHECK(vals[i + 1] - vals[i] >= vals[i] - vals[i - 1] - 1e-9);
    CHECK(random_coding_exponent(mi + 1e-3, 0.5, 0.5, m) == 0.0);
    CHECK(random_coding_exponent(mi - 1e-4, 0.5, 0.5, m) > 0.0);
}

TEST_CASE("e0 table reproduces the direct maximization") {
    const ChannelModel m = flat_bsc();
    const E0Table table(m, 0.5, 0.5);
    for (double R : {0.0, 0.05, 0.1, 0.2, 0.25, 0.4, 0.52}) {
        const ExponentDetail direct = random_coding_exponent_detail(R, 0.5, 0.5, m);
        const ExponentDetail tab = table.exponent(R);
        CHECK(tab.value == Approx(direct.value).epsilon(1e-9));
    }

    const ChannelModel g = gauss_dep();
    const E0Table gt(g, 0.2, 0.4, 1e-3);
    for (double R : {0.0, 0.03, 0.08}) {
        const ExponentDetail direct = random_coding_exponent_detail(R, 0.2, 0.4, g);
        const ExponentDetail tab = gt.exponent(R);
        CHECK(tab.value == Approx(direct.value).epsilon(1e-6));
    }
}

TEST_CASE("erasure-decoding exponent oracle values") {
    const ChannelModel m = steep_channel();
    // the decision-feedback functional at rho=1 equals the targeting rate
    CHECK(forney_e0(1.0, kQStar, kQStar, m) == Approx(kIStar).epsilon(1e-9));
    CHECK_THROWS_AS(forney_e0(0.5, kQStar, kQStar, m), std::domain_error);

    ExponentDetail d = forney_exponent_detail(0.02, kQStar, m);
    CHECK(d.value == Approx(0.18037077460264321).epsilon(1e-6));
    CHECK(d.rho_star == Approx(2.788841184).epsilon(1e-3));
    CHECK_FALSE(d.boundary_hit);

    d = forney_exponent_detail(0.05, kQStar, m);
    CHECK(d.value == Approx(0.11618716799402451).epsilon(1e-6));
    CHECK(d.rho_star == Approx(1.729931046).epsilon(1e-3));

    d = forney_exponent_detail(0.1, kQStar, m);
    CHECK(d.value == Approx(0.045190545848271719).epsilon(1e-6));
    CHECK(d.rho_star == Approx(1.201471126).epsilon(1e-3));

    // at R = 0 the objective keeps rising in rho; the cap reports boundary
    d = forney_exponent_detail(0.0, kQStar, m);
    CHECK(d.value == Approx(0.28578669260868806).epsilon(1e-6));
    CHECK(d.boundary_hit);
    CHECK(d.rho_star == Approx(20.0).epsilon(1e-9));

    CHECK(forney_exponent(kIStar, kQStar, m) == Approx(0.0).epsilon(1e-9));
    CHECK_THROWS_AS(forney_exponent_detail(0.05, kQStar, m, 0.5), ConfigError);
}

TEST_CASE("erasure-decoding exponent dominates random coding pointwise") {
    const ChannelModel m = steep_channel();
    for (int i = 0; i < 50; ++i) {
        const double R = i * kIStar / 50.0;
        CHECK(forney_exponent(R, kQStar, m) + 1e-9 >=
              random_coding_exponent(R, kQStar, kQStar, m));
    }
}

TEST_CASE("validation tradeoff endpoints and frozen values") {
    const ChannelModel m = steep_channel();
    CHECK(yi_exponent(kIStar, kQStar, 0.0, m) == Approx(0.0).epsilon(1e-9));
    CHECK(yi_exponent(0.0, kQStar, 0.0, m) == Approx(2.53594000115385).epsilon(1e-9));
    CHECK(yi_exponent(0.0, kQStar, kQStar, m) ==
          Approx(m.divergence_c1(kQStar)).epsilon(1e-12));
    CHECK(yi_exponent(0.05, kQStar, 0.0, m) == Approx(1.63910995928129).epsilon(1e-6));
    CHECK(yi_exponent(0.05, kQStar, kQStar, m) == Approx(0.745670137390867).epsilon(1e-6));
    CHECK(yi_exponent(kIStar + 0.01, kQStar, 0.0, m) == 0.0);  // clamp past the max rate

    // probing the final interval dominates probing at the search query size
    for (int i = 0; i <= 20; ++i) {
        const double R = i * kIStar / 20.0;
        CHECK(yi_exponent(R, kQStar, kQStar, m) <= yi_exponent(R, kQStar, 0.0, m) + 1e-12);
    }
}

TEST_CASE("two-phase tradeoff endpoints") {
    const ChannelModel m = steep_channel();
    const double c0 = capacity(m, 0.0);
    CHECK(c0 == Approx(0.53100440641071519).epsilon(1e-12));
    CHECK(two_phase_tradeoff(c0, m) == 0.0);
    CHECK(two_phase_tradeoff(0.0, m) == Approx(2.53594000115385).epsilon(1e-9));
    CHECK(two_phase_tradeoff(0.25, m) == Approx(1.34200452221153).epsilon(1e-9));
}

TEST_CASE("moving-target rate bounds") {
    const ChannelModel m = flat_bsc();
    const auto [ach, con] = moving_rate_bounds(0.5, 0.1, m);
    CHECK(ach == Approx(0.21240176256428608).epsilon(1e-9));
    CHECK(con == Approx(0.26550220320535759).epsilon(1e-9));

    const auto at_half = moving_rate_bounds(0.5, 0.5, m);
    CHECK(at_half.first == Approx(0.0).epsilon(1e-12));
    const auto tiny = moving_rate_bounds(0.5, 1e-9, m);
    CHECK(tiny.first == Approx(tiny.second).epsilon(1e-6));

    CHECK_THROWS_AS(moving_rate_bounds(0.5, 0.0, m), ConfigError);
    CHECK_THROWS_AS(moving_rate_bounds(0.5, 0.6, m), ConfigError);
}

TEST_CASE("exponent curve validation and serialization") {
    ExponentCurve c;
    c.rate_grid = {0.0, 0.1};
    c.exponent_values = {0.5, 0.25};
    c.scheme_tag = SchemeTag::forney;
    CHECK_NOTHROW(c.validate());
    const std::string csv = c.to_csv();
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "rate,exponent,scheme_tag");
    std::getline(in, line);
    CHECK(line == "0,0.5,forney");
    std::getline(in, line);
    CHECK(line == "0.1,0.25,forney");

    c.exponent_values.pop_back();
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.exponent_values = {0.5, -0.1};
    CHECK_THROWS_AS(c.validate(), ConfigError);

    CHECK(scheme_tag_name(SchemeTag::random_coding) == "random_coding");
    CHECK(scheme_tag_name(SchemeTag::yamamoto_itoh) == "yamamoto_itoh");
    CHECK(scheme_tag_name(SchemeTag::two_phase_burnashev) == "two_phase_burnashev");
}
