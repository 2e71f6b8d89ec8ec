#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "support.hpp"
#include "wsc/error.hpp"
#include "wsc/estimators.hpp"
#include "wsc/scenario.hpp"

using namespace wsc;
using namespace wsc::testing;
using Catch::Matchers::WithinAbs;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an Error");
    return ErrorKind::IoError;
}

// Moderately confounded dataset with all covariate kinds.
StudyDataset simulated(std::uint64_t seed, std::size_t n = 4000) {
    ScenarioSpec s;
    s.n = n;
    s.covariates = {{"b1", CovariateKind::Binary, 0.4},
                    {"b2", CovariateKind::Binary, 0.6},
                    {"cnt", CovariateKind::Count, 0.5, 2.0, 1.0},
                    {"cont", CovariateKind::Continuous, 0.5, 0.0, 1.0, 5.0, 2.0}};
    s.matching_subset = {"b1", "b2"};
    s.preference = {{0.3, 0.0, 0.01, 0.1}, 1.0};
    s.exposure = {1.0, {-0.5, 0.3, 0.01, -0.1}, -0.5};
    s.outcome = {2.0, {1.0, -1.0, 0.05, 0.4}, 1.5, 2.0, {1.0, {0.5, 0.0, 0.0, 0.1}, 0.2}};
    return generate(s, seed, 1).dataset;
}

std::vector<AttEstimate> all_estimates(const StudyDataset& ds) {
    std::vector<AttEstimate> out;
    for (Method m : kAllMethods) {
        EstimatorSpec spec;
        spec.method = m;
        out.push_back(run_estimator(ds, spec));
    }
    return out;
}

StudyDataset permuted(const StudyDataset& ds, std::mt19937_64& gen) {
    std::vector<std::size_t> rows(ds.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    std::shuffle(rows.begin(), rows.end(), gen);
    return ds.resample(rows);
}

}  // namespace

TEST_CASE("experimental_att hand example", "[estimators][experimental]") {
    const auto ds = make_plain({{1, 1, 1}, {1, 0, 2}, {1, 0, 3}, {1, 1, 6}, {0, 0, 1}, {0, 0, 1}, {0, 0, 2}, {0, 0, 2}});
    const auto e = experimental_att(ds);
    CHECK_THAT(e.diagnostics.at("itt"), WithinAbs(1.5, 1e-15));
    CHECK_THAT(e.diagnostics.at("compliance_rate"), WithinAbs(0.5, 1e-15));
    CHECK_THAT(e.point, WithinAbs(3.0, 1e-15));
    CHECK(e.method == Method::Experimental);
}

TEST_CASE("experimental_att limiting cases", "[estimators][experimental]") {
    const auto full = make_plain({{1, 1, 4}, {1, 1, 2}, {0, 0, 1}, {0, 0, 0}});
    CHECK(experimental_att(full).point == experimental_att(full).diagnostics.at("itt"));
    CHECK_THAT(experimental_att(full).point, WithinAbs(2.5, 1e-15));
    const auto equal = make_plain({{1, 1, 1}, {1, 0, 3}, {1, 0, 2}, {0, 0, 2}, {0, 0, 2}});
    CHECK(experimental_att(equal).point == 0.0);

    CHECK(kind_of([] { experimental_att(make_plain({{1, 1, 1}, {1, 0, 2}})); }) == ErrorKind::NoControlGroup);
    CHECK(kind_of([] { experimental_att(make_plain({{0, 0, 1}})); }) == ErrorKind::NoTreatmentGroup);
    CHECK(kind_of([] { experimental_att(make_plain({{1, 0, 1}, {0, 0, 1}})); }) == ErrorKind::NoCompliers);
}

TEST_CASE("digm_att", "[estimators][digm]") {
    const auto ds = make_plain({{1, 1, 3}, {1, 1, 5}, {1, 0, 1}, {1, 0, 3}, {0, 0, 100}});
    CHECK_THAT(digm_att(ds).point, WithinAbs(2.0, 1e-15));
    const auto same = make_plain({{1, 1, 3}, {1, 1, 5}, {1, 0, 5}, {1, 0, 3}});
    CHECK(digm_att(same).point == 0.0);
    CHECK(kind_of([] { digm_att(make_plain({{1, 1, 3}, {0, 0, 1}})); }) == ErrorKind::NoUnexposed);
    CHECK(kind_of([] { digm_att(make_plain({{1, 0, 3}, {0, 0, 1}})); }) == ErrorKind::NoExposed);
}

TEST_CASE("exact_matching_att hand examples", "[estimators][matching]") {
    const auto ds = make_binary({{1, 1, 5, {1}}, {1, 0, 1, {1}}, {1, 0, 3, {1}}, {1, 0, 10, {0}}}, 1);
    const auto e = exact_matching_att(ds);
    CHECK_THAT(e.point, WithinAbs(3.0, 1e-15));
    CHECK(e.diagnostics.at("matched_fraction") == 1.0);
    CHECK(e.n_used_te == 1);
    CHECK(e.n_used_tu == 2);
    CHECK(e.diagnostics.at("cell_1_tu") == 2.0);

    const auto zero = make_binary({{1, 1, 2, {1}}, {1, 0, 1, {1}}, {1, 0, 3, {1}}, {1, 1, 7, {0}}, {1, 0, 7, {0}}}, 1);
    CHECK_THAT(exact_matching_att(zero).point, WithinAbs(0.0, 1e-15));

    const auto dropped = make_binary({{1, 1, 5, {1}}, {1, 1, 9, {0}}, {1, 0, 1, {1}}}, 1);
    const auto d = exact_matching_att(dropped);
    CHECK(d.point == 4.0);
    CHECK(d.diagnostics.at("matched_fraction") == 0.5);
    CHECK(d.n_used_te == 1);

    const auto none = make_binary({{1, 1, 5, {1}}, {1, 0, 1, {0}}}, 1);
    CHECK(kind_of([&] { exact_matching_att(none); }) == ErrorKind::NoMatches);
}

TEST_CASE("exact_matching_att rejects non-binary covariates", "[estimators][matching][errors]") {
    const auto ds = simulated(1, 500);
    MatchingConfig cfg;
    cfg.covariates = {"b1", "cont"};
    CHECK(kind_of([&] { exact_matching_att(ds, cfg); }) == ErrorKind::NonBinaryCovariate);
    cfg.covariates = {"missing"};
    CHECK(kind_of([&] { exact_matching_att(ds, cfg); }) == ErrorKind::UnknownCovariate);
}

TEST_CASE("regression_att hand examples", "[estimators][regression]") {
    const std::vector<std::string> names{"x"};
    const std::vector<CovariateKind> kinds{CovariateKind::Continuous};
    const auto ds = make_dataset({{1, 0, 0, {0}}, {1, 0, 1, {1}}, {1, 1, 5, {2}}}, names, kinds);
    CHECK_THAT(regression_att(ds).point, WithinAbs(3.0, 1e-12));

    const auto exact = make_dataset({{1, 0, 1, {0}}, {1, 0, 3, {1}}, {1, 1, 7, {3}}, {1, 1, -1, {-1}}}, names, kinds);
    CHECK_THAT(regression_att(exact).point, WithinAbs(0.0, 1e-12));

    const auto one_tu = make_dataset({{1, 0, 0, {0}}, {1, 1, 5, {2}}}, names, kinds);
    CHECK(kind_of([&] { regression_att(one_tu); }) == ErrorKind::InsufficientUnexposed);
}

TEST_CASE("iptw_att hand examples", "[estimators][iptw]") {
    const auto ds = make_plain({{1, 1, 2}, {1, 0, 0}, {1, 0, 4}});
    IptwConfig no_trim;
    no_trim.trim_low_q = 0.0;
    no_trim.trim_high_q = 1.0;
    // Odds weights e/(1-e) of 3 and 1.
    const auto e = iptw_att_from_propensities(ds, std::vector<double>{0.75, 0.5}, no_trim);
    CHECK_THAT(e.point, WithinAbs(1.0, 1e-15));
    CHECK_THAT(e.diagnostics.at("weighted_mean_tu"), WithinAbs(1.0, 1e-15));

    // Default trimming clamps [3, 1] to its 1% and 99% quantiles.
    const auto w = trimmed_odds_weights(std::vector<double>{0.75, 0.5}, IptwConfig{});
    CHECK_THAT(w.tu_weights[0], WithinAbs(2.98, 1e-12));
    CHECK_THAT(w.tu_weights[1], WithinAbs(1.02, 1e-12));
    CHECK(w.n_clamped_low == 1);
    CHECK(w.n_clamped_high == 1);

    IptwConfig bad;
    bad.trim_low_q = 0.6;
    bad.trim_high_q = 0.4;
    CHECK(kind_of([&] { iptw_att(ds, bad); }) == ErrorKind::InvalidConfig);
}

TEST_CASE("reduction chain", "[estimators][reduction]") {
    std::mt19937_64 gen(31);
    for (int trial = 0; trial < 20; ++trial) {
        // k = 0 regression is DIGM.
        const auto ds = simulated(100 + static_cast<std::uint64_t>(trial), 600);
        RegressionConfig intercept;
        intercept.intercept_only = true;
        CHECK_THAT(regression_att(ds, intercept).point, WithinAbs(digm_att(ds).point, 1e-12));

        std::vector<Unit> plain;
        for (std::size_t i = 0; i < ds.size(); ++i) plain.push_back({ds.z(i), ds.w(i), ds.y(i), {}});
        const auto bare = make_plain(plain);
        CHECK_THAT(regression_att(bare).point, WithinAbs(digm_att(bare).point, 1e-12));

        // Symmetric covariates: fitted propensities are 0.5 and weights 1.
        const auto sym = make_symmetric(symmetric_units(gen, 50 + 10 * static_cast<std::size_t>(trial), 20));
        const auto iptw = iptw_att(sym);
        CHECK_THAT(iptw.point, WithinAbs(digm_att(sym).point, 1e-12));
        const std::vector<double> half(sym.counts().n_tu, 0.5);
        CHECK_THAT(iptw_att_from_propensities(sym, half).point, WithinAbs(digm_att(sym).point, 1e-12));

        // A single global matching cell.
        std::vector<Unit> flat;
        for (std::size_t i = 0; i < ds.size(); ++i) flat.push_back({ds.z(i), ds.w(i), ds.y(i), {1.0}});
        CHECK_THAT(exact_matching_att(make_binary(flat, 1)).point, WithinAbs(digm_att(ds).point, 1e-12));
    }
}

TEST_CASE("one binary covariate: regression equals matching", "[estimators][reduction]") {
    std::mt19937_64 gen(41);
    for (int trial = 0; trial < 50; ++trial) {
        const auto ds = make_binary(random_binary_units(gen, 150, 1, true), 1);
        CHECK_THAT(regression_att(ds).point, WithinAbs(exact_matching_att(ds).point, 1e-8));
    }
}

TEST_CASE("exact matching equals the brute-force stratified estimator", "[estimators][matching][oracle]") {
    std::mt19937_64 gen(51);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t k = 1 + static_cast<std::size_t>(trial % 3);
        const auto ds = make_binary(random_binary_units(gen, 20 + static_cast<std::size_t>(trial), k, trial % 2 == 0), k);
        std::vector<std::size_t> cols(k);
        std::iota(cols.begin(), cols.end(), std::size_t{0});
        const auto oracle = stratified_oracle(ds, cols);
        const auto e = exact_matching_att(ds);
        CHECK_THAT(e.point, WithinAbs(oracle.att, 1e-12));
        CHECK(e.n_used_te == oracle.matched_te);
        CHECK(e.diagnostics.at("matched_fraction") ==
              static_cast<double>(oracle.matched_te) / static_cast<double>(oracle.total_te));
    }
}

TEST_CASE("estimators are shift, scale and permutation equivariant", "[estimators][property]") {
    std::mt19937_64 gen(61);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto ds = simulated(seed);
        const auto base = all_estimates(ds);
        const auto shifted = all_estimates(ds.with_affine_outcomes(1.0, 123.5));
        const auto scaled = all_estimates(ds.with_affine_outcomes(-3.25, 0.0));
        const auto shuffled = all_estimates(permuted(ds, gen));
        for (std::size_t m = 0; m < base.size(); ++m) {
            INFO(to_string(base[m].method));
            const double tol = 1e-9 * (1.0 + std::abs(base[m].point));
            CHECK_THAT(shifted[m].point, WithinAbs(base[m].point, 1e-9 * 124.0));
            CHECK_THAT(scaled[m].point, WithinAbs(-3.25 * base[m].point, 4.0 * tol));
            CHECK_THAT(shuffled[m].point, WithinAbs(base[m].point, tol));
        }
    }
}

TEST_CASE("control units never influence observational estimators", "[estimators][property]") {
    const auto ds = simulated(9, 2000);
    std::vector<double> y(ds.y_column().begin(), ds.y_column().end());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (ds.z(i) == 0) y[i] += 1000.0;
    }
    std::vector<std::uint8_t> z(ds.z_column().begin(), ds.z_column().end());
    std::vector<std::uint8_t> w(ds.w_column().begin(), ds.w_column().end());
    const StudyDataset moved(ds.schema(), z, w, y, ds.covariates());
    for (Method m : {Method::Digm, Method::ExactMatching, Method::RegressionAdjustment, Method::Iptw}) {
        EstimatorSpec spec;
        spec.method = m;
        CHECK(run_estimator(moved, spec).point == run_estimator(ds, spec).point);
    }
}

TEST_CASE("method names round trip", "[estimators]") {
    for (Method m : kAllMethods) CHECK(parse_method(to_string(m)) == m);
    CHECK(kind_of([] { parse_method("ols"); }) == ErrorKind::InvalidConfig);
}
