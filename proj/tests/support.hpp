#pragma once

// Dataset builders and independent reference estimators shared by the unit
// tests and the acceptance runner.

#include <cmath>
#include <cstdint>
#include <algorithm>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "wsc/data_model.hpp"
#include "wsc/numeric.hpp"

namespace wsc::testing {

struct Unit {
    int z;
    int w;
    double y;
    std::vector<double> x;
};

inline StudyDataset make_dataset(const std::vector<Unit>& units, std::vector<std::string> names,
                                 std::vector<CovariateKind> kinds, std::vector<std::string> matching = {}) {
    std::vector<UserRecord> records;
    records.reserve(units.size());
    for (const auto& u : units) records.push_back({u.z, u.w, u.y, u.x});
    return validate_dataset(records, CovariateSchema(std::move(names), std::move(kinds), std::move(matching)));
}

// Dataset without covariates.
inline StudyDataset make_plain(const std::vector<Unit>& units) { return make_dataset(units, {}, {}); }

// Binary covariates b0..b{k-1}, all in the matching subset.
inline StudyDataset make_binary(const std::vector<Unit>& units, std::size_t k) {
    std::vector<std::string> names;
    for (std::size_t j = 0; j < k; ++j) names.push_back("b" + std::to_string(j));
    return make_dataset(units, names, std::vector<CovariateKind>(k, CovariateKind::Binary), names);
}

// Small random dataset with k binary covariates whose outcome depends on the
// covariates and on exposure. When all_matched, every TE cell also holds TU units.
inline std::vector<Unit> random_binary_units(std::mt19937_64& gen, std::size_t n, std::size_t k,
                                             bool all_matched) {
    std::uniform_real_distribution<double> ud;
    std::normal_distribution<double> nd;
    std::vector<double> p(k);
    for (auto& v : p) v = 0.2 + 0.6 * ud(gen);
    std::vector<Unit> units;
    auto draw = [&](int z, int w) {
        Unit u{z, w, 0.0, std::vector<double>(k)};
        double y = 1.0 + 2.0 * w + nd(gen);
        for (std::size_t j = 0; j < k; ++j) {
            u.x[j] = ud(gen) < p[j] ? 1.0 : 0.0;
            y += (1.0 + static_cast<double>(j)) * u.x[j];
        }
        u.y = y;
        return u;
    };
    while (units.size() < n) {
        const int z = ud(gen) < 0.6 ? 1 : 0;
        const int w = z == 1 && ud(gen) < 0.5 ? 1 : 0;
        units.push_back(draw(z, w));
    }
    // Guarantee both groups exist.
    units.front() = draw(1, 1);
    units.back() = draw(1, 0);
    if (all_matched) {
        std::map<std::uint64_t, bool> tu_cells;
        auto key = [&](const Unit& u) {
            std::uint64_t c = 0;
            for (std::size_t j = 0; j < k; ++j) c |= (u.x[j] == 1.0 ? std::uint64_t{1} : 0) << j;
            return c;
        };
        for (const auto& u : units) {
            if (u.z == 1 && u.w == 0) tu_cells[key(u)] = true;
        }
        // Add an unexposed twin for every TE unit in a cell without one.
        const std::size_t original = units.size();
        for (std::size_t i = 0; i < original; ++i) {
            const Unit u = units[i];
            if (u.z == 1 && u.w == 1 && !tu_cells.count(key(u))) {
                Unit twin = u;
                twin.w = 0;
                twin.y = u.y - 2.0 + nd(gen);
                units.push_back(twin);
                tu_cells[key(u)] = true;
            }
        }
    }
    return units;
}

struct StratifiedResult {
    double att = 0.0;
    std::size_t matched_te = 0;
    std::size_t total_te = 0;
};

// Enumerates every cell of the given binary columns and returns the
// difference of TE and TU cell means, weighted by TE cell counts, over cells
// that hold both groups.
inline StratifiedResult stratified_oracle(const StudyDataset& ds, const std::vector<std::size_t>& cols) {
    const std::size_t cells = std::size_t{1} << cols.size();
    std::vector<long double> sum_te(cells, 0.0L);
    std::vector<long double> sum_tu(cells, 0.0L);
    std::vector<std::size_t> n_te(cells, 0);
    std::vector<std::size_t> n_tu(cells, 0);
    for (std::size_t i = 0; i < ds.size(); ++i) {
        if (ds.z(i) != 1) continue;
        std::size_t c = 0;
        for (std::size_t b = 0; b < cols.size(); ++b) {
            if (ds.x(i)[cols[b]] == 1.0) c += std::size_t{1} << b;
        }
        if (ds.w(i) == 1) {
            sum_te[c] += ds.y(i);
            ++n_te[c];
        } else {
            sum_tu[c] += ds.y(i);
            ++n_tu[c];
        }
    }
    StratifiedResult r;
    long double total = 0.0L;
    for (std::size_t c = 0; c < cells; ++c) {
        r.total_te += n_te[c];
        if (n_te[c] == 0 || n_tu[c] == 0) continue;
        const long double diff = sum_te[c] / n_te[c] - sum_tu[c] / n_tu[c];
        total += diff * static_cast<long double>(n_te[c]);
        r.matched_te += n_te[c];
    }
    r.att = r.matched_te > 0 ? static_cast<double>(total / static_cast<long double>(r.matched_te)) : NAN;
    return r;
}

// Treatment group where every covariate vector appears once exposed and once
// unexposed, so the propensity MLE is exactly 0.5 everywhere.
inline std::vector<Unit> symmetric_units(std::mt19937_64& gen, std::size_t pairs, std::size_t controls) {
    std::normal_distribution<double> nd;
    std::vector<Unit> units;
    for (std::size_t i = 0; i < pairs; ++i) {
        const std::vector<double> x{nd(gen), std::floor(std::exp(nd(gen) + 2.0)), nd(gen) > 0 ? 1.0 : 0.0};
        units.push_back({1, 1, 3.0 + x[0] + nd(gen), x});
        units.push_back({1, 0, 1.0 + x[0] + nd(gen), x});
    }
    for (std::size_t i = 0; i < controls; ++i) {
        units.push_back({0, 0, nd(gen), {nd(gen), 1.0, 0.0}});
    }
    return units;
}

inline StudyDataset make_symmetric(const std::vector<Unit>& units) {
    return make_dataset(units, {"c", "n", "b"},
                        {CovariateKind::Continuous, CovariateKind::Count, CovariateKind::Binary}, {"b"});
}

// Normal covariates; column c has the given scale and mean c.
inline Matrix random_matrix(std::mt19937_64& gen, std::size_t n, std::size_t k,
                            const std::vector<double>& scales) {
    std::normal_distribution<double> nd;
    Matrix m(n, k);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < k; ++c) m(r, c) = scales[c] * nd(gen) + static_cast<double>(c);
    }
    return m;
}

// Textbook oracle: unstandardized normal equations [1 X]'[1 X] b = [1 X]'y,
// solved by Gaussian elimination with partial pivoting in long double.
inline std::vector<double> oracle_ols(const Matrix& x, const std::vector<double>& y) {
    const std::size_t d = x.cols() + 1;
    std::vector<std::vector<long double>> a(d, std::vector<long double>(d + 1, 0.0L));
    for (std::size_t r = 0; r < x.rows(); ++r) {
        std::vector<long double> z(d, 1.0L);
        for (std::size_t c = 0; c < x.cols(); ++c) z[c + 1] = x(r, c);
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) a[i][j] += z[i] * z[j];
            a[i][d] += z[i] * y[r];
        }
    }
    for (std::size_t col = 0; col < d; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < d; ++r) {
            if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
        }
        std::swap(a[col], a[piv]);
        for (std::size_t r = 0; r < d; ++r) {
            if (r == col) continue;
            const long double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c <= d; ++c) a[r][c] -= f * a[col][c];
        }
    }
    std::vector<double> b(d);
    for (std::size_t i = 0; i < d; ++i) b[i] = static_cast<double>(a[i][d] / a[i][i]);
    return b;
}

// Test-side Bernoulli log-likelihood in long double, for finite differences.
inline long double log_likelihood(const std::vector<double>& coef, const Matrix& x,
                           const std::vector<double>& y) {
    long double ll = 0.0L;
    for (std::size_t r = 0; r < x.rows(); ++r) {
        long double eta = coef[0];
        for (std::size_t c = 0; c < x.cols(); ++c) eta += coef[c + 1] * x(r, c);
        // log sigmoid(eta) and log(1 - sigmoid(eta)), overflow-safe.
        const long double log1pexp = eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
        ll += y[r] * (eta - log1pexp) + (1.0L - y[r]) * (-log1pexp);
    }
    return ll;
}

}  // namespace wsc::testing
