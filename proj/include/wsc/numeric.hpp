#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace wsc {

// Dense row-major matrix. Only what the fitters need.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<const double> row(std::size_t r) const noexcept {
        return {data_.data() + r * cols_, cols_};
    }
    std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }

    std::span<const double> data() const noexcept { return data_; }

    // Rows picked by index, in the given order.
    Matrix select_rows(std::span<const std::size_t> rows) const;
    // Columns picked by index, in the given order.
    Matrix select_cols(std::span<const std::size_t> cols) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Per-column centering and scaling computed on the fit set. Columns whose
// sample sd is zero are marked inactive and carry no coefficient.
struct Standardization {
    std::vector<double> means;
    std::vector<double> sds;
    std::vector<bool> active;

    static Standardization fit(const Matrix& features);
    std::size_t width() const noexcept { return means.size(); }
};

struct LinearModel {
    // Original feature scale, intercept first (length k + 1).
    std::vector<double> coefficients;
    Standardization standardization;
    bool ridge_used = false;

    double predict(std::span<const double> x) const;
    std::vector<double> predict(const Matrix& features) const;

private:
    friend LinearModel fit_ols(const Matrix&, std::span<const double>);
    // Standardized-scale coefficients, intercept first. Predictions go through
    // these so that rescaling a column cannot change them beyond rounding.
    std::vector<double> scaled_;
};

struct ConvergenceReport {
    int iterations = 0;
    double deviance = 0.0;
    bool converged = false;
    // Deviance after each accepted step, starting with the initial point.
    std::vector<double> deviance_trace;
};

inline constexpr double kProbabilityClamp = 1e-6;

struct LogisticModel {
    std::vector<double> coefficients;  // original scale, intercept first
    Standardization standardization;
    ConvergenceReport report;

    // Model with the given original-scale coefficients and identity scaling.
    static LogisticModel from_coefficients(std::vector<double> coefficients);

    std::size_t width() const noexcept { return coefficients.empty() ? 0 : coefficients.size() - 1; }
    double linear_predictor(std::span<const double> x) const;
};

double sigmoid(double t) noexcept;
double logit(double p) noexcept;

LinearModel fit_ols(const Matrix& features, std::span<const double> targets);

// Bernoulli maximum likelihood by IRLS with step halving.
LogisticModel fit_logistic(const Matrix& features, std::span<const double> labels);

// Clamped to [kProbabilityClamp, 1 - kProbabilityClamp].
std::vector<double> predict_prob(const LogisticModel& model, const Matrix& features);

// Gradient of the (unclamped) Bernoulli log-likelihood with respect to the
// model's original-scale coefficients.
std::vector<double> log_likelihood_gradient(const LogisticModel& model, const Matrix& features,
                                            std::span<const double> labels);

// Linear-interpolation quantile: v[floor p] + frac(p) (v[floor p + 1] - v[floor p]),
// p = q (m - 1) over the sorted values.
double quantile(std::span<const double> values, double q);
// Same, over values already sorted ascending.
double quantile_sorted(std::span<const double> sorted, double q);

double weighted_mean(std::span<const double> values, std::span<const double> weights);
double mean(std::span<const double> values);
// Unbiased sample variance; 0 for fewer than two values.
double sample_variance(std::span<const double> values);

// Solves the symmetric positive definite system in place by Cholesky.
// Returns false when a pivot is not safely positive.
bool cholesky_solve(std::vector<double>& gram, std::vector<double>& rhs, std::size_t dim);

}  // namespace wsc
