#include "wsc/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "wsc/error.hpp"

namespace wsc {

namespace {

constexpr int kMaxIrlsIterations = 100;
constexpr int kMaxHalvings = 30;
constexpr double kDevianceTolerance = 1e-8;
constexpr double kWeightFloor = kProbabilityClamp * (1.0 - kProbabilityClamp);

double clamp_prob(double p) noexcept {
    return std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
}

// log(1 + e^t) without overflow or cancellation.
double softplus(double t) noexcept { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

// Linear-predictor bound equivalent to the probability clamp.
const double kEtaBound = std::log((1.0 - kProbabilityClamp) / kProbabilityClamp);

std::vector<std::size_t> active_columns(const Standardization& s) {
    std::vector<std::size_t> cols;
    for (std::size_t j = 0; j < s.width(); ++j) {
        if (s.active[j]) cols.push_back(j);
    }
    return cols;
}

// Standardized design row (without the intercept) for the active columns.
void scaled_row(const Standardization& s, std::span<const std::size_t> active,
                std::span<const double> x, std::span<double> out) {
    for (std::size_t a = 0; a < active.size(); ++a) {
        const std::size_t j = active[a];
        out[a] = (x[j] - s.means[j]) / s.sds[j];
    }
}

// Solve with a ridge fallback of 1e-10 * trace / dim on the diagonal.
std::vector<double> solve_normal_equations(std::vector<double> gram, std::vector<double> rhs,
                                           std::size_t dim, bool* ridge_used) {
    std::vector<double> g = gram;
    std::vector<double> b = rhs;
    if (cholesky_solve(g, b, dim)) {
        if (ridge_used != nullptr) *ridge_used = false;
        return b;
    }
    double trace = 0.0;
    for (std::size_t i = 0; i < dim; ++i) trace += gram[i * dim + i];
    const double ridge = 1e-10 * trace / static_cast<double>(dim);
    for (std::size_t i = 0; i < dim; ++i) gram[i * dim + i] += ridge;
    if (!cholesky_solve(gram, rhs, dim)) {
        throw Error(ErrorKind::DegenerateDesign, "normal equations singular even after ridge");
    }
    if (ridge_used != nullptr) *ridge_used = true;
    return rhs;
}

// Maps standardized-scale coefficients back to the original feature scale.
std::vector<double> unscale(const Standardization& s, std::span<const std::size_t> active,
                            std::span<const double> scaled) {
    std::vector<double> coef(s.width() + 1, 0.0);
    double intercept = scaled[0];
    for (std::size_t a = 0; a < active.size(); ++a) {
        const std::size_t j = active[a];
        coef[j + 1] = scaled[a + 1] / s.sds[j];
        intercept -= coef[j + 1] * s.means[j];
    }
    coef[0] = intercept;
    return coef;
}

void check_rows(const Matrix& features, std::size_t n, const char* what) {
    if (features.rows() != n) {
        throw Error(ErrorKind::ShapeMismatch, std::string(what) + ": " +
                                                  std::to_string(features.rows()) + " rows vs " +
                                                  std::to_string(n) + " targets");
    }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        throw Error(ErrorKind::ShapeMismatch, "matrix data length does not match dimensions");
    }
}

Matrix Matrix::select_rows(std::span<const std::size_t> rows) const {
    Matrix out(rows.size(), cols_);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(rows[i] * cols_), cols_,
                    out.data_.begin() + static_cast<std::ptrdiff_t>(i * cols_));
    }
    return out;
}

Matrix Matrix::select_cols(std::span<const std::size_t> cols) const {
    Matrix out(rows_, cols.size());
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < cols.size(); ++c) out(r, c) = (*this)(r, cols[c]);
    }
    return out;
}

Standardization Standardization::fit(const Matrix& features) {
    const std::size_t n = features.rows();
    const std::size_t k = features.cols();
    Standardization s;
    s.means.assign(k, 0.0);
    s.sds.assign(k, 0.0);
    s.active.assign(k, false);
    if (n == 0) return s;
    for (std::size_t r = 0; r < n; ++r) {
        const auto row = features.row(r);
        for (std::size_t j = 0; j < k; ++j) s.means[j] += row[j];
    }
    for (std::size_t j = 0; j < k; ++j) s.means[j] /= static_cast<double>(n);
    std::vector<double> ss(k, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        const auto row = features.row(r);
        for (std::size_t j = 0; j < k; ++j) {
            const double d = row[j] - s.means[j];
            ss[j] += d * d;
        }
    }
    for (std::size_t j = 0; j < k; ++j) {
        const double sd = n > 1 ? std::sqrt(ss[j] / static_cast<double>(n - 1)) : 0.0;
        // Relative threshold: a constant column can leave rounding-level spread.
        const double scale = std::max(std::abs(s.means[j]), 1.0);
        if (sd > 1e-12 * scale) {
            s.sds[j] = sd;
            s.active[j] = true;
        } else {
            s.sds[j] = 1.0;
        }
    }
    return s;
}

bool cholesky_solve(std::vector<double>& a, std::vector<double>& b, std::size_t dim) {
    // In-place lower factor.
    for (std::size_t j = 0; j < dim; ++j) {
        const double original = a[j * dim + j];
        double d = original;
        for (std::size_t p = 0; p < j; ++p) d -= a[j * dim + p] * a[j * dim + p];
        if (!(d > 1e-13 * std::abs(original)) || !(d > 0.0)) return false;
        const double l = std::sqrt(d);
        a[j * dim + j] = l;
        for (std::size_t i = j + 1; i < dim; ++i) {
            double s = a[i * dim + j];
            for (std::size_t p = 0; p < j; ++p) s -= a[i * dim + p] * a[j * dim + p];
            a[i * dim + j] = s / l;
        }
    }
    for (std::size_t i = 0; i < dim; ++i) {
        double s = b[i];
        for (std::size_t p = 0; p < i; ++p) s -= a[i * dim + p] * b[p];
        b[i] = s / a[i * dim + i];
    }
    for (std::size_t ii = dim; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t p = ii + 1; p < dim; ++p) s -= a[p * dim + ii] * b[p];
        b[ii] = s / a[ii * dim + ii];
    }
    return true;
}

double sigmoid(double t) noexcept {
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

double logit(double p) noexcept { return std::log(p / (1.0 - p)); }

double LinearModel::predict(std::span<const double> x) const {
    const std::size_t k = standardization.width();
    if (x.size() != k) {
        throw Error(ErrorKind::ShapeMismatch, "feature width " + std::to_string(x.size()) +
                                                  " vs model width " + std::to_string(k));
    }
    double f = scaled_.empty() ? coefficients[0] : scaled_[0];
    if (scaled_.empty()) {
        for (std::size_t j = 0; j < k; ++j) f += coefficients[j + 1] * x[j];
        return f;
    }
    std::size_t a = 1;
    for (std::size_t j = 0; j < k; ++j) {
        if (!standardization.active[j]) continue;
        f += scaled_[a++] * (x[j] - standardization.means[j]) / standardization.sds[j];
    }
    return f;
}

std::vector<double> LinearModel::predict(const Matrix& features) const {
    std::vector<double> out(features.rows());
    for (std::size_t r = 0; r < features.rows(); ++r) out[r] = predict(features.row(r));
    return out;
}

LinearModel fit_ols(const Matrix& features, std::span<const double> targets) {
    const std::size_t n = targets.size();
    if (n == 0) throw Error(ErrorKind::EmptyInput, "fit_ols needs at least one observation");
    check_rows(features, n, "fit_ols");

    LinearModel model;
    model.standardization = Standardization::fit(features);
    const auto active = active_columns(model.standardization);
    const std::size_t dim = active.size() + 1;

    std::vector<double> gram(dim * dim, 0.0);
    std::vector<double> rhs(dim, 0.0);
    std::vector<double> z(dim, 1.0);
    for (std::size_t r = 0; r < n; ++r) {
        scaled_row(model.standardization, active, features.row(r), std::span(z).subspan(1));
        const double y = targets[r];
        for (std::size_t i = 0; i < dim; ++i) {
            rhs[i] += z[i] * y;
            for (std::size_t j = 0; j <= i; ++j) gram[i * dim + j] += z[i] * z[j];
        }
    }
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = 0; j < i; ++j) gram[j * dim + i] = gram[i * dim + j];
    }
    model.scaled_ = solve_normal_equations(std::move(gram), std::move(rhs), dim, &model.ridge_used);
    model.coefficients = unscale(model.standardization, active, model.scaled_);
    return model;
}

LogisticModel LogisticModel::from_coefficients(std::vector<double> coefficients) {
    if (coefficients.empty()) {
        throw Error(ErrorKind::ShapeMismatch, "logistic model needs an intercept");
    }
    LogisticModel m;
    const std::size_t k = coefficients.size() - 1;
    m.standardization.means.assign(k, 0.0);
    m.standardization.sds.assign(k, 1.0);
    m.standardization.active.assign(k, true);
    m.coefficients = std::move(coefficients);
    return m;
}

double LogisticModel::linear_predictor(std::span<const double> x) const {
    if (x.size() != width()) {
        throw Error(ErrorKind::ShapeMismatch, "feature width " + std::to_string(x.size()) +
                                                  " vs model width " + std::to_string(width()));
    }
    double eta = coefficients[0];
    for (std::size_t j = 0; j < x.size(); ++j) eta += coefficients[j + 1] * x[j];
    return eta;
}

LogisticModel fit_logistic(const Matrix& features, std::span<const double> labels) {
    const std::size_t n = labels.size();
    if (n == 0) throw Error(ErrorKind::EmptyInput, "fit_logistic needs at least one observation");
    check_rows(features, n, "fit_logistic");
    std::size_t ones = 0;
    for (double y : labels) {
        if (y != 0.0 && y != 1.0) {
            throw Error(ErrorKind::NonBinaryIndicator, "logistic labels must be 0 or 1");
        }
        ones += y == 1.0 ? 1 : 0;
    }
    if (ones == 0 || ones == n) {
        throw Error(ErrorKind::AllOneClass, "labels are all " + std::string(ones == 0 ? "0" : "1"));
    }

    LogisticModel model;
    model.standardization = Standardization::fit(features);
    const auto active = active_columns(model.standardization);
    const std::size_t dim = active.size() + 1;

    // Materialize the standardized design once; IRLS revisits it every step.
    std::vector<double> design(n * dim, 1.0);
    for (std::size_t r = 0; r < n; ++r) {
        scaled_row(model.standardization, active, features.row(r),
                   std::span(design).subspan(r * dim + 1, dim - 1));
    }

    std::vector<double> eta(n, 0.0);
    auto linear = [&](std::span<const double> beta) {
        for (std::size_t r = 0; r < n; ++r) {
            const double* z = design.data() + r * dim;
            double s = 0.0;
            for (std::size_t i = 0; i < dim; ++i) s += z[i] * beta[i];
            eta[r] = s;
        }
    };
    // Clamped Bernoulli deviance. Near the optimum accepted steps change it by
    // less than double rounding of a plain sum, hence the softplus form and the
    // long double accumulator.
    auto deviance_of = [&]() {
        long double dev = 0.0L;
        for (std::size_t r = 0; r < n; ++r) {
            const double t = std::clamp(eta[r], -kEtaBound, kEtaBound);
            dev += softplus(labels[r] == 1.0 ? -t : t);
        }
        return static_cast<double>(2.0L * dev);
    };

    std::vector<double> beta(dim, 0.0);
    linear(beta);
    double deviance = deviance_of();
    ConvergenceReport& report = model.report;
    report.deviance_trace.push_back(deviance);

    std::vector<double> gram(dim * dim);
    std::vector<double> grad(dim);
    std::vector<double> candidate(dim);
    for (int iter = 0; iter < kMaxIrlsIterations; ++iter) {
        std::fill(gram.begin(), gram.end(), 0.0);
        std::fill(grad.begin(), grad.end(), 0.0);
        for (std::size_t r = 0; r < n; ++r) {
            const double p = clamp_prob(sigmoid(eta[r]));
            const double w = std::max(p * (1.0 - p), kWeightFloor);
            const double resid = labels[r] - p;
            const double* z = design.data() + r * dim;
            for (std::size_t i = 0; i < dim; ++i) {
                grad[i] += z[i] * resid;
                const double wz = w * z[i];
                for (std::size_t j = 0; j <= i; ++j) gram[i * dim + j] += wz * z[j];
            }
        }
        for (std::size_t i = 0; i < dim; ++i) {
            for (std::size_t j = 0; j < i; ++j) gram[j * dim + i] = gram[i * dim + j];
        }
        std::vector<double> step = solve_normal_equations(gram, grad, dim, nullptr);

        double next = 0.0;
        double full_step = 0.0;
        bool accepted = false;
        for (int h = 0; h <= kMaxHalvings; ++h) {
            for (std::size_t i = 0; i < dim; ++i) candidate[i] = beta[i] + step[i];
            linear(candidate);
            next = deviance_of();
            if (h == 0) full_step = next;
            if (next <= deviance) {
                accepted = true;
                break;
            }
            for (double& s : step) s *= 0.5;
        }
        if (!accepted) {
            // No halving improved on the current point: it is optimal to within
            // rounding unless even the full step moved the deviance materially.
            linear(beta);
            report.converged = full_step - deviance < kDevianceTolerance;
            break;
        }
        beta = candidate;
        report.iterations = iter + 1;
        report.deviance_trace.push_back(next);
        const double change = deviance - next;
        deviance = next;
        if (change < kDevianceTolerance) {
            report.converged = true;
            break;
        }
    }
    report.deviance = deviance;

    // Saturated fitted probabilities mean the likelihood has no finite maximizer
    // (separation); the coefficients are then only where the clamp stopped them.
    for (std::size_t r = 0; r < n && report.converged; ++r) {
        const double p = sigmoid(eta[r]);
        if (p <= kProbabilityClamp || p >= 1.0 - kProbabilityClamp) report.converged = false;
    }

    model.coefficients = unscale(model.standardization, active, beta);
    return model;
}

std::vector<double> predict_prob(const LogisticModel& model, const Matrix& features) {
    if (features.cols() != model.width()) {
        throw Error(ErrorKind::ShapeMismatch, "feature width " + std::to_string(features.cols()) +
                                                  " vs model width " +
                                                  std::to_string(model.width()));
    }
    std::vector<double> out(features.rows());
    for (std::size_t r = 0; r < features.rows(); ++r) {
        out[r] = clamp_prob(sigmoid(model.linear_predictor(features.row(r))));
    }
    return out;
}

std::vector<double> log_likelihood_gradient(const LogisticModel& model, const Matrix& features,
                                            std::span<const double> labels) {
    check_rows(features, labels.size(), "log_likelihood_gradient");
    if (features.cols() != model.width()) {
        throw Error(ErrorKind::ShapeMismatch, "feature width does not match model");
    }
    std::vector<double> grad(model.coefficients.size(), 0.0);
    for (std::size_t r = 0; r < features.rows(); ++r) {
        const auto x = features.row(r);
        const double resid = labels[r] - sigmoid(model.linear_predictor(x));
        grad[0] += resid;
        for (std::size_t j = 0; j < x.size(); ++j) grad[j + 1] += resid * x[j];
    }
    return grad;
}

double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw Error(ErrorKind::EmptyInput, "quantile of an empty sample");
    if (!(q >= 0.0 && q <= 1.0)) {
        throw Error(ErrorKind::InvalidConfig, "quantile level must lie in [0, 1]");
    }
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double quantile(std::span<const double> values, double q) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    return quantile_sorted(sorted, q);
}

double weighted_mean(std::span<const double> values, std::span<const double> weights) {
    if (values.size() != weights.size()) {
        throw Error(ErrorKind::ShapeMismatch, "values and weights differ in length");
    }
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (weights[i] < 0.0) throw Error(ErrorKind::InvalidConfig, "negative weight");
        num += weights[i] * values[i];
        den += weights[i];
    }
    if (!(den > 0.0)) throw Error(ErrorKind::ZeroWeightSum, "weights sum to zero");
    return num / den;
}

double mean(std::span<const double> values) {
    if (values.empty()) throw Error(ErrorKind::EmptyInput, "mean of an empty sample");
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double sample_variance(std::span<const double> values) {
    if (values.size() < 2) return 0.0;
    const double m = mean(values);
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    return ss / static_cast<double>(values.size() - 1);
}

}  // namespace wsc
