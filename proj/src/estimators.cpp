#include "wsc/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "wsc/error.hpp"

namespace wsc {

namespace {

double mean_of(const GroupView& view) {
    double s = 0.0;
    for (std::size_t k = 0; k < view.size(); ++k) s += view.y(k);
    return s / static_cast<double>(view.size());
}

void require_exposed_and_unexposed(const StudyDataset& d) {
    if (d.counts().n_te == 0) throw Error(ErrorKind::NoExposed, "no treatment-exposed units");
    if (d.counts().n_tu == 0) throw Error(ErrorKind::NoUnexposed, "no treatment-unexposed units");
}

std::vector<std::size_t> all_columns(const CovariateSchema& schema) {
    std::vector<std::size_t> cols(schema.size());
    for (std::size_t j = 0; j < cols.size(); ++j) cols[j] = j;
    return cols;
}

std::vector<std::size_t> columns_or_all(const CovariateSchema& schema,
                                        const std::vector<std::string>& names) {
    return names.empty() ? all_columns(schema) : schema.indices_of(names);
}

}  // namespace

std::string_view to_string(Method method) noexcept {
    switch (method) {
        case Method::Experimental: return "experimental";
        case Method::Digm: return "digm";
        case Method::ExactMatching: return "match";
        case Method::RegressionAdjustment: return "regression";
        case Method::Iptw: return "iptw";
    }
    return "experimental";
}

Method parse_method(std::string_view name) {
    for (Method m : kAllMethods) {
        if (to_string(m) == name) return m;
    }
    throw Error(ErrorKind::InvalidConfig, "unknown method '" + std::string(name) +
                                              "' (expected experimental, digm, match, regression, iptw)");
}

void IptwConfig::validate() const {
    if (!(trim_low_q >= 0.0 && trim_low_q < trim_high_q && trim_high_q <= 1.0)) {
        throw Error(ErrorKind::InvalidConfig, "trim quantiles must satisfy 0 <= low < high <= 1");
    }
}

AttEstimate experimental_att(const StudyDataset& dataset) {
    const GroupCounts& c = dataset.counts();
    if (c.n_t == 0) throw Error(ErrorKind::NoTreatmentGroup, "no treatment-group units");
    if (c.n_c == 0) throw Error(ErrorKind::NoControlGroup, "no control-group units");
    if (c.n_te == 0) throw Error(ErrorKind::NoCompliers, "no treatment-group unit was exposed");

    double sum_t = 0.0;
    double sum_c = 0.0;
    for (std::size_t i = 0; i < dataset.size(); ++i) (dataset.z(i) ? sum_t : sum_c) += dataset.y(i);
    const double itt = sum_t / static_cast<double>(c.n_t) - sum_c / static_cast<double>(c.n_c);
    const double compliance = static_cast<double>(c.n_te) / static_cast<double>(c.n_t);

    AttEstimate e;
    e.method = Method::Experimental;
    e.point = itt / compliance;
    e.n_used_te = c.n_te;
    e.n_used_tu = c.n_tu;
    e.diagnostics["itt"] = itt;
    e.diagnostics["compliance_rate"] = compliance;
    e.diagnostics["n_control"] = static_cast<double>(c.n_c);
    return e;
}

AttEstimate digm_att(const StudyDataset& dataset) {
    require_exposed_and_unexposed(dataset);
    const GroupView te(dataset, Group::TreatmentExposed);
    const GroupView tu(dataset, Group::TreatmentUnexposed);
    const double mean_te = mean_of(te);
    const double mean_tu = mean_of(tu);

    AttEstimate e;
    e.method = Method::Digm;
    e.point = mean_te - mean_tu;
    e.n_used_te = te.size();
    e.n_used_tu = tu.size();
    e.diagnostics["mean_te"] = mean_te;
    e.diagnostics["mean_tu"] = mean_tu;
    return e;
}

AttEstimate exact_matching_att(const StudyDataset& dataset, const MatchingConfig& cfg) {
    require_exposed_and_unexposed(dataset);
    const CovariateSchema& schema = dataset.schema();
    const auto& names = cfg.covariates.empty() ? schema.matching_subset() : cfg.covariates;
    const auto cols = schema.indices_of(names);
    if (cols.size() > 63) throw Error(ErrorKind::InvalidConfig, "too many matching covariates");
    for (std::size_t c : cols) {
        if (schema.kinds()[c] != CovariateKind::Binary) {
            throw Error(ErrorKind::NonBinaryCovariate,
                        "matching covariate '" + schema.names()[c] + "' is not binary");
        }
    }
    auto cell_of = [&](std::span<const double> x) {
        std::uint64_t key = 0;
        for (std::size_t b = 0; b < cols.size(); ++b) {
            if (x[cols[b]] == 1.0) key |= std::uint64_t{1} << b;
        }
        return key;
    };

    struct Cell {
        double sum_tu = 0.0;
        std::size_t n_tu = 0;
        std::size_t n_te = 0;
    };
    std::map<std::uint64_t, Cell> cells;
    const GroupView tu(dataset, Group::TreatmentUnexposed);
    for (std::size_t k = 0; k < tu.size(); ++k) {
        Cell& cell = cells[cell_of(tu.x(k))];
        cell.sum_tu += tu.y(k);
        ++cell.n_tu;
    }

    const GroupView te(dataset, Group::TreatmentExposed);
    double sum_diff = 0.0;
    std::size_t matched = 0;
    for (std::size_t k = 0; k < te.size(); ++k) {
        Cell& cell = cells[cell_of(te.x(k))];
        ++cell.n_te;
        if (cell.n_tu == 0) continue;
        const double counterfactual = cell.sum_tu / static_cast<double>(cell.n_tu);
        sum_diff += te.y(k) - counterfactual;
        ++matched;
    }
    if (matched == 0) throw Error(ErrorKind::NoMatches, "no exposed unit has an unexposed match");

    AttEstimate e;
    e.method = Method::ExactMatching;
    e.point = sum_diff / static_cast<double>(matched);
    e.n_used_te = matched;
    std::size_t used_tu = 0;
    for (const auto& [key, cell] : cells) {
        if (cell.n_te > 0) used_tu += cell.n_tu;
        std::string label = "cell_";
        for (std::size_t b = 0; b < cols.size(); ++b) label += (key >> b) & 1 ? '1' : '0';
        e.diagnostics[label + "_te"] = static_cast<double>(cell.n_te);
        e.diagnostics[label + "_tu"] = static_cast<double>(cell.n_tu);
    }
    e.n_used_tu = used_tu;
    e.diagnostics["matched_fraction"] = static_cast<double>(matched) / static_cast<double>(te.size());
    e.diagnostics["n_cells"] = static_cast<double>(cells.size());
    return e;
}

AttEstimate regression_att(const StudyDataset& dataset, const RegressionConfig& cfg) {
    const GroupCounts& c = dataset.counts();
    if (c.n_te == 0) throw Error(ErrorKind::NoExposed, "no treatment-exposed units");
    if (c.n_tu < 2) {
        throw Error(ErrorKind::InsufficientUnexposed,
                    "regression needs at least 2 unexposed units, have " + std::to_string(c.n_tu));
    }
    const std::vector<std::size_t> cols =
        cfg.intercept_only ? std::vector<std::size_t>{} : columns_or_all(dataset.schema(), cfg.covariates);

    const GroupView tu(dataset, Group::TreatmentUnexposed);
    const GroupView te(dataset, Group::TreatmentExposed);
    const std::vector<double> y_tu = tu.outcomes();
    const LinearModel f = fit_ols(tu.covariates(cols), y_tu);

    const Matrix x_te = te.covariates(cols);
    double sum = 0.0;
    for (std::size_t k = 0; k < te.size(); ++k) sum += te.y(k) - f.predict(x_te.row(k));

    const Matrix x_tu = tu.covariates(cols);
    const double ybar = mean(y_tu);
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (std::size_t k = 0; k < tu.size(); ++k) {
        const double r = y_tu[k] - f.predict(x_tu.row(k));
        ss_res += r * r;
        ss_tot += (y_tu[k] - ybar) * (y_tu[k] - ybar);
    }

    AttEstimate e;
    e.method = Method::RegressionAdjustment;
    e.point = sum / static_cast<double>(te.size());
    e.n_used_te = te.size();
    e.n_used_tu = tu.size();
    e.diagnostics["r2_tu"] = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    e.diagnostics["n_features"] = static_cast<double>(cols.size());
    e.diagnostics["ridge_used"] = f.ridge_used ? 1.0 : 0.0;
    return e;
}

IptwWeights trimmed_odds_weights(std::span<const double> tu_propensities, const IptwConfig& cfg) {
    cfg.validate();
    IptwWeights out;
    out.tu_weights.reserve(tu_propensities.size());
    for (double e : tu_propensities) out.tu_weights.push_back(e / (1.0 - e));
    if (out.tu_weights.empty()) return out;
    std::vector<double> sorted = out.tu_weights;
    std::sort(sorted.begin(), sorted.end());
    out.trim_low = quantile_sorted(sorted, cfg.trim_low_q);
    out.trim_high = quantile_sorted(sorted, cfg.trim_high_q);
    for (double& w : out.tu_weights) {
        if (w < out.trim_low) {
            w = out.trim_low;
            ++out.n_clamped_low;
        } else if (w > out.trim_high) {
            w = out.trim_high;
            ++out.n_clamped_high;
        }
    }
    return out;
}

PropensityFit fit_propensity(const StudyDataset& dataset, const IptwConfig& cfg) {
    cfg.validate();
    require_exposed_and_unexposed(dataset);
    const auto cols = columns_or_all(dataset.schema(), cfg.covariates);

    // e(X) = P(W = 1 | X, Z = 1): the model only sees the treatment group.
    const GroupView treated(dataset, Group::Treatment);
    std::vector<double> labels(treated.size());
    for (std::size_t k = 0; k < treated.size(); ++k) {
        labels[k] = dataset.w(treated.rows()[k]);
    }
    PropensityFit fit;
    fit.model = fit_logistic(treated.covariates(cols), labels);

    const GroupView tu(dataset, Group::TreatmentUnexposed);
    fit.tu_propensities = predict_prob(fit.model, tu.covariates(cols));
    fit.weights = trimmed_odds_weights(fit.tu_propensities, cfg);
    return fit;
}

namespace {

AttEstimate iptw_from_weights(const StudyDataset& dataset, const IptwWeights& weights) {
    const GroupView te(dataset, Group::TreatmentExposed);
    const GroupView tu(dataset, Group::TreatmentUnexposed);
    if (weights.tu_weights.size() != tu.size()) {
        throw Error(ErrorKind::ShapeMismatch, "one weight per unexposed unit is required");
    }
    const double mean_te = mean_of(te);
    const double weighted_tu = weighted_mean(tu.outcomes(), weights.tu_weights);

    double sum_w = 0.0;
    double sum_w2 = 0.0;
    for (double w : weights.tu_weights) {
        sum_w += w;
        sum_w2 += w * w;
    }

    AttEstimate e;
    e.method = Method::Iptw;
    e.point = mean_te - weighted_tu;
    e.n_used_te = te.size();
    e.n_used_tu = tu.size();
    e.diagnostics["mean_te"] = mean_te;
    e.diagnostics["weighted_mean_tu"] = weighted_tu;
    e.diagnostics["trim_low"] = weights.trim_low;
    e.diagnostics["trim_high"] = weights.trim_high;
    e.diagnostics["n_clamped_low"] = static_cast<double>(weights.n_clamped_low);
    e.diagnostics["n_clamped_high"] = static_cast<double>(weights.n_clamped_high);
    e.diagnostics["ess_tu"] = sum_w * sum_w / sum_w2;
    return e;
}

}  // namespace

AttEstimate iptw_att_from_propensities(const StudyDataset& dataset,
                                       std::span<const double> tu_propensities,
                                       const IptwConfig& cfg) {
    require_exposed_and_unexposed(dataset);
    for (double e : tu_propensities) {
        if (!(e > 0.0 && e < 1.0)) {
            throw Error(ErrorKind::InvalidConfig, "propensities must lie strictly inside (0, 1)");
        }
    }
    return iptw_from_weights(dataset, trimmed_odds_weights(tu_propensities, cfg));
}

AttEstimate iptw_att(const StudyDataset& dataset, const IptwConfig& cfg) {
    const PropensityFit fit = fit_propensity(dataset, cfg);
    AttEstimate e = iptw_from_weights(dataset, fit.weights);
    e.diagnostics["propensity_converged"] = fit.model.report.converged ? 1.0 : 0.0;
    e.diagnostics["propensity_iterations"] = fit.model.report.iterations;
    e.diagnostics["propensity_deviance"] = fit.model.report.deviance;
    return e;
}

AttEstimate run_estimator(const StudyDataset& dataset, const EstimatorSpec& spec) {
    switch (spec.method) {
        case Method::Experimental: return experimental_att(dataset);
        case Method::Digm: return digm_att(dataset);
        case Method::ExactMatching: return exact_matching_att(dataset, spec.matching);
        case Method::RegressionAdjustment: return regression_att(dataset, spec.regression);
        case Method::Iptw: return iptw_att(dataset, spec.iptw);
    }
    throw Error(ErrorKind::InvalidConfig, "unknown method");
}

}  // namespace wsc
