#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wsc/data_model.hpp"
#include "wsc/numeric.hpp"

namespace wsc {

enum class Method { Experimental, Digm, ExactMatching, RegressionAdjustment, Iptw };

// CLI names: experimental, digm, match, regression, iptw.
std::string_view to_string(Method method) noexcept;
Method parse_method(std::string_view name);
inline constexpr Method kAllMethods[] = {Method::Experimental, Method::Digm, Method::ExactMatching,
                                         Method::RegressionAdjustment, Method::Iptw};

struct AttEstimate {
    Method method = Method::Experimental;
    double point = 0.0;
    std::optional<double> ci_low;
    std::optional<double> ci_high;
    std::size_t n_used_te = 0;
    std::size_t n_used_tu = 0;
    // Method-specific numbers (flags as 0/1), ordered by key.
    std::map<std::string, double> diagnostics;
};

struct MatchingConfig {
    // Empty: the schema's matching subset.
    std::vector<std::string> covariates;
};

struct RegressionConfig {
    // Empty: every schema covariate.
    std::vector<std::string> covariates;
    // Regress on no covariates at all (intercept-only model).
    bool intercept_only = false;
};

struct IptwConfig {
    double trim_low_q = 0.01;
    double trim_high_q = 0.99;
    // Empty: every schema covariate.
    std::vector<std::string> covariates;

    void validate() const;
};

AttEstimate experimental_att(const StudyDataset& dataset);
AttEstimate digm_att(const StudyDataset& dataset);
AttEstimate exact_matching_att(const StudyDataset& dataset, const MatchingConfig& cfg = {});
AttEstimate regression_att(const StudyDataset& dataset, const RegressionConfig& cfg = {});
AttEstimate iptw_att(const StudyDataset& dataset, const IptwConfig& cfg = {});

// TU-group weights e/(1-e), winsorized to the configured quantiles of their
// own distribution, in TU record order.
struct IptwWeights {
    std::vector<double> tu_weights;
    double trim_low = 0.0;
    double trim_high = 0.0;
    std::size_t n_clamped_low = 0;
    std::size_t n_clamped_high = 0;
};

IptwWeights trimmed_odds_weights(std::span<const double> tu_propensities, const IptwConfig& cfg);

// Propensity model fitted on the treatment group (w ~ covariates).
struct PropensityFit {
    LogisticModel model;
    std::vector<double> tu_propensities;  // TU record order
    IptwWeights weights;
};

PropensityFit fit_propensity(const StudyDataset& dataset, const IptwConfig& cfg);

// IPTW estimate from externally supplied TU propensities (TU record order).
AttEstimate iptw_att_from_propensities(const StudyDataset& dataset,
                                       std::span<const double> tu_propensities,
                                       const IptwConfig& cfg = {});

// An estimator together with its configuration.
struct EstimatorSpec {
    Method method = Method::Experimental;
    MatchingConfig matching;
    RegressionConfig regression;
    IptwConfig iptw;
};

AttEstimate run_estimator(const StudyDataset& dataset, const EstimatorSpec& spec);

}  // namespace wsc
