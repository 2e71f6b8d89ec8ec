#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wsc/data_model.hpp"
#include "wsc/estimators.hpp"

namespace wsc {

inline constexpr double kBalanceThreshold = 0.1;

// Absolute standardized mean difference |mean_a - mean_b| / sqrt((var_a + var_b) / 2).
// When weights_b is given, mean_b is the weighted mean; the variances are
// always the unweighted sample variances of the raw groups, so weighted and
// unweighted values share one scale. 0/0 is defined as 0.
double asmd(std::span<const double> values_a, std::span<const double> values_b,
            std::optional<std::span<const double>> weights_b = std::nullopt);

struct BalanceRow {
    std::string covariate;
    double asmd_unweighted = 0.0;
    double asmd_weighted = 0.0;
    bool pass = false;  // asmd_weighted < threshold
};

struct BalanceReport {
    std::vector<BalanceRow> rows;
    double threshold = kBalanceThreshold;
};

// TE versus TU for every schema covariate; tu_weights in TU record order.
BalanceReport balance_report(const StudyDataset& dataset, std::span<const double> tu_weights);

// `covariate,asmd_unweighted,asmd_weighted,pass`
void write_balance_csv(std::ostream& out, const BalanceReport& report);

struct BootstrapConfig {
    std::size_t replicates = 1000;
    double level = 0.95;
    std::uint64_t seed = 0;

    void validate() const;
};

struct BootstrapReplicates {
    // One slot per replicate; empty where the estimator failed on the resample.
    std::vector<std::optional<double>> estimates;
    std::size_t failed = 0;

    std::vector<double> successes() const;
};

// Replicate r resamples n rows with replacement using only (seed, r).
BootstrapReplicates bootstrap_replicates(const StudyDataset& dataset, const EstimatorSpec& estimator,
                                         const BootstrapConfig& cfg, std::size_t workers);

// Percentile interval over the successful replicates around the full-data
// point estimate. Throws TooManyFailedReplicates above 10% failures.
AttEstimate bootstrap_ci(const StudyDataset& dataset, const EstimatorSpec& estimator,
                         const BootstrapConfig& cfg, std::size_t workers);
AttEstimate bootstrap_ci(const StudyDataset& dataset, const EstimatorSpec& estimator,
                         const BootstrapConfig& cfg);

// Attaches a percentile interval from existing replicates to an estimate.
void attach_interval(AttEstimate& estimate, const BootstrapReplicates& reps,
                     const BootstrapConfig& cfg);

}  // namespace wsc
