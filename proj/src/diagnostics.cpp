#include "wsc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "wsc/csv.hpp"
#include "wsc/error.hpp"
#include "wsc/parallel.hpp"
#include "wsc/rng.hpp"

namespace wsc {

double asmd(std::span<const double> values_a, std::span<const double> values_b,
            std::optional<std::span<const double>> weights_b) {
    if (values_a.empty() || values_b.empty()) {
        throw Error(ErrorKind::EmptyGroup, "balance needs both groups non-empty");
    }
    const double mean_a = mean(values_a);
    const double mean_b = weights_b ? weighted_mean(values_b, *weights_b) : mean(values_b);
    const double diff = std::abs(mean_a - mean_b);
    const double pooled = std::sqrt((sample_variance(values_a) + sample_variance(values_b)) / 2.0);
    if (pooled == 0.0) {
        return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return diff / pooled;
}

BalanceReport balance_report(const StudyDataset& dataset, std::span<const double> tu_weights) {
    const GroupView te(dataset, Group::TreatmentExposed);
    const GroupView tu(dataset, Group::TreatmentUnexposed);
    if (te.empty() || tu.empty()) {
        throw Error(ErrorKind::EmptyGroup, "balance needs exposed and unexposed units");
    }
    if (tu_weights.size() != tu.size()) {
        throw Error(ErrorKind::ShapeMismatch, "expected " + std::to_string(tu.size()) +
                                                  " unexposed weights, got " +
                                                  std::to_string(tu_weights.size()));
    }
    BalanceReport report;
    const auto& names = dataset.schema().names();
    std::vector<double> a(te.size());
    std::vector<double> b(tu.size());
    for (std::size_t j = 0; j < names.size(); ++j) {
        for (std::size_t k = 0; k < te.size(); ++k) a[k] = te.x(k)[j];
        for (std::size_t k = 0; k < tu.size(); ++k) b[k] = tu.x(k)[j];
        BalanceRow row;
        row.covariate = names[j];
        row.asmd_unweighted = asmd(a, b);
        row.asmd_weighted = asmd(a, b, tu_weights);
        row.pass = row.asmd_weighted < report.threshold;
        report.rows.push_back(std::move(row));
    }
    return report;
}

void write_balance_csv(std::ostream& out, const BalanceReport& report) {
    std::string buf = "covariate,asmd_unweighted,asmd_weighted,pass\n";
    for (const auto& row : report.rows) {
        buf += row.covariate + ',' + format_double(row.asmd_unweighted) + ',' +
               format_double(row.asmd_weighted) + ',' + (row.pass ? "true" : "false") + '\n';
    }
    out << buf;
}

void BootstrapConfig::validate() const {
    if (replicates < 1) throw Error(ErrorKind::InvalidConfig, "bootstrap needs B >= 1");
    if (!(level > 0.0 && level < 1.0)) {
        throw Error(ErrorKind::InvalidConfig, "confidence level must lie in (0, 1)");
    }
}

std::vector<double> BootstrapReplicates::successes() const {
    std::vector<double> out;
    out.reserve(estimates.size() - failed);
    for (const auto& e : estimates) {
        if (e) out.push_back(*e);
    }
    return out;
}

BootstrapReplicates bootstrap_replicates(const StudyDataset& dataset, const EstimatorSpec& estimator,
                                         const BootstrapConfig& cfg, std::size_t workers) {
    cfg.validate();
    const std::size_t n = dataset.size();
    BootstrapReplicates reps;
    reps.estimates.resize(cfg.replicates);
    parallel_for(cfg.replicates, workers, [&](std::size_t begin, std::size_t end) {
        std::vector<std::size_t> rows(n);
        for (std::size_t r = begin; r < end; ++r) {
            Rng rng = Rng::substream(cfg.seed, Stream::Bootstrap, r);
            for (auto& row : rows) row = rng.below(n);
            try {
                reps.estimates[r] = run_estimator(dataset.resample(rows), estimator).point;
            } catch (const Error&) {
                reps.estimates[r].reset();
            }
        }
    });
    reps.failed = static_cast<std::size_t>(
        std::count_if(reps.estimates.begin(), reps.estimates.end(), [](const auto& e) { return !e; }));
    return reps;
}

void attach_interval(AttEstimate& estimate, const BootstrapReplicates& reps,
                     const BootstrapConfig& cfg) {
    cfg.validate();
    const std::size_t b = reps.estimates.size();
    if (static_cast<double>(reps.failed) > 0.1 * static_cast<double>(b) || reps.failed == b) {
        throw Error(ErrorKind::TooManyFailedReplicates,
                    std::to_string(reps.failed) + " of " + std::to_string(b) + " replicates failed");
    }
    std::vector<double> values = reps.successes();
    std::sort(values.begin(), values.end());
    const double alpha = 1.0 - cfg.level;
    estimate.ci_low = quantile_sorted(values, alpha / 2.0);
    estimate.ci_high = quantile_sorted(values, 1.0 - alpha / 2.0);

    double m = 0.0;
    for (double v : values) m += v;
    m /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    const double se = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;

    estimate.diagnostics["bootstrap_replicates"] = static_cast<double>(b);
    estimate.diagnostics["bootstrap_failed"] = static_cast<double>(reps.failed);
    estimate.diagnostics["bootstrap_level"] = cfg.level;
    estimate.diagnostics["bootstrap_se"] = se;
}

AttEstimate bootstrap_ci(const StudyDataset& dataset, const EstimatorSpec& estimator,
                         const BootstrapConfig& cfg, std::size_t workers) {
    cfg.validate();
    AttEstimate estimate = run_estimator(dataset, estimator);
    const BootstrapReplicates reps = bootstrap_replicates(dataset, estimator, cfg, workers);
    attach_interval(estimate, reps, cfg);
    return estimate;
}

AttEstimate bootstrap_ci(const StudyDataset& dataset, const EstimatorSpec& estimator,
                         const BootstrapConfig& cfg) {
    return bootstrap_ci(dataset, estimator, cfg, worker_count());
}

}  // namespace wsc
