#include "wsc/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "wsc/error.hpp"
#include "wsc/numeric.hpp"
#include "wsc/parallel.hpp"

namespace wsc {

namespace {

constexpr double kCalibrationLow = -20.0;
constexpr double kCalibrationHigh = 20.0;
constexpr int kCalibrationSteps = 100;
constexpr double kCalibrationTolerance = 0.005;

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
    throw Error(ErrorKind::InvalidSpec, field + " " + why);
}

void require_finite(const std::string& field, double v) {
    if (!std::isfinite(v)) invalid(field, "must be finite");
}

void require_sd(const std::string& field, double v) {
    require_finite(field, v);
    if (v < 0.0) invalid(field, "must be >= 0, got " + std::to_string(v));
}

void require_coefficients(const std::string& field, const std::vector<double>& v, std::size_t k) {
    if (v.size() != k) {
        invalid(field, "has " + std::to_string(v.size()) + " entries, expected " + std::to_string(k));
    }
    for (std::size_t j = 0; j < v.size(); ++j) require_finite(field + "[" + std::to_string(j) + "]", v[j]);
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
    return s;
}

double g0_for(const ScenarioSpec& spec, std::uint64_t seed) {
    return spec.target_optout_rate ? calibrate_optout(spec, seed) : spec.exposure.g0;
}

}  // namespace

CovariateSchema ScenarioSpec::schema() const {
    std::vector<std::string> names;
    std::vector<CovariateKind> kinds;
    for (const auto& c : covariates) {
        names.push_back(c.name);
        kinds.push_back(c.kind);
    }
    return {std::move(names), std::move(kinds), matching_subset};
}

void validate_spec(const ScenarioSpec& spec) {
    if (spec.n < 1) invalid("n", "must be >= 1");
    require_finite("p_treat", spec.p_treat);
    if (!(spec.p_treat > 0.0 && spec.p_treat < 1.0)) {
        invalid("p_treat", "must lie in (0, 1), got " + std::to_string(spec.p_treat));
    }
    std::set<std::string> names;
    for (std::size_t j = 0; j < spec.covariates.size(); ++j) {
        const auto& c = spec.covariates[j];
        const std::string field = "covariates[" + std::to_string(j) + "]";
        if (c.name.empty()) invalid(field + ".name", "must be non-empty");
        if (!names.insert(c.name).second) invalid(field + ".name", "duplicates '" + c.name + "'");
        switch (c.kind) {
            case CovariateKind::Binary:
                require_finite(field + ".p", c.p);
                if (c.p < 0.0 || c.p > 1.0) invalid(field + ".p", "must lie in [0, 1]");
                break;
            case CovariateKind::Count:
                require_finite(field + ".log_mean", c.log_mean);
                require_sd(field + ".log_sd", c.log_sd);
                break;
            case CovariateKind::Continuous:
                require_finite(field + ".mean", c.mean);
                require_sd(field + ".sd", c.sd);
                break;
        }
    }
    for (const auto& m : spec.matching_subset) {
        auto it = std::find_if(spec.covariates.begin(), spec.covariates.end(),
                               [&](const CovariateLaw& c) { return c.name == m; });
        if (it == spec.covariates.end()) invalid("matching_subset", "names unknown covariate '" + m + "'");
        if (it->kind != CovariateKind::Binary) {
            invalid("matching_subset", "covariate '" + m + "' is not binary");
        }
    }
    const std::size_t k = spec.k();
    require_coefficients("preference.a", spec.preference.a, k);
    require_sd("preference.sd", spec.preference.sd);
    require_finite("exposure_logit.g0", spec.exposure.g0);
    require_coefficients("exposure_logit.g", spec.exposure.g, k);
    require_finite("exposure_logit.g_pref", spec.exposure.g_pref);
    require_finite("outcome_model.b0", spec.outcome.b0);
    require_coefficients("outcome_model.b", spec.outcome.b, k);
    require_finite("outcome_model.b_pref", spec.outcome.b_pref);
    require_sd("outcome_model.noise_sd", spec.outcome.noise_sd);
    require_finite("outcome_model.tau.t0", spec.outcome.tau.t0);
    require_coefficients("outcome_model.tau.t", spec.outcome.tau.t, k);
    require_finite("outcome_model.tau.t_pref", spec.outcome.tau.t_pref);
    require_finite("violate_exclusion", spec.violate_exclusion);
    if (spec.target_optout_rate) {
        const double t = *spec.target_optout_rate;
        if (!(t >= 0.01 && t <= 0.10)) {
            invalid("target_optout_rate", "must lie in [0.01, 0.10], got " + std::to_string(t));
        }
    }
}

SimulatedUnit draw_unit(const ScenarioSpec& spec, Rng& rng) {
    SimulatedUnit u;
    u.x.resize(spec.k());
    for (std::size_t j = 0; j < spec.k(); ++j) {
        const auto& law = spec.covariates[j];
        switch (law.kind) {
            case CovariateKind::Binary: u.x[j] = rng.uniform() < law.p ? 1.0 : 0.0; break;
            case CovariateKind::Count:
                u.x[j] = std::max(0.0, std::round(std::exp(law.log_mean + law.log_sd * rng.normal())));
                break;
            case CovariateKind::Continuous: u.x[j] = law.mean + law.sd * rng.normal(); break;
        }
    }
    u.pref = dot(spec.preference.a, u.x) + spec.preference.sd * rng.normal();
    u.outcome_noise = rng.normal();
    u.exposure_uniform = rng.uniform();
    u.assignment_uniform = rng.uniform();
    return u;
}

double exposure_probability(const ScenarioSpec& spec, double g0, const SimulatedUnit& unit) {
    return sigmoid(g0 + dot(spec.exposure.g, unit.x) + spec.exposure.g_pref * unit.pref);
}

double treatment_effect(const ScenarioSpec& spec, const SimulatedUnit& unit) {
    const auto& tau = spec.outcome.tau;
    return tau.t0 + dot(tau.t, unit.x) + tau.t_pref * unit.pref;
}

double potential_outcome(const ScenarioSpec& spec, const SimulatedUnit& unit, int z, int w) {
    const auto& om = spec.outcome;
    double y = om.b0 + dot(om.b, unit.x) + om.b_pref * unit.pref + om.noise_sd * unit.outcome_noise;
    if (w == 1) y += treatment_effect(spec, unit);
    if (z == 1 && w == 0) y += spec.violate_exclusion;
    return y;
}

GeneratedStudy generate(const ScenarioSpec& spec, std::uint64_t seed) {
    return generate(spec, seed, worker_count());
}

GeneratedStudy generate(const ScenarioSpec& spec, std::uint64_t seed, std::size_t workers) {
    validate_spec(spec);
    const double g0 = g0_for(spec, seed);
    const std::size_t n = spec.n;
    const std::size_t k = spec.k();

    std::vector<std::uint8_t> z(n);
    std::vector<std::uint8_t> w(n);
    std::vector<double> y(n);
    std::vector<double> tau(n);
    Matrix x(n, k);
    parallel_for(n, workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            Rng rng = Rng::substream(seed, Stream::Users, i);
            const SimulatedUnit u = draw_unit(spec, rng);
            const int zi = u.assignment_uniform < spec.p_treat ? 1 : 0;
            const int wi = zi == 1 && u.exposure_uniform < exposure_probability(spec, g0, u) ? 1 : 0;
            z[i] = static_cast<std::uint8_t>(zi);
            w[i] = static_cast<std::uint8_t>(wi);
            y[i] = potential_outcome(spec, u, zi, wi);
            tau[i] = treatment_effect(spec, u);
            std::copy(u.x.begin(), u.x.end(), x.row(i).begin());
        }
    });

    // Finite-sample ATT: noiseless effects averaged over the realized exposed units.
    long double sum = 0.0L;
    std::size_t n_t = 0;
    std::size_t n_te = 0;
    for (std::size_t i = 0; i < n; ++i) {
        n_t += z[i];
        if (w[i] == 1) {
            ++n_te;
            sum += tau[i];
        }
    }
    if (n_te == 0) throw Error(ErrorKind::DegenerateScenario, "no exposed units were generated");
    const auto att = static_cast<double>(sum / static_cast<long double>(n_te));
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (w[i] == 1) ss += (tau[i] - att) * (tau[i] - att);
    }
    GroundTruth truth;
    truth.att = att;
    truth.att_mc_se =
        n_te > 1 ? std::sqrt(ss / static_cast<double>(n_te - 1) / static_cast<double>(n_te)) : 0.0;
    truth.realized_optout_rate = static_cast<double>(n_t - n_te) / static_cast<double>(n_t);

    StudyDataset dataset(spec.schema(), std::move(z), std::move(w), std::move(y), std::move(x));
    return {std::move(dataset), truth, g0};
}

OracleResult oracle_att(const ScenarioSpec& spec, std::uint64_t seed, std::size_t n_mc) {
    validate_spec(spec);
    if (n_mc < 1000) throw Error(ErrorKind::InvalidConfig, "oracle needs n_mc >= 1000");
    const double g0 = g0_for(spec, seed);
    std::vector<double> tau(n_mc);
    std::vector<std::uint8_t> exposed(n_mc);
    parallel_for(n_mc, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            Rng rng = Rng::substream(seed, Stream::Oracle, i);
            const SimulatedUnit u = draw_unit(spec, rng);
            exposed[i] = u.exposure_uniform < exposure_probability(spec, g0, u) ? 1 : 0;
            tau[i] = treatment_effect(spec, u);
        }
    });
    OracleResult r;
    long double sum = 0.0L;
    for (std::size_t i = 0; i < n_mc; ++i) {
        if (exposed[i]) {
            ++r.exposed;
            sum += tau[i];
        }
    }
    if (r.exposed == 0) {
        throw Error(ErrorKind::DegenerateScenario,
                    "no exposed units in " + std::to_string(n_mc) + " oracle draws");
    }
    r.att = static_cast<double>(sum / static_cast<long double>(r.exposed));
    double ss = 0.0;
    for (std::size_t i = 0; i < n_mc; ++i) {
        if (exposed[i]) ss += (tau[i] - r.att) * (tau[i] - r.att);
    }
    const auto m = static_cast<double>(r.exposed);
    r.mc_se = r.exposed > 1 ? std::sqrt(ss / (m - 1.0) / m) : 0.0;
    return r;
}

namespace {

// Part of each probe's linear predictor that does not involve g0.
std::vector<double> probe_offsets(const ScenarioSpec& spec, std::uint64_t seed) {
    std::vector<double> rest(kCalibrationProbes);
    parallel_for(kCalibrationProbes, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            Rng rng = Rng::substream(seed, Stream::CalibrationProbe, i);
            const SimulatedUnit u = draw_unit(spec, rng);
            rest[i] = dot(spec.exposure.g, u.x) + spec.exposure.g_pref * u.pref;
        }
    });
    return rest;
}

double optout_rate(std::span<const double> offsets, double g0) {
    double exposed = 0.0;
    for (double r : offsets) exposed += sigmoid(g0 + r);
    return 1.0 - exposed / static_cast<double>(offsets.size());
}

}  // namespace

double probe_optout_rate(const ScenarioSpec& spec, std::uint64_t seed, double g0) {
    validate_spec(spec);
    return optout_rate(probe_offsets(spec, seed), g0);
}

double calibrate_optout(const ScenarioSpec& spec, std::uint64_t seed) {
    validate_spec(spec);
    if (!spec.target_optout_rate) {
        throw Error(ErrorKind::InvalidSpec, "target_optout_rate is required for calibration");
    }
    const double target = *spec.target_optout_rate;
    const auto offsets = probe_offsets(spec, seed);

    // The opt-out rate decreases monotonically in g0.
    double lo = kCalibrationLow;
    double hi = kCalibrationHigh;
    if (optout_rate(offsets, hi) > target + kCalibrationTolerance ||
        optout_rate(offsets, lo) < target - kCalibrationTolerance) {
        throw Error(ErrorKind::CalibrationFailure,
                    "target opt-out rate unreachable for g0 in [-20, 20]");
    }
    double mid = 0.0;
    double rate = 0.0;
    for (int step = 0; step < kCalibrationSteps; ++step) {
        mid = 0.5 * (lo + hi);
        rate = optout_rate(offsets, mid);
        if (std::abs(rate - target) < 1e-10) break;
        (rate > target ? lo : hi) = mid;
    }
    if (std::abs(rate - target) > kCalibrationTolerance) {
        throw Error(ErrorKind::CalibrationFailure,
                    "bisection ended at opt-out rate " + std::to_string(rate));
    }
    return mid;
}

}  // namespace wsc
