#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wsc/data_model.hpp"
#include "wsc/rng.hpp"

namespace wsc {

// Generating law of one covariate. Unused parameters are ignored for a kind:
// binary uses p; count uses log_mean/log_sd (rounded log-normal); continuous
// uses mean/sd (Gaussian).
struct CovariateLaw {
    std::string name;
    CovariateKind kind = CovariateKind::Continuous;
    double p = 0.5;
    double log_mean = 0.0;
    double log_sd = 1.0;
    double mean = 0.0;
    double sd = 1.0;
};

// Latent preference: pref = a'x + sd * N(0, 1). Never observed.
struct PreferenceLaw {
    std::vector<double> a;
    double sd = 1.0;
};

// P(w = 1 | z = 1, x, pref) = sigmoid(g0 + g'x + g_pref * pref).
struct ExposureLogit {
    double g0 = 0.0;
    std::vector<double> g;
    double g_pref = 0.0;
};

// tau(x, pref) = t0 + t'x + t_pref * pref.
struct TreatmentEffect {
    double t0 = 0.0;
    std::vector<double> t;
    double t_pref = 0.0;
};

// Untreated outcome b0 + b'x + b_pref * pref + noise_sd * N(0, 1).
struct OutcomeModel {
    double b0 = 0.0;
    std::vector<double> b;
    double b_pref = 0.0;
    double noise_sd = 1.0;
    TreatmentEffect tau;
};

struct ScenarioSpec {
    std::string name;
    std::size_t n = 1000;
    double p_treat = 0.5;
    std::vector<CovariateLaw> covariates;
    std::vector<std::string> matching_subset;
    PreferenceLaw preference;
    ExposureLogit exposure;
    OutcomeModel outcome;
    // Direct effect on y for assigned units that opt out (z = 1, w = 0).
    double violate_exclusion = 0.0;
    std::optional<double> target_optout_rate;

    std::size_t k() const noexcept { return covariates.size(); }
    CovariateSchema schema() const;
};

// Throws InvalidSpec whose message starts with the offending field's name.
void validate_spec(const ScenarioSpec& spec);

struct GroundTruth {
    double att = 0.0;
    double att_mc_se = 0.0;
    double realized_optout_rate = 0.0;
};

// Every random quantity of one simulated unit. The draw order is fixed and
// independent of the unit's assignment, so potential outcomes under any
// (z, w) share the same noise.
struct SimulatedUnit {
    std::vector<double> x;
    double pref = 0.0;
    double outcome_noise = 0.0;  // standard normal
    double exposure_uniform = 0.0;
    double assignment_uniform = 0.0;
};

SimulatedUnit draw_unit(const ScenarioSpec& spec, Rng& rng);

double exposure_probability(const ScenarioSpec& spec, double g0, const SimulatedUnit& unit);
double treatment_effect(const ScenarioSpec& spec, const SimulatedUnit& unit);
// Y(z, w) for the unit, including noise.
double potential_outcome(const ScenarioSpec& spec, const SimulatedUnit& unit, int z, int w);

struct GeneratedStudy {
    StudyDataset dataset;
    GroundTruth truth;
    double g0_used = 0.0;
};

// Deterministic in (spec, seed) for every worker count.
GeneratedStudy generate(const ScenarioSpec& spec, std::uint64_t seed, std::size_t workers);
GeneratedStudy generate(const ScenarioSpec& spec, std::uint64_t seed);

struct OracleResult {
    double att = 0.0;
    double mc_se = 0.0;
    std::size_t exposed = 0;
};

// Population ATT E[tau | w(1) = 1] from n_mc fresh treatment-assigned units.
OracleResult oracle_att(const ScenarioSpec& spec, std::uint64_t seed, std::size_t n_mc);

inline constexpr std::size_t kCalibrationProbes = 100000;

// Bisection of the exposure intercept over [-20, 20] so that the probe
// population's expected opt-out rate meets spec.target_optout_rate.
double calibrate_optout(const ScenarioSpec& spec, std::uint64_t seed);

// Expected opt-out rate 1 - mean P(w = 1) over the calibration probes.
double probe_optout_rate(const ScenarioSpec& spec, std::uint64_t seed, double g0);

}  // namespace wsc
