#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace wsc::cli {

inline constexpr const char* kToolName = "wsc";
inline constexpr const char* kToolVersion = "0.1.0";

// Stable exit-code contract.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitEstimation = 3;

struct SimulateOptions {
    std::string scenario;
    std::uint64_t seed = 0;
    std::string out;
};

struct EstimateOptions {
    std::string dataset;
    // Empty: all five methods.
    std::vector<std::string> methods;
    std::size_t bootstrap = 0;
    std::uint64_t seed = 0;
    double level = 0.95;
    double trim_low = 0.01;
    double trim_high = 0.99;
    std::vector<std::string> match_covariates;
    std::string out;
};

struct BalanceOptions {
    std::string dataset;
    double trim_low = 0.01;
    double trim_high = 0.99;
    std::string out;
};

struct CompareOptions {
    std::string results;
    std::optional<std::string> truth;
    std::string out;
};

// Each command writes its outputs plus `<out>.manifest.json` recording the
// invocation, and reports problems on `err`. Returns the exit code.
int cmd_simulate(const SimulateOptions& opts, std::ostream& err);
int cmd_estimate(const EstimateOptions& opts, std::ostream& err);
int cmd_balance(const BalanceOptions& opts, std::ostream& err);
int cmd_compare(const CompareOptions& opts, std::ostream& err);

std::string manifest_path(const std::string& out);
std::string truth_path(const std::string& out);

}  // namespace wsc::cli
