// wsc: simulate within-study comparison datasets, estimate ATTs with the
// experimental and observational estimators, and tabulate balance and
// comparison results.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wsc/cli.hpp"

namespace {

struct TrimFlag {
    std::vector<double> values{0.01, 0.99};

    void add(CLI::App* cmd) {
        cmd->add_option("--trim", values, "Weight trimming quantiles LOW,HIGH")
            ->delimiter(',')
            ->expected(2)
            ->default_str("0.01,0.99");
    }
};

}  // namespace

int main(int argc, char** argv) {
    using namespace wsc::cli;

    CLI::App app{"Within-study comparison toolkit: experimental vs observational ATT estimates"};
    app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);
    app.require_subcommand(1);

    SimulateOptions sim;
    auto* simulate = app.add_subcommand("simulate", "Generate a dataset and its ground truth from a scenario");
    simulate->add_option("scenario", sim.scenario, "Scenario JSON file")->required();
    simulate->add_option("--seed", sim.seed, "Master seed")->default_val(0);
    simulate->add_option("--out", sim.out, "Dataset CSV to write")->required();

    EstimateOptions est;
    TrimFlag est_trim;
    auto* estimate = app.add_subcommand("estimate", "Run ATT estimators on a dataset");
    estimate->add_option("dataset", est.dataset, "Dataset CSV")->required();
    estimate->add_option("--methods", est.methods, "Comma list of experimental,digm,match,regression,iptw")
        ->delimiter(',');
    estimate->add_option("--bootstrap", est.bootstrap, "Bootstrap replicates (0 disables intervals)")
        ->default_val(0);
    estimate->add_option("--seed", est.seed, "Bootstrap master seed")->default_val(0);
    estimate->add_option("--level", est.level, "Confidence level")->default_val(0.95);
    est_trim.add(estimate);
    estimate->add_option("--match-covariates", est.match_covariates, "Comma list of binary covariates")
        ->delimiter(',');
    estimate->add_option("--out", est.out, "Results JSON to write")->required();

    BalanceOptions bal;
    TrimFlag bal_trim;
    auto* balance = app.add_subcommand("balance", "Covariate balance before and after IPTW weighting");
    balance->add_option("dataset", bal.dataset, "Dataset CSV")->required();
    bal_trim.add(balance);
    balance->add_option("--out", bal.out, "Balance CSV to write")->required();

    CompareOptions cmp;
    std::string truth;
    auto* compare = app.add_subcommand("compare", "Tabulate estimates against each other and the truth");
    compare->add_option("results", cmp.results, "Results JSON from `estimate`")->required();
    compare->add_option("truth", truth, "Ground-truth JSON from `simulate`");
    compare->add_option("--out", cmp.out, "Comparison CSV to write")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    if (simulate->parsed()) return cmd_simulate(sim, std::cerr);
    if (estimate->parsed()) {
        est.trim_low = est_trim.values.at(0);
        est.trim_high = est_trim.values.at(1);
        return cmd_estimate(est, std::cerr);
    }
    if (balance->parsed()) {
        bal.trim_low = bal_trim.values.at(0);
        bal.trim_high = bal_trim.values.at(1);
        return cmd_balance(bal, std::cerr);
    }
    if (!truth.empty()) cmp.truth = truth;
    return cmd_compare(cmp, std::cerr);
}
