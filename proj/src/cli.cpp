#include "wsc/cli.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "wsc/csv.hpp"
#include "wsc/diagnostics.hpp"
#include "wsc/error.hpp"
#include "wsc/estimators.hpp"
#include "wsc/parallel.hpp"
#include "wsc/scenario.hpp"
#include "wsc/scenario_io.hpp"

namespace wsc::cli {

namespace {

using nlohmann::json;

json manifest_base(const std::string& command) {
    return json{{"tool", kToolName}, {"version", kToolVersion}, {"command", command}};
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot write '" + path + "'");
    out << text;
    if (!out) throw Error(ErrorKind::IoError, "write to '" + path + "' failed");
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

void write_json(const std::string& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json estimate_to_json(const AttEstimate& e) {
    json diag = json::object();
    for (const auto& [key, value] : e.diagnostics) diag[key] = value;
    return json{{"method", std::string(to_string(e.method))},
                {"point", e.point},
                {"ci_low", optional_number(e.ci_low)},
                {"ci_high", optional_number(e.ci_high)},
                {"n_used_te", e.n_used_te},
                {"n_used_tu", e.n_used_tu},
                {"diagnostics", std::move(diag)}};
}

json failure_to_json(Method method, const Error& error) {
    return json{{"method", std::string(to_string(method))},
                {"error", {{"kind", std::string(to_string(error.kind()))}, {"message", error.what()}}}};
}

std::string csv_number(const json& v) {
    return v.is_number() ? format_double(v.get<double>()) : std::string();
}

int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

}  // namespace

std::string manifest_path(const std::string& out) { return out + ".manifest.json"; }
std::string truth_path(const std::string& out) { return out + ".truth.json"; }

int cmd_simulate(const SimulateOptions& opts, std::ostream& err) {
    try {
        const ScenarioSpec spec = load_scenario(opts.scenario);
        const GeneratedStudy study = generate(spec, opts.seed);
        save_dataset_csv(opts.out, study.dataset);
        write_json(truth_path(opts.out), json{{"att", study.truth.att},
                                              {"att_mc_se", study.truth.att_mc_se},
                                              {"realized_optout_rate", study.truth.realized_optout_rate},
                                              {"seed", opts.seed}});
        json manifest = manifest_base("simulate");
        manifest["scenario"] = opts.scenario;
        manifest["seed"] = opts.seed;
        manifest["outputs"] = {opts.out, truth_path(opts.out)};
        manifest["calibrated_g0"] = study.g0_used;
        write_json(manifest_path(opts.out), manifest);
        return kExitOk;
    } catch (const Error& e) {
        err << "simulate: " << e.what() << '\n';
        return kExitInput;
    }
}

int cmd_estimate(const EstimateOptions& opts, std::ostream& err) {
    std::vector<Method> methods;
    EstimatorSpec base;
    BootstrapConfig boot;
    std::optional<StudyDataset> dataset;
    try {
        if (opts.methods.empty()) {
            methods.assign(std::begin(kAllMethods), std::end(kAllMethods));
        } else {
            for (const auto& m : opts.methods) methods.push_back(parse_method(m));
        }
        base.iptw.trim_low_q = opts.trim_low;
        base.iptw.trim_high_q = opts.trim_high;
        base.iptw.validate();
        base.matching.covariates = opts.match_covariates;
        boot.replicates = opts.bootstrap;
        boot.level = opts.level;
        boot.seed = opts.seed;
        if (opts.bootstrap > 0) boot.validate();

        CsvLoadOptions load;
        if (!opts.match_covariates.empty()) load.matching_subset = opts.match_covariates;
        dataset.emplace(load_dataset_csv(opts.dataset, load));
    } catch (const Error& e) {
        err << "estimate: " << e.what() << '\n';
        return kExitInput;
    }

    json results = json::array();
    std::size_t failures = 0;
    const std::size_t workers = worker_count();
    for (Method m : methods) {
        EstimatorSpec spec = base;
        spec.method = m;
        try {
            const AttEstimate e = opts.bootstrap > 0 ? bootstrap_ci(*dataset, spec, boot, workers)
                                                     : run_estimator(*dataset, spec);
            results.push_back(estimate_to_json(e));
        } catch (const Error& e) {
            ++failures;
            err << "estimate: " << to_string(m) << ": " << e.what() << '\n';
            results.push_back(failure_to_json(m, e));
        }
    }

    try {
        write_json(opts.out, results);
        json manifest = manifest_base("estimate");
        manifest["dataset"] = opts.dataset;
        json method_names = json::array();
        for (Method m : methods) method_names.push_back(std::string(to_string(m)));
        manifest["methods"] = std::move(method_names);
        manifest["seed"] = opts.seed;
        manifest["bootstrap"] = {{"replicates", opts.bootstrap}, {"level", opts.level}};
        manifest["trim"] = {opts.trim_low, opts.trim_high};
        manifest["match_covariates"] = dataset->schema().matching_subset();
        manifest["outputs"] = {opts.out};
        write_json(manifest_path(opts.out), manifest);
    } catch (const Error& e) {
        err << "estimate: " << e.what() << '\n';
        return kExitInput;
    }
    return failures == methods.size() ? kExitEstimation : kExitOk;
}

int cmd_balance(const BalanceOptions& opts, std::ostream& err) {
    IptwConfig cfg;
    std::optional<StudyDataset> dataset;
    try {
        cfg.trim_low_q = opts.trim_low;
        cfg.trim_high_q = opts.trim_high;
        cfg.validate();
        dataset.emplace(load_dataset_csv(opts.dataset));
    } catch (const Error& e) {
        err << "balance: " << e.what() << '\n';
        return kExitInput;
    }
    BalanceReport report;
    try {
        const PropensityFit fit = fit_propensity(*dataset, cfg);
        report = balance_report(*dataset, fit.weights.tu_weights);
    } catch (const Error& e) {
        err << "balance: " << e.what() << '\n';
        return kExitEstimation;
    }
    try {
        std::ostringstream csv;
        write_balance_csv(csv, report);
        write_text(opts.out, csv.str());
        json manifest = manifest_base("balance");
        manifest["dataset"] = opts.dataset;
        manifest["trim"] = {opts.trim_low, opts.trim_high};
        manifest["threshold"] = report.threshold;
        manifest["outputs"] = {opts.out};
        write_json(manifest_path(opts.out), manifest);
    } catch (const Error& e) {
        err << "balance: " << e.what() << '\n';
        return kExitInput;
    }
    return kExitOk;
}

int cmd_compare(const CompareOptions& opts, std::ostream& err) {
    try {
        json results;
        try {
            results = json::parse(read_text(opts.results));
        } catch (const json::parse_error& e) {
            throw Error(ErrorKind::ParseError, std::string("results are not valid JSON: ") + e.what());
        }
        if (!results.is_array() || results.empty()) {
            throw Error(ErrorKind::ParseError, "results must be a non-empty JSON array");
        }
        std::optional<double> truth;
        if (opts.truth) {
            json t;
            try {
                t = json::parse(read_text(*opts.truth));
            } catch (const json::parse_error& e) {
                throw Error(ErrorKind::ParseError, std::string("truth is not valid JSON: ") + e.what());
            }
            if (!t.is_object() || !t.contains("att") || !t["att"].is_number()) {
                throw Error(ErrorKind::ParseError, "truth file needs a numeric 'att'");
            }
            truth = t["att"].get<double>();
        }

        std::optional<double> experimental;
        for (const auto& r : results) {
            if (!r.is_object() || !r.contains("method") || !r["method"].is_string()) {
                throw Error(ErrorKind::ParseError, "every result needs a 'method' string");
            }
            if (!r.contains("error") && (!r.contains("point") || !r["point"].is_number())) {
                throw Error(ErrorKind::ParseError, "result '" + r["method"].get<std::string>() +
                                                       "' has neither 'point' nor 'error'");
            }
            if (r["method"] == "experimental" && r.contains("point") && r["point"].is_number()) {
                experimental = r["point"].get<double>();
            }
        }

        std::string csv = "method,estimate,ci_low,ci_high,sign,sign_agrees,error_vs_truth,covered,failure\n";
        for (const auto& r : results) {
            const std::string method = r["method"].get<std::string>();
            if (r.contains("error")) {
                const json& e = r["error"];
                const std::string kind =
                    e.is_object() && e.contains("kind") && e["kind"].is_string() ? e["kind"].get<std::string>()
                                                                                 : "unknown";
                csv += method + ",,,,,,,," + kind + '\n';
                continue;
            }
            const double point = r["point"].get<double>();
            const json lo = r.value("ci_low", json(nullptr));
            const json hi = r.value("ci_high", json(nullptr));
            csv += method + ',' + format_double(point) + ',' + csv_number(lo) + ',' + csv_number(hi) +
                   ',' + std::to_string(sign_of(point)) + ',';
            if (experimental) csv += sign_of(point) == sign_of(*experimental) ? "true" : "false";
            csv += ',';
            if (truth) csv += format_double(point - *truth);
            csv += ',';
            if (truth && lo.is_number() && hi.is_number()) {
                csv += lo.get<double>() <= *truth && *truth <= hi.get<double>() ? "true" : "false";
            }
            csv += ",\n";
        }
        write_text(opts.out, csv);
        json manifest = manifest_base("compare");
        manifest["results"] = opts.results;
        manifest["truth"] = opts.truth ? json(*opts.truth) : json(nullptr);
        manifest["outputs"] = {opts.out};
        write_json(manifest_path(opts.out), manifest);
        return kExitOk;
    } catch (const Error& e) {
        err << "compare: " << e.what() << '\n';
        return kExitInput;
    }
}

}  // namespace wsc::cli
