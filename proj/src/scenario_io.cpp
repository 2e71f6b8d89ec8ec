#include "wsc/scenario_io.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string_view>

#include <json.hpp>

#include "wsc/error.hpp"

namespace wsc {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& field, const std::string& why) {
    throw Error(ErrorKind::InvalidSpec, field + " " + why);
}

void reject_unknown(const json& obj, const std::string& where,
                    std::initializer_list<std::string_view> allowed) {
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (auto a : allowed) known = known || key == a;
        if (!known) bad(where.empty() ? key : where + "." + key, "is not a recognized field");
    }
}

const json& require_object(const json& j, const std::string& field) {
    if (!j.is_object()) bad(field, "must be an object");
    return j;
}

double number(const json& obj, const std::string& key, const std::string& field, double fallback,
              bool required = false) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        if (required) bad(field, "is required");
        return fallback;
    }
    if (!it->is_number()) bad(field, "must be a number");
    return it->get<double>();
}

std::vector<double> coefficients(const json& obj, const std::string& key, const std::string& field,
                                 const std::vector<std::string>& names) {
    std::vector<double> out(names.size(), 0.0);
    auto it = obj.find(key);
    if (it == obj.end()) return out;
    if (it->is_array()) {
        if (it->size() != names.size()) {
            bad(field, "has " + std::to_string(it->size()) + " entries, expected " +
                           std::to_string(names.size()));
        }
        for (std::size_t j = 0; j < names.size(); ++j) {
            if (!(*it)[j].is_number()) bad(field + "[" + std::to_string(j) + "]", "must be a number");
            out[j] = (*it)[j].get<double>();
        }
        return out;
    }
    if (!it->is_object()) bad(field, "must be an object keyed by covariate name");
    for (const auto& [name, value] : it->items()) {
        auto pos = std::find(names.begin(), names.end(), name);
        if (pos == names.end()) bad(field + "." + name, "names an unknown covariate");
        if (!value.is_number()) bad(field + "." + name, "must be a number");
        out[static_cast<std::size_t>(pos - names.begin())] = value.get<double>();
    }
    return out;
}

json named(const std::vector<double>& values, const std::vector<CovariateLaw>& covariates) {
    json out = json::object();
    for (std::size_t j = 0; j < covariates.size(); ++j) out[covariates[j].name] = values[j];
    return out;
}

}  // namespace

ScenarioSpec parse_scenario(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::InvalidSpec, std::string("document is not valid JSON: ") + e.what());
    }
    require_object(doc, "document");
    reject_unknown(doc, "",
                   {"name", "description", "n", "p_treat", "covariates", "matching_subset",
                    "preference", "exposure_logit", "outcome_model", "violate_exclusion",
                    "target_optout_rate"});

    ScenarioSpec spec;
    if (auto it = doc.find("name"); it != doc.end()) {
        if (!it->is_string()) bad("name", "must be a string");
        spec.name = it->get<std::string>();
    }
    {
        auto it = doc.find("n");
        if (it == doc.end()) bad("n", "is required");
        if (!it->is_number_integer() || it->get<long long>() < 1) bad("n", "must be an integer >= 1");
        spec.n = it->get<std::size_t>();
    }
    spec.p_treat = number(doc, "p_treat", "p_treat", 0.0, true);

    auto covs = doc.find("covariates");
    if (covs == doc.end()) bad("covariates", "is required");
    if (!covs->is_array()) bad("covariates", "must be an array");
    std::vector<std::string> names;
    for (std::size_t j = 0; j < covs->size(); ++j) {
        const std::string field = "covariates[" + std::to_string(j) + "]";
        const json& c = require_object((*covs)[j], field);
        reject_unknown(c, field, {"name", "kind", "p", "log_mean", "log_sd", "mean", "sd"});
        CovariateLaw law;
        if (!c.contains("name") || !c["name"].is_string()) bad(field + ".name", "must be a string");
        law.name = c["name"].get<std::string>();
        if (!c.contains("kind") || !c["kind"].is_string()) bad(field + ".kind", "must be a string");
        const auto kind = c["kind"].get<std::string>();
        if (kind == "binary") {
            law.kind = CovariateKind::Binary;
            law.p = number(c, "p", field + ".p", 0.0, true);
        } else if (kind == "count") {
            law.kind = CovariateKind::Count;
            law.log_mean = number(c, "log_mean", field + ".log_mean", 0.0, true);
            law.log_sd = number(c, "log_sd", field + ".log_sd", 0.0, true);
        } else if (kind == "continuous") {
            law.kind = CovariateKind::Continuous;
            law.mean = number(c, "mean", field + ".mean", 0.0, true);
            law.sd = number(c, "sd", field + ".sd", 0.0, true);
        } else {
            bad(field + ".kind", "must be binary, count or continuous");
        }
        names.push_back(law.name);
        spec.covariates.push_back(std::move(law));
    }

    if (auto it = doc.find("matching_subset"); it != doc.end()) {
        if (!it->is_array()) bad("matching_subset", "must be an array of names");
        for (const auto& m : *it) {
            if (!m.is_string()) bad("matching_subset", "must be an array of names");
            spec.matching_subset.push_back(m.get<std::string>());
        }
    }

    const json empty = json::object();
    const json& pref = doc.contains("preference") ? require_object(doc["preference"], "preference") : empty;
    reject_unknown(pref, "preference", {"a", "sd"});
    spec.preference.a = coefficients(pref, "a", "preference.a", names);
    spec.preference.sd = number(pref, "sd", "preference.sd", 1.0);

    const json& expo =
        doc.contains("exposure_logit") ? require_object(doc["exposure_logit"], "exposure_logit") : empty;
    reject_unknown(expo, "exposure_logit", {"g0", "g", "g_pref"});
    spec.exposure.g0 = number(expo, "g0", "exposure_logit.g0", 0.0);
    spec.exposure.g = coefficients(expo, "g", "exposure_logit.g", names);
    spec.exposure.g_pref = number(expo, "g_pref", "exposure_logit.g_pref", 0.0);

    const json& om =
        doc.contains("outcome_model") ? require_object(doc["outcome_model"], "outcome_model") : empty;
    reject_unknown(om, "outcome_model", {"b0", "b", "b_pref", "noise_sd", "tau"});
    spec.outcome.b0 = number(om, "b0", "outcome_model.b0", 0.0);
    spec.outcome.b = coefficients(om, "b", "outcome_model.b", names);
    spec.outcome.b_pref = number(om, "b_pref", "outcome_model.b_pref", 0.0);
    spec.outcome.noise_sd = number(om, "noise_sd", "outcome_model.noise_sd", 1.0);
    const json& tau = om.contains("tau") ? require_object(om["tau"], "outcome_model.tau") : empty;
    reject_unknown(tau, "outcome_model.tau", {"t0", "t", "t_pref"});
    spec.outcome.tau.t0 = number(tau, "t0", "outcome_model.tau.t0", 0.0);
    spec.outcome.tau.t = coefficients(tau, "t", "outcome_model.tau.t", names);
    spec.outcome.tau.t_pref = number(tau, "t_pref", "outcome_model.tau.t_pref", 0.0);

    spec.violate_exclusion = number(doc, "violate_exclusion", "violate_exclusion", 0.0);
    if (auto it = doc.find("target_optout_rate"); it != doc.end() && !it->is_null()) {
        if (!it->is_number()) bad("target_optout_rate", "must be a number");
        spec.target_optout_rate = it->get<double>();
    }

    validate_spec(spec);
    return spec;
}

ScenarioSpec load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open scenario '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_scenario(text.str());
}

std::string scenario_to_json(const ScenarioSpec& spec) {
    json doc;
    doc["name"] = spec.name;
    doc["n"] = spec.n;
    doc["p_treat"] = spec.p_treat;
    json covs = json::array();
    for (const auto& c : spec.covariates) {
        json entry{{"name", c.name}, {"kind", std::string(to_string(c.kind))}};
        switch (c.kind) {
            case CovariateKind::Binary: entry["p"] = c.p; break;
            case CovariateKind::Count:
                entry["log_mean"] = c.log_mean;
                entry["log_sd"] = c.log_sd;
                break;
            case CovariateKind::Continuous:
                entry["mean"] = c.mean;
                entry["sd"] = c.sd;
                break;
        }
        covs.push_back(std::move(entry));
    }
    doc["covariates"] = std::move(covs);
    doc["matching_subset"] = spec.matching_subset;
    doc["preference"] = {{"a", named(spec.preference.a, spec.covariates)}, {"sd", spec.preference.sd}};
    doc["exposure_logit"] = {{"g0", spec.exposure.g0},
                             {"g", named(spec.exposure.g, spec.covariates)},
                             {"g_pref", spec.exposure.g_pref}};
    doc["outcome_model"] = {{"b0", spec.outcome.b0},
                            {"b", named(spec.outcome.b, spec.covariates)},
                            {"b_pref", spec.outcome.b_pref},
                            {"noise_sd", spec.outcome.noise_sd},
                            {"tau",
                             {{"t0", spec.outcome.tau.t0},
                              {"t", named(spec.outcome.tau.t, spec.covariates)},
                              {"t_pref", spec.outcome.tau.t_pref}}}};
    doc["violate_exclusion"] = spec.violate_exclusion;
    if (spec.target_optout_rate) doc["target_optout_rate"] = *spec.target_optout_rate;
    return doc.dump(2) + "\n";
}

}  // namespace wsc
