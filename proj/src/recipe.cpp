#include "snls/recipe.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "snls/errors.hpp"

namespace snls {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + " must be an object");
    for (const auto& [key, _] : obj.items())
        if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

const json& require(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) throw ConfigError("missing key '" + key + "' in " + where);
    return obj.at(key);
}

template <typename T>
T as(const json& value, const std::string& key) {
    try {
        return value.get<T>();
    } catch (const json::exception&) {
        throw ConfigError("key '" + key + "' has the wrong type");
    }
}

double as_number(const json& value, const std::string& key) {
    if (!value.is_number()) throw ConfigError("key '" + key + "' must be a number");
    return value.get<double>();
}

std::size_t as_count(const json& value, const std::string& key) {
    if (!value.is_number_integer() || value.get<std::int64_t>() < 0) throw ConfigError("key '" + key + "' must be a non-negative integer");
    return value.get<std::size_t>();
}

template <typename T>
void optional_number(const json& obj, const char* key, T& target) {
    if (!obj.contains(key)) return;
    if constexpr (std::is_same_v<T, double>) {
        target = as_number(obj.at(key), key);
    } else if constexpr (std::is_same_v<T, int>) {
        if (!obj.at(key).is_number_integer()) throw ConfigError(std::string("key '") + key + "' must be an integer");
        target = obj.at(key).get<int>();
    } else {
        target = static_cast<T>(as_count(obj.at(key), key));
    }
}

// Non-finite limits are written as null so the echo stays valid JSON.
json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::Single: return "single";
        case ExperimentKind::Ensemble: return "ensemble";
        case ExperimentKind::RateFit: return "rate-fit";
        case ExperimentKind::Table: return "table";
    }
    return "single";
}

ExperimentKind experiment_kind_from_string(const std::string& name) {
    if (name == "single") return ExperimentKind::Single;
    if (name == "ensemble") return ExperimentKind::Ensemble;
    if (name == "rate-fit") return ExperimentKind::RateFit;
    if (name == "table") return ExperimentKind::Table;
    throw ConfigError("unknown experiment '" + name + "' (expected single, ensemble, rate-fit or table)");
}

Recipe recipe_from_json(const json& doc) {
    reject_unknown(doc,
                   {"experiment", "sigma", "initial", "half_length", "dx", "dt0", "t_end", "noise", "scheme",
                    "refinement", "L_stop", "trials", "output", "solver", "fit", "stride", "snapshot_times"},
                   "recipe");
    Recipe r;
    RunConfig& c = r.run;
    r.kind = experiment_kind_from_string(as<std::string>(require(doc, "experiment", "recipe"), "experiment"));

    const json& sigma = require(doc, "sigma", "recipe");
    if (!sigma.is_number_integer()) throw ConfigError("key 'sigma' must be an integer");
    c.sigma = sigma.get<int>();

    const json& initial = require(doc, "initial", "recipe");
    reject_unknown(initial, {"shape", "amplitude"}, "initial");
    c.initial.shape = initial_shape_from_string(as<std::string>(require(initial, "shape", "initial"), "shape"));
    c.initial.amplitude = as_number(require(initial, "amplitude", "initial"), "amplitude");

    c.half_length = as_number(require(doc, "half_length", "recipe"), "half_length");
    c.dx = as_number(require(doc, "dx", "recipe"), "dx");
    c.dt0 = as_number(require(doc, "dt0", "recipe"), "dt0");
    c.t_end = as_number(require(doc, "t_end", "recipe"), "t_end");
    c.L_stop = as_number(require(doc, "L_stop", "recipe"), "L_stop");
    c.scheme = scheme_from_string(as<std::string>(require(doc, "scheme", "recipe"), "scheme"));

    const json& noise = require(doc, "noise", "recipe");
    reject_unknown(noise, {"kind", "eps", "seed"}, "noise");
    c.noise = noise_kind_from_string(as<std::string>(require(noise, "kind", "noise"), "kind"));
    c.eps = as_number(require(noise, "eps", "noise"), "eps");
    const json& seed = require(noise, "seed", "noise");
    if (!seed.is_number_integer() || (!seed.is_number_unsigned() && seed.get<std::int64_t>() < 0)) throw ConfigError("key 'seed' must be a non-negative integer");
    c.seed = seed.get<std::uint64_t>();

    const json& refinement = require(doc, "refinement", "recipe");
    reject_unknown(refinement, {"enabled", "tol1", "tol2", "min_spacing_ratio"}, "refinement");
    c.refinement = as<bool>(require(refinement, "enabled", "refinement"), "enabled");
    c.tol1 = as_number(require(refinement, "tol1", "refinement"), "tol1");
    c.tol2 = as_number(require(refinement, "tol2", "refinement"), "tol2");
    optional_number(refinement, "min_spacing_ratio", c.min_spacing_ratio);

    if (doc.contains("trials")) r.trials = as_count(doc.at("trials"), "trials");
    if (doc.contains("output")) r.output = as<std::string>(doc.at("output"), "output");
    optional_number(doc, "stride", c.stride);
    if (doc.contains("snapshot_times")) c.snapshot_times = as<std::vector<double>>(doc.at("snapshot_times"), "snapshot_times");

    if (doc.contains("solver")) {
        const json& s = doc.at("solver");
        reject_unknown(s,
                       {"le_bootstrap", "boundary", "adaptive_dt", "dt_floor", "fp_tol", "fp_max_iter", "point_cap"},
                       "solver");
        if (s.contains("le_bootstrap")) c.le_bootstrap = scheme_from_string(as<std::string>(s.at("le_bootstrap"), "le_bootstrap"));
        if (s.contains("boundary")) c.boundary = boundary_mode_from_string(as<std::string>(s.at("boundary"), "boundary"));
        if (s.contains("adaptive_dt")) c.adaptive_dt = as<bool>(s.at("adaptive_dt"), "adaptive_dt");
        optional_number(s, "dt_floor", c.dt_floor);
        optional_number(s, "fp_tol", c.fp_tol);
        optional_number(s, "fp_max_iter", c.fp_max_iter);
        optional_number(s, "point_cap", c.point_cap);
    }
    if (doc.contains("fit")) {
        const json& f = doc.at("fit");
        reject_unknown(f, {"L_min", "L_max", "min_samples", "min_decades"}, "fit");
        if (f.contains("L_min") && !f.at("L_min").is_null()) r.fit.L_min = as_number(f.at("L_min"), "L_min");
        if (f.contains("L_max") && !f.at("L_max").is_null()) r.fit.L_max = as_number(f.at("L_max"), "L_max");
        optional_number(f, "min_samples", r.fit.min_samples);
        optional_number(f, "min_decades", r.fit.min_decades);
    }
    if (r.trials < 1) throw ConfigError("trials must be at least 1");
    c.validate();
    return r;
}

Recipe load_recipe(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open recipe '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("recipe '" + path + "' is not valid JSON: " + e.what());
    }
    return recipe_from_json(doc);
}

json recipe_to_json(const Recipe& r) {
    const RunConfig& c = r.run;
    json doc;
    doc["experiment"] = to_string(r.kind);
    doc["sigma"] = c.sigma;
    doc["initial"] = {{"shape", to_string(c.initial.shape)}, {"amplitude", c.initial.amplitude}};
    doc["half_length"] = c.half_length;
    doc["dx"] = c.dx;
    doc["dt0"] = c.dt0;
    doc["t_end"] = c.t_end;
    doc["L_stop"] = c.L_stop;
    doc["scheme"] = to_string(c.scheme);
    doc["noise"] = {{"kind", to_string(c.noise)}, {"eps", c.eps}, {"seed", c.seed}};
    doc["refinement"] = {{"enabled", c.refinement},
                         {"tol1", c.tol1},
                         {"tol2", c.tol2},
                         {"min_spacing_ratio", c.min_spacing_ratio}};
    doc["trials"] = r.trials;
    doc["output"] = r.output;
    doc["stride"] = c.stride;
    doc["snapshot_times"] = c.snapshot_times;
    doc["solver"] = {{"le_bootstrap", to_string(c.le_bootstrap)},
                     {"boundary", to_string(c.boundary)},
                     {"adaptive_dt", c.adaptive_dt},
                     {"dt_floor", c.dt_floor},
                     {"fp_tol", c.fp_tol},
                     {"fp_max_iter", c.fp_max_iter},
                     {"point_cap", c.point_cap}};
    doc["fit"] = {{"L_min", finite_or_null(r.fit.L_min)},
                  {"L_max", finite_or_null(r.fit.L_max)},
                  {"min_samples", r.fit.min_samples},
                  {"min_decades", r.fit.min_decades}};
    return doc;
}

}  // namespace snls
