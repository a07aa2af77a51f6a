#pragma once

#include <cstddef>
#include <string>

#include <json.hpp>

#include "snls/experiments.hpp"

namespace snls {

enum class ExperimentKind { Single, Ensemble, RateFit, Table };

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

/// A reproducible experiment description.
///
/// Physical parameters must all appear in the file. Numerical knobs that are
/// absent take the binary's defaults, and every value is written back by
/// recipe_to_json so the echo is complete.
struct Recipe {
    ExperimentKind kind = ExperimentKind::Single;
    RunConfig run;
    std::size_t trials = 1;
    std::string output;        ///< output directory, may be empty
    RateFitOptions fit;        ///< focusing window for rate-fit recipes
};

/// Throws ConfigError on unknown keys, missing physical keys or wrong types.
Recipe recipe_from_json(const nlohmann::json& doc);
Recipe load_recipe(const std::string& path);
nlohmann::json recipe_to_json(const Recipe& recipe);

}  // namespace snls
