#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "snls/experiments.hpp"

namespace snls {

/// Column order of every diagnostics file.
inline const std::vector<std::string> kDiagnosticColumns = {
    "step", "t", "dt", "M_dis", "H_dis", "M_app", "sup_norm", "grad_norm", "L", "a", "tau", "n_points", "t_lo"};

/// Header plus one row per record, doubles at 17 significant digits.
void write_diagnostics_csv(std::ostream& out, const TrajectoryDiagnostics& diag);
void write_diagnostics_csv(const std::filesystem::path& path, const TrajectoryDiagnostics& diag);

/// Numeric CSV keyed by header name. Throws ConfigError on a missing file,
/// an empty file, ragged rows or unparsable cells.
using SeriesTable = std::map<std::string, std::vector<double>>;
SeriesTable read_series_csv(const std::filesystem::path& path);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// Writes text exactly, with a trailing newline.
void write_text(const std::filesystem::path& path, const std::string& text);

/// Manifest listing every regular file in `dir` (except the manifest itself)
/// with its size and hash, together with the run description in `run`.
nlohmann::json build_manifest(const std::filesystem::path& dir, const nlohmann::json& run);

/// Deterministic key/value document for an ensemble; independent of worker count.
nlohmann::json ensemble_summary_json(const EnsembleSummary& summary);

std::string version_string();

}  // namespace snls
