#include "snls/io.hpp"

#include <algorithm>
#include <array>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "snls/errors.hpp"

#ifndef SNLS_VERSION_STRING
#define SNLS_VERSION_STRING "unknown"
#endif

namespace snls {

namespace {

using nlohmann::json;

std::string fmt17(double v) {
    std::array<char, 40> buf{};
    std::snprintf(buf.data(), buf.size(), "%.17g", v);
    return buf.data();
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

json fit_json(const LinearFit& fit) {
    return {{"intercept", number_or_null(fit.intercept)},
            {"slope", number_or_null(fit.slope)},
            {"r2", number_or_null(fit.r2)},
            {"samples", fit.samples}};
}

}  // namespace

std::string version_string() { return SNLS_VERSION_STRING; }

void write_diagnostics_csv(std::ostream& out, const TrajectoryDiagnostics& diag) {
    for (std::size_t k = 0; k < kDiagnosticColumns.size(); ++k) out << (k ? "," : "") << kDiagnosticColumns[k];
    out << '\n';
    for (const auto& r : diag.rows) {
        out << r.step << ',' << fmt17(r.t) << ',' << fmt17(r.dt) << ',' << fmt17(r.m_dis) << ',' << fmt17(r.h_dis)
            << ',' << fmt17(r.m_app) << ',' << fmt17(r.sup_norm) << ',' << fmt17(r.grad_norm) << ','
            << fmt17(r.L) << ',' << fmt17(r.a) << ',' << fmt17(r.tau) << ',' << r.n_points << ','
            << fmt17(r.t_lo) << '\n';
    }
}

void write_diagnostics_csv(const std::filesystem::path& path, const TrajectoryDiagnostics& diag) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    write_diagnostics_csv(out, diag);
}

SeriesTable read_series_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line) || trim(line).empty()) throw ConfigError("'" + path.string() + "' is empty");
    std::vector<std::string> names;
    for (auto& cell : split_csv_line(line)) names.push_back(trim(cell));
    SeriesTable table;
    for (const auto& n : names) {
        if (n.empty()) throw ConfigError("empty column name in '" + path.string() + "'");
        if (!table.emplace(n, std::vector<double>{}).second)
            throw ConfigError("duplicate column '" + n + "' in '" + path.string() + "'");
    }
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != names.size())
            throw ConfigError("row " + std::to_string(line_no) + " of '" + path.string() + "' has " +
                              std::to_string(cells.size()) + " cells, expected " + std::to_string(names.size()));
        for (std::size_t k = 0; k < cells.size(); ++k) {
            const std::string cell = trim(cells[k]);
            char* end = nullptr;
            errno = 0;
            const double v = std::strtod(cell.c_str(), &end);
            if (cell.empty() || end != cell.c_str() + cell.size())
                throw ConfigError("unparsable cell '" + cell + "' at row " + std::to_string(line_no));
            table[names[k]].push_back(v);
        }
    }
    return table;
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
        EVP_MD_CTX_free(ctx);
        throw Error("SHA-256 initialisation failed");
    }
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, digest.data(), &len);
    EVP_MD_CTX_free(ctx);
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << text << '\n';
}

json build_manifest(const std::filesystem::path& dir, const json& run) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const auto rel = std::filesystem::relative(entry.path(), dir);
        if (rel == "manifest.json") continue;
        files.push_back(rel);
    }
    std::sort(files.begin(), files.end());
    json listing = json::array();
    for (const auto& rel : files) {
        listing.push_back({{"path", rel.generic_string()},
                           {"bytes", std::filesystem::file_size(dir / rel)},
                           {"sha256", sha256_file(dir / rel)}});
    }
    json manifest = run;
    manifest["version"] = version_string();
    manifest["files"] = std::move(listing);
    return manifest;
}

json ensemble_summary_json(const EnsembleSummary& s) {
    json trials = json::array();
    for (const auto& t : s.trials) {
        json entry = {{"trial", t.trial},
                      {"outcome", to_string(t.outcome)},
                      {"cause", t.cause},
                      {"end_time", t.end_time},
                      {"steps", t.steps},
                      {"final_points", t.final_points}};
        if (t.outcome == Outcome::Blowup) {
            entry["center"] = t.center;
            entry["center_degenerate"] = t.center_degenerate;
        }
        trials.push_back(std::move(entry));
    }
    std::size_t blowups = 0;
    for (const auto& t : s.trials) blowups += t.outcome == Outcome::Blowup;

    json curves = {{"t", s.grid},
                   {"alive", s.alive},
                   {"mean_mass", json::array()},
                   {"var_mass", json::array()},
                   {"mean_energy", json::array()},
                   {"var_energy", json::array()}};
    for (std::size_t k = 0; k < s.grid.size(); ++k) {
        curves["mean_mass"].push_back(number_or_null(s.mean_mass[k]));
        curves["var_mass"].push_back(number_or_null(s.var_mass[k]));
        curves["mean_energy"].push_back(number_or_null(s.mean_energy[k]));
        curves["var_energy"].push_back(number_or_null(s.var_energy[k]));
    }

    json fits = nullptr;
    try {
        const auto ec = expected_curves(s);
        fits = {{"mean_mass", fit_json(ec.mass_fit)}, {"mean_energy", fit_json(ec.energy_fit)}};
    } catch (const Error& e) {
        fits = {{"refused", e.what()}};
    }

    return {{"trials", s.trials.size()},
            {"blowups", blowups},
            {"aborted", s.aborted},
            {"blowup_fraction", s.blowup_fraction},
            {"centers",
             {{"n", s.centers.n},
              {"mean", number_or_null(s.centers.mean)},
              {"variance", number_or_null(s.centers.variance)},
              {"skewness", number_or_null(s.centers.skewness)},
              {"excess_kurtosis", number_or_null(s.centers.excess_kurtosis)}}},
            {"fits", fits},
            {"curves", curves},
            {"outcomes", trials}};
}

}  // namespace snls
