// snls: run trajectories, ensembles and fits from JSON recipes.
//
//   snls run      --config recipe.json [--seed S] [--out DIR]
//   snls ensemble --config recipe.json [--trials N] [--workers W] [--out DIR]
//   snls fit      --in series.csv --kind {rate,a-correction,supercritical}
//
// Exit codes: 0 completed, 2 blow-up, 1 error or abort.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "snls/errors.hpp"
#include "snls/experiments.hpp"
#include "snls/io.hpp"
#include "snls/recipe.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitCompleted = 0;
constexpr int kExitError = 1;
constexpr int kExitBlowup = 2;

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> stride;
    std::optional<std::string> scheme;
    std::optional<std::string> noise;
    std::optional<double> eps;
    std::string out;
};

void add_overrides(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--seed", o.seed, "Base seed of the noise stream");
    cmd->add_option("--stride", o.stride, "Record diagnostics every K steps");
    cmd->add_option("--scheme", o.scheme, "Time integrator")->check(CLI::IsMember({"mec", "cn", "le"}));
    cmd->add_option("--noise", o.noise, "Noise kind")->check(CLI::IsMember({"det", "add", "mult"}));
    cmd->add_option("--eps", o.eps, "Noise amplitude");
    cmd->add_option("--out", o.out, "Output directory (overrides the recipe)");
}

snls::Recipe load_with_overrides(const std::string& path, const Overrides& o) {
    snls::Recipe r = snls::load_recipe(path);
    if (o.seed) r.run.seed = *o.seed;
    if (o.stride) r.run.stride = *o.stride;
    if (o.scheme) r.run.scheme = snls::scheme_from_string(*o.scheme);
    if (o.noise) r.run.noise = snls::noise_kind_from_string(*o.noise);
    if (o.eps) r.run.eps = *o.eps;
    if (!o.out.empty()) r.output = o.out;
    if (r.output.empty()) r.output = "snls-out";
    r.run.validate();
    return r;
}

// The echo omits the output directory so results do not depend on where they land.
json recipe_echo(const snls::Recipe& r) {
    json doc = snls::recipe_to_json(r);
    doc.erase("output");
    return doc;
}

void finish_manifest(const fs::path& dir, json run) {
    const json manifest = snls::build_manifest(dir, run);
    snls::write_text(dir / "manifest.json", manifest.dump(2));
}

json rate_fit_json(const snls::RateFit& fit) {
    return {{"slope", fit.slope},
            {"intercept", fit.intercept},
            {"residual", fit.residual},
            {"T_est", fit.T_est()},
            {"samples", fit.samples}};
}

int cmd_run(const std::string& config, const Overrides& o) {
    const snls::Recipe r = load_with_overrides(config, o);
    const fs::path dir = r.output;
    fs::create_directories(dir);

    const auto diag = snls::run_trajectory(r.run, 0);
    snls::write_diagnostics_csv(dir / "diagnostics.csv", diag);

    json result = {{"outcome", snls::to_string(diag.outcome)},
                   {"cause", diag.cause},
                   {"end_time", diag.end_time},
                   {"end_time_lo", diag.end_time_lo},
                   {"rows", diag.rows.size()},
                   {"refinements", diag.refinements.size()}};
    if (diag.blew_up()) {
        result["center"] = diag.center;
        result["center_degenerate"] = diag.center_degenerate;
    }
    if (r.kind == snls::ExperimentKind::RateFit) {
        const auto samples = snls::rate_samples(diag, r.run.sigma);
        json fit;
        try {
            fit = rate_fit_json(snls::fit_blowup_rate(samples, r.fit));
        } catch (const snls::FitRefused& e) {
            fit = {{"refused", e.what()}};
        }
        snls::write_text(dir / "fit.json", fit.dump(2));
        result["fit"] = fit;
    }
    finish_manifest(dir, {{"command", "run"}, {"recipe", recipe_echo(r)}, {"seed", r.run.seed}, {"trial", 0},
                          {"result", result}});

    std::cout << result.dump(2) << '\n';
    switch (diag.outcome) {
        case snls::Outcome::Completed: return kExitCompleted;
        case snls::Outcome::Blowup: return kExitBlowup;
        case snls::Outcome::Aborted:
            std::cerr << "snls: run aborted: " << diag.cause << '\n';
            return kExitError;
    }
    return kExitError;
}

std::size_t resolve_workers(std::optional<std::size_t> flag) {
    if (flag) return std::max<std::size_t>(*flag, 1);
    if (const char* env = std::getenv("SNLS_WORKERS")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return v;
        throw snls::ConfigError(std::string("SNLS_WORKERS must be a positive integer, got '") + env + "'");
    }
    return 1;
}

int cmd_ensemble(const std::string& config, const Overrides& o, std::optional<std::size_t> trials,
                 std::optional<std::size_t> workers) {
    snls::Recipe r = load_with_overrides(config, o);
    if (trials) r.trials = *trials;
    if (r.trials < 1) throw snls::ConfigError("--trials must be at least 1");
    const fs::path dir = r.output;
    fs::create_directories(dir / "trials");

    snls::EnsembleOptions opt;
    opt.trials = r.trials;
    opt.workers = resolve_workers(workers);
    opt.keep_trajectories = true;
    const auto summary = snls::run_ensemble(r.run, opt);

    for (std::size_t k = 0; k < summary.trajectories.size(); ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "trial_%05zu.csv", k);
        snls::write_diagnostics_csv(dir / "trials" / name, summary.trajectories[k]);
    }
    json doc = snls::ensemble_summary_json(summary);
    doc["recipe"] = recipe_echo(r);
    doc["seed"] = r.run.seed;
    snls::write_text(dir / "summary.json", doc.dump(2));
    finish_manifest(dir, {{"command", "ensemble"}, {"recipe", recipe_echo(r)}, {"seed", r.run.seed},
                          {"trials", r.trials}});

    std::cout << json{{"trials", doc["trials"]},
                      {"blowups", doc["blowups"]},
                      {"aborted", doc["aborted"]},
                      {"blowup_fraction", doc["blowup_fraction"]},
                      {"centers", doc["centers"]}}
                     .dump(2)
              << '\n';
    return kExitCompleted;
}

const std::vector<double>& column(const snls::SeriesTable& t, const std::string& name) {
    const auto it = t.find(name);
    if (it == t.end()) throw snls::ConfigError("input has no '" + name + "' column");
    return it->second;
}

struct FitArgs {
    std::string in;
    std::string kind;
    std::string out;
    int sigma = 0;
    std::optional<double> a_limit;
    double L_min = 0.0;
    double L_max = std::numeric_limits<double>::infinity();
    std::string window = "tau";
};

json fit_rate(const snls::SeriesTable& t, const FitArgs& a) {
    const auto& ts = column(t, "t");
    const auto& Ls = column(t, "L");
    const std::vector<double>* lo = t.count("t_lo") ? &t.at("t_lo") : nullptr;
    std::vector<snls::RateSample> samples;
    for (std::size_t k = 0; k < ts.size(); ++k) samples.push_back({ts[k], Ls[k], lo ? (*lo)[k] : 0.0});
    snls::RateFitOptions opt;
    opt.L_min = a.L_min;
    opt.L_max = a.L_max;
    return rate_fit_json(snls::fit_blowup_rate(samples, opt));
}

json fit_a(const snls::SeriesTable& t, const FitArgs& a) {
    const auto& tau = column(t, "tau");
    const auto& av = column(t, "a");
    const std::vector<double>* L = t.count("L") ? &t.at("L") : nullptr;
    const auto window = a.window == "focusing" ? snls::AWindow::FocusingDecade : snls::AWindow::TauDecade;
    if (window == snls::AWindow::FocusingDecade && !L) throw snls::ConfigError("--window focusing needs an 'L' column");
    std::vector<snls::TauA> samples;
    for (std::size_t k = 0; k < tau.size(); ++k) samples.push_back({tau[k], av[k], L ? (*L)[k] : 0.0});
    const auto fit = snls::fit_a_correction(samples, window);
    return {{"intercept", fit.fit.intercept},
            {"slope", fit.fit.slope},
            {"r2", fit.fit.r2},
            {"relative_variation", fit.relative_variation},
            {"samples", fit.fit.samples},
            {"window", a.window}};
}

json fit_supercritical(const snls::SeriesTable& t, const FitArgs& a) {
    if (a.sigma <= 0) throw snls::ConfigError("--sigma is required for the supercritical check");
    const auto& ts = column(t, "t");
    const auto& sup = column(t, "sup_norm");
    const std::vector<double>* lo = t.count("t_lo") ? &t.at("t_lo") : nullptr;
    std::vector<snls::RateSample> rs;
    std::vector<snls::SupSample> ss;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        const double tlo = lo ? (*lo)[k] : 0.0;
        rs.push_back({ts[k], std::pow(sup[k], -static_cast<double>(a.sigma)), tlo});
        ss.push_back({ts[k], sup[k], tlo});
    }
    // Without an explicit window, fit the five decades ending at the last
    // sample so T is resolved where r is evaluated.
    snls::RateFitOptions opt;
    opt.L_min = a.L_min;
    opt.L_max = a.L_max;
    if (a.L_min == 0.0 && std::isinf(a.L_max)) {
        opt.L_min = rs.back().L;
        opt.L_max = 1e5 * rs.back().L;
    }
    const auto rate = snls::fit_blowup_rate(rs, opt);

    double a_limit = 0.0;
    if (a.a_limit) {
        a_limit = *a.a_limit;
    } else {
        // a is tracked with the gradient focusing factor; convert to the supnorm one.
        const auto& av = column(t, "a");
        const auto& grad = column(t, "grad_norm");
        const double alpha = 1.0 + 2.0 / a.sigma;
        const double L_sup = rs.back().L;
        const double L_grad = std::pow(grad.back(), -2.0 / alpha);
        a_limit = av.back() * (L_sup / L_grad) * (L_sup / L_grad);
    }
    if (!(a_limit > 0.0)) throw snls::FitRefused("supercritical check needs a positive a limit");

    const double L_last = rs.back().L;
    std::vector<snls::SupSample> tail;
    for (std::size_t k = 0; k < ss.size(); ++k)
        if (rs[k].L <= 10.0 * L_last && ((rate.t_ref - ss[k].t) + (rate.t_ref_lo - ss[k].t_lo)) + rate.delta > 0.0)
            tail.push_back(ss[k]);
    if (tail.empty()) throw snls::FitRefused("supercritical check: no samples in the last decade");
    const auto r = snls::supercritical_rate_check(tail, a_limit, rate, a.sigma);
    const auto [rmin, rmax] = std::minmax_element(r.begin(), r.end());
    return {{"a_limit", a_limit},
            {"T_est", rate.T_est()},
            {"slope", rate.slope},
            {"r_final", r.back()},
            {"r_min", *rmin},
            {"r_max", *rmax},
            {"samples", r.size()}};
}

int cmd_fit(const FitArgs& a) {
    const auto table = snls::read_series_csv(a.in);
    if (table.begin()->second.empty()) throw snls::FitRefused("'" + a.in + "' has no data rows");
    json doc;
    if (a.kind == "rate") doc = fit_rate(table, a);
    else if (a.kind == "a-correction") doc = fit_a(table, a);
    else doc = fit_supercritical(table, a);
    doc["kind"] = a.kind;
    doc["input"] = a.in;
    doc["version"] = snls::version_string();

    fs::path out = a.out;
    if (out.empty()) out = fs::path(a.in).parent_path() / ("fit_" + a.kind + ".json");
    snls::write_text(out, doc.dump(2));
    std::cout << doc.dump(2) << '\n';
    return kExitCompleted;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-difference solver for the 1D focusing stochastic NLS"};
    app.set_version_flag("--version", snls::version_string());
    app.require_subcommand(1);

    std::string config;
    Overrides run_o, ens_o;
    auto* run = app.add_subcommand("run", "Run one trajectory");
    run->add_option("--config", config, "Recipe file")->required()->check(CLI::ExistingFile);
    add_overrides(run, run_o);

    std::optional<std::size_t> trials, workers;
    auto* ens = app.add_subcommand("ensemble", "Run a Monte Carlo ensemble");
    ens->add_option("--config", config, "Recipe file")->required()->check(CLI::ExistingFile);
    ens->add_option("--trials", trials, "Number of trials (overrides the recipe)")->check(CLI::PositiveNumber);
    ens->add_option("--workers", workers, "Worker threads (fallback: SNLS_WORKERS)")->check(CLI::PositiveNumber);
    add_overrides(ens, ens_o);

    FitArgs fa;
    auto* fit = app.add_subcommand("fit", "Fit a recorded series");
    fit->add_option("--in", fa.in, "Series CSV")->required()->check(CLI::ExistingFile);
    fit->add_option("--kind", fa.kind, "Fit kind")
        ->required()
        ->check(CLI::IsMember({"rate", "a-correction", "supercritical"}));
    fit->add_option("--out", fa.out, "Output file (default: fit_<kind>.json beside the input)");
    fit->add_option("--sigma", fa.sigma, "Nonlinearity exponent (supercritical)");
    fit->add_option("--a-limit", fa.a_limit, "Limit of a in supnorm scaling (supercritical)");
    fit->add_option("--L-min", fa.L_min, "Lower end of the focusing window");
    fit->add_option("--L-max", fa.L_max, "Upper end of the focusing window");
    fit->add_option("--window", fa.window, "a-correction window")->check(CLI::IsMember({"tau", "focusing"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitError;
    }

    try {
        if (*run) return cmd_run(config, run_o);
        if (*ens) return cmd_ensemble(config, ens_o, trials, workers);
        return cmd_fit(fa);
    } catch (const std::exception& e) {
        std::cerr << "snls: error: " << e.what() << '\n';
        return kExitError;
    }
}
