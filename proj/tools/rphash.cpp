// Command-line front end: drives the Monte-Carlo experiments, the
// deterministic collision integrals, and the closed-form rate formulas,
// and emits CSV (grids) or JSON (single estimates) artifacts together
// with a run manifest. Output schemas are pinned in docs/format.md.
//
// Exit codes: 0 success, 2 usage, 3 domain/infeasibility, 4 numeric
// tolerance failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rph/rph.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitDomain = 3;
constexpr int kExitTolerance = 4;

struct Timer {
    std::chrono::steady_clock::time_point start =
        std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                             start)
            .count();
    }
};

rph::TupleConfig parse_gram(int k, const std::vector<double>& upper) {
    if (static_cast<int>(upper.size()) != k * (k - 1) / 2)
        throw CLI::ValidationError(
            "--gram", "expected " + std::to_string(k * (k - 1) / 2) +
                          " upper-triangle entries for k = " + std::to_string(k));
    return rph::TupleConfig::from_upper(k, upper);
}

/// Writes `payload` to `<out>` and the manifest to `<out>.manifest.json`,
/// or prints the payload to stdout when no output path was given.
void emit(const std::string& out, const std::string& payload,
          const rph::RunManifest& manifest) {
    if (out.empty()) {
        std::cout << payload;
        return;
    }
    rph::write_file(out, payload);
    rph::write_file(out + ".manifest.json", manifest.to_json().dump(2) + "\n");
    std::cerr << "wrote " << out << " and " << out << ".manifest.json\n";
}

// ---------------------------------------------------------------- sweep

int cmd_sweep(double sigma, double grid_step, int a, int b, int d, int k,
              std::uint64_t trials, std::uint64_t seed,
              const std::string& out) {
    Timer timer;
    rph::HashFamilyParams params{d, a, b, 0};
    const rph::SweepResult result =
        rph::sweep(sigma, grid_step, d, params, k, trials, seed);

    rph::RunManifest manifest;
    manifest.subcommand = "sweep";
    manifest.parameters = {{"sigma", sigma},   {"grid_step", grid_step},
                           {"a", a},           {"b", b},
                           {"d", d},           {"k", k},
                           {"trials", trials}};
    manifest.seed = seed;
    manifest.wall_clock_seconds = timer.seconds();
    emit(out, rph::sweep_to_csv(result), manifest);
    return 0;
}

// ------------------------------------------------------------- estimate

bool numeric_supported(int a, int b, int k) {
    return (b == 1 && k == 3) || (a == 1 && k >= 2 && k <= 3);
}

int cmd_estimate(const rph::TupleConfig& config, int a, int b, int d,
                 std::uint64_t trials, std::uint64_t seed, bool force_numeric,
                 bool want_asymptotics, const std::string& out) {
    Timer timer;
    const int k = config.k();
    const int h = a + b;
    rph::HashFamilyParams params{d, a, b, 0};

    const rph::CollisionEstimate mc =
        rph::estimate_collision_rate(config, d, params, k, trials, seed);
    const rph::ConfigFunctionals fn = rph::config_functionals(config);
    const rph::ReducibilityResult red = rph::reducibility(config);

    nlohmann::json j = {{"schema_version", rph::kSchemaVersion},
                        {"config", rph::config_to_json(config)},
                        {"mc", rph::estimate_to_json(mc)},
                        {"alpha", fn.alpha},
                        {"delta", fn.delta},
                        {"dmin_sq", red.dmin_sq},
                        {"reducible", red.is_reducible}};

    if (force_numeric && !numeric_supported(a, b, k))
        throw rph::DomainError(
            "estimate: deterministic integration requires b = 1 (k = 3) or "
            "a = 1 (k <= 3)");
    if (numeric_supported(a, b, k)) {
        const rph::CollisionMode mode = b == 1 ? rph::CollisionMode::kMinIndex
                                               : rph::CollisionMode::kMaxIndex;
        j["numeric"] = rph::collision_prob_numeric(config, h, mode, {});
    }
    if (want_asymptotics) {
        rph::AsymptoticInputs in{fn.alpha, fn.delta, k, a, b};
        j["large_b"] = rph::rate_large_b(in);
        j["large_a"] = rph::rate_large_a(in);
    }

    rph::RunManifest manifest;
    manifest.subcommand = "estimate";
    manifest.parameters = {{"gram", config.upper()}, {"k", k},
                           {"a", a},                 {"b", b},
                           {"d", d},                 {"trials", trials},
                           {"numeric", force_numeric},
                           {"asymptotic", want_asymptotics}};
    manifest.seed = seed;
    manifest.wall_clock_seconds = timer.seconds();
    emit(out, j.dump(2) + "\n", manifest);
    return 0;
}

// ---------------------------------------------------------- convergence

int cmd_convergence(const std::string& regime, const rph::TupleConfig& config,
                    int fixed_a, int fixed_b, int d,
                    const std::vector<int>& range, std::uint64_t trials,
                    std::uint64_t seed, const std::string& out) {
    Timer timer;
    const int k = config.k();
    const rph::ConfigFunctionals fn = rph::config_functionals(config);

    std::string csv =
        "regime,a,b,h,trials,p_mc,p_asymptotic,ratio,log_ratio,seed\n";
    std::uint64_t row = 0;
    for (int value : range) {
        const int a = regime == "large-a" ? value : fixed_a;
        const int b = regime == "large-b" ? value : fixed_b;
        rph::HashFamilyParams params{d, a, b, 0};
        const std::uint64_t row_seed = rph::derive_seed(seed, row++, 29);
        const rph::CollisionEstimate mc =
            rph::estimate_collision_rate(config, d, params, k, trials, row_seed);

        rph::AsymptoticInputs in{fn.alpha, fn.delta, k, a, b};
        const double p_asym = regime == "large-b" ? rph::rate_large_b(in)
                                                  : rph::rate_large_a(in);
        const double ratio = p_asym > 0.0 ? mc.p_hat / p_asym
                                          : std::numeric_limits<double>::quiet_NaN();
        const double lr = mc.p_hat > 0.0 && mc.p_hat < 1.0 && p_asym > 0.0 &&
                                  p_asym < 1.0
                              ? rph::log_ratio(mc.p_hat, p_asym)
                              : std::numeric_limits<double>::quiet_NaN();
        csv += regime + ',' + std::to_string(a) + ',' + std::to_string(b) + ',' +
               std::to_string(a + b) + ',' + std::to_string(trials) + ',' +
               rph::format_double(mc.p_hat) + ',' + rph::format_double(p_asym) +
               ',' + rph::format_double(ratio) + ',' + rph::format_double(lr) +
               ',' + std::to_string(row_seed) + '\n';
    }

    rph::RunManifest manifest;
    manifest.subcommand = "convergence";
    manifest.parameters = {{"regime", regime},       {"gram", config.upper()},
                           {"k", k},                 {"a", fixed_a},
                           {"b", fixed_b},           {"d", d},
                           {"range", range},         {"trials", trials}};
    manifest.seed = seed;
    manifest.wall_clock_seconds = timer.seconds();
    emit(out, csv, manifest);
    return 0;
}

// --------------------------------------------------------------- detect

int cmd_detect(std::uint64_t db_size, std::uint64_t planted,
               const rph::TupleConfig& config, int a, int b, int d,
               std::uint64_t seed, const std::string& out) {
    Timer timer;
    const int k = config.k();
    rph::HashFamilyParams params{d, a, b, 0};
    const rph::DetectReport report =
        rph::detect_planted(db_size, planted, d, params, k, config, seed);

    rph::RunManifest manifest;
    manifest.subcommand = "detect";
    manifest.parameters = {{"db_size", db_size}, {"planted", planted},
                           {"gram", config.upper()},
                           {"k", k},             {"a", a},
                           {"b", b},             {"d", d}};
    manifest.seed = seed;
    manifest.wall_clock_seconds = timer.seconds();
    emit(out, rph::detect_to_json(report).dump(2) + "\n", manifest);
    return 0;
}

// ------------------------------------------------------------- survival

int cmd_survival(const std::string& mode_name, double threshold,
                 const rph::TupleConfig& config, int d, std::uint64_t trials,
                 std::uint64_t seed, const std::string& out) {
    Timer timer;
    const int k = config.k();
    const rph::SurvivalMode mode = mode_name == "above"
                                       ? rph::SurvivalMode::kAbove
                                       : rph::SurvivalMode::kBelow;
    const rph::CollisionEstimate mc =
        rph::survival_rate(config, d, k, mode, threshold, trials, seed);
    const rph::ConfigFunctionals fn = rph::config_functionals(config);
    const double closed_form =
        mode == rph::SurvivalMode::kAbove
            ? rph::survival_above(fn.alpha, k, threshold)
            : rph::survival_below(fn.delta, k, threshold);
    const double lr = mc.p_hat > 0.0 && mc.p_hat < 1.0 && closed_form > 0.0 &&
                              closed_form < 1.0
                          ? rph::log_ratio(mc.p_hat, closed_form)
                          : std::numeric_limits<double>::quiet_NaN();

    nlohmann::json j = {{"schema_version", rph::kSchemaVersion},
                        {"mode", mode_name},
                        {"threshold", threshold},
                        {"config", rph::config_to_json(config)},
                        {"mc", rph::estimate_to_json(mc)},
                        {"closed_form", closed_form},
                        {"log_ratio", lr},
                        {"alpha", fn.alpha},
                        {"delta", fn.delta}};

    rph::RunManifest manifest;
    manifest.subcommand = "survival";
    manifest.parameters = {{"mode", mode_name},     {"threshold", threshold},
                           {"gram", config.upper()}, {"k", k},
                           {"d", d},                 {"trials", trials}};
    manifest.seed = seed;
    manifest.wall_clock_seconds = timer.seconds();
    emit(out, j.dump(2) + "\n", manifest);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "rphash: collision-rate experiments for the largest-projection "
        "random projection hash family"};
    app.require_subcommand(1);

    const auto positive = CLI::PositiveNumber;

    // shared flag storage
    double sigma = 0.0, grid_step = 0.1, threshold = 0.0;
    int a = 1, b = 2, d = 20, k = 3;
    std::uint64_t trials = 100000, seed = 1, db_size = 0, planted = 0;
    std::vector<double> gram;
    std::vector<int> range;
    std::string out, regime, mode_name;
    bool force_numeric = false, want_asymptotics = false;

    CLI::App* sweep = app.add_subcommand(
        "sweep", "collision-rate grid over configurations at fixed sigma");
    sweep->add_option("--sigma", sigma, "sum of ordered pairwise cosines")
        ->required();
    sweep->add_option("--grid-step", grid_step, "cosine grid resolution")
        ->check(positive);
    sweep->add_option("--a", a, "kept projections per hash");
    sweep->add_option("--b", b, "discarded projections per hash");
    sweep->add_option("--d", d, "ambient dimension");
    sweep->add_option("--k", k, "tuple size");
    sweep->add_option("--trials", trials, "Monte-Carlo trials per cell")
        ->required()
        ->check(positive);
    sweep->add_option("--seed", seed, "root seed");
    sweep->add_option("--out", out, "output CSV path (stdout when absent)");

    CLI::App* estimate = app.add_subcommand(
        "estimate", "all estimators for one configuration");
    estimate->add_option("--gram", gram, "upper-triangle pairwise cosines")
        ->required()
        ->delimiter(',');
    estimate->add_option("--k", k, "tuple size");
    estimate->add_option("--a", a, "kept projections per hash");
    estimate->add_option("--b", b, "discarded projections per hash");
    estimate->add_option("--d", d, "ambient dimension");
    estimate->add_option("--trials", trials, "Monte-Carlo trials")
        ->check(positive);
    estimate->add_option("--seed", seed, "root seed");
    estimate->add_flag("--numeric", force_numeric,
                       "require the deterministic integral (error if "
                       "unsupported for this a, b, k)");
    estimate->add_flag("--asymptotic", want_asymptotics,
                       "include large-a and large-b closed forms");
    estimate->add_option("--out", out, "output JSON path (stdout when absent)");

    CLI::App* convergence = app.add_subcommand(
        "convergence", "Monte-Carlo against the closed-form rate along a range");
    convergence
        ->add_option("--regime", regime, "which parameter grows")
        ->required()
        ->check(CLI::IsMember({"large-a", "large-b"}));
    convergence->add_option("--gram", gram, "upper-triangle pairwise cosines")
        ->required()
        ->delimiter(',');
    convergence->add_option("--k", k, "tuple size");
    convergence->add_option("--a", a, "fixed a (large-b regime)");
    convergence->add_option("--b", b, "fixed b (large-a regime)");
    convergence->add_option("--d", d, "ambient dimension");
    convergence->add_option("--range", range, "values of the growing parameter")
        ->required()
        ->delimiter(',');
    convergence->add_option("--trials", trials, "Monte-Carlo trials per row")
        ->check(positive);
    convergence->add_option("--seed", seed, "root seed");
    convergence->add_option("--out", out, "output CSV path (stdout when absent)");

    CLI::App* detect = app.add_subcommand(
        "detect", "bucket a vector database and score planted tuples");
    detect->add_option("--db-size", db_size, "database size")
        ->required()
        ->check(positive);
    detect->add_option("--planted", planted, "number of planted tuples");
    detect->add_option("--gram", gram, "planted-tuple pairwise cosines")
        ->required()
        ->delimiter(',');
    detect->add_option("--k", k, "tuple size");
    detect->add_option("--a", a, "kept projections per hash");
    detect->add_option("--b", b, "discarded projections per hash");
    detect->add_option("--d", d, "ambient dimension");
    detect->add_option("--seed", seed, "root seed");
    detect->add_option("--out", out, "output JSON path (stdout when absent)");

    CLI::App* survival = app.add_subcommand(
        "survival", "filter-predicate pass rate against the closed form");
    survival->add_option("--mode", mode_name, "predicate direction")
        ->required()
        ->check(CLI::IsMember({"above", "below"}));
    survival->add_option("--threshold", threshold, "predicate threshold")
        ->required();
    survival->add_option("--gram", gram,
                         "upper-triangle pairwise cosines (omit for k = 1)")
        ->delimiter(',');
    survival->add_option("--k", k, "tuple size");
    survival->add_option("--d", d, "ambient dimension");
    survival->add_option("--trials", trials, "Monte-Carlo trials")
        ->check(positive);
    survival->add_option("--seed", seed, "root seed");
    survival->add_option("--out", out, "output JSON path (stdout when absent)");

    try {
        app.parse(argc, argv);

        if (sweep->parsed())
            return cmd_sweep(sigma, grid_step, a, b, d, k, trials, seed, out);
        if (estimate->parsed())
            return cmd_estimate(parse_gram(k, gram), a, b, d, trials, seed,
                                force_numeric, want_asymptotics, out);
        if (convergence->parsed()) {
            if (range.empty() ||
                *std::min_element(range.begin(), range.end()) < 1)
                throw CLI::ValidationError(
                    "--range", "must be a non-empty list of positive values");
            return cmd_convergence(regime, parse_gram(k, gram), a, b, d, range,
                                   trials, seed, out);
        }
        if (detect->parsed()) {
            if (planted * static_cast<std::uint64_t>(k) > db_size)
                throw CLI::ValidationError(
                    "--planted", "planted vectors exceed the database size");
            return cmd_detect(db_size, planted, parse_gram(k, gram), a, b, d,
                              seed, out);
        }
        if (survival->parsed()) {
            if (threshold <= 0.0)
                throw CLI::ValidationError("--threshold", "must be positive");
            return cmd_survival(mode_name, threshold, parse_gram(k, gram), d,
                                trials, seed, out);
        }
        return 0;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitUsage;
    } catch (const rph::ToleranceError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitTolerance;
    } catch (const rph::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDomain;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
