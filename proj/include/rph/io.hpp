#pragma once

#include <chrono>
#include <cstdio>
#include <fstream>
#include <string>

#include <json.hpp>

#include "rph/errors.hpp"
#include "rph/experiments.hpp"
#include "rph/geometry.hpp"

// Output schemas: CSV for grids, JSON for single estimates, and the run
// manifest that accompanies every artifact. Formats are pinned in
// docs/format.md; data rows are byte-identical across reruns with equal
// manifests.

namespace rph {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kLibraryVersion = "rphash-0.1.0";

/// Fixed-width float formatting so reruns are byte-identical.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

inline nlohmann::json config_to_json(const TupleConfig& config) {
    return {{"k", config.k()}, {"gram", config.upper()}};
}

inline TupleConfig config_from_json(const nlohmann::json& j) {
    return TupleConfig::from_upper(j.at("k").get<int>(),
                                   j.at("gram").get<std::vector<double>>());
}

struct RunManifest {
    std::string subcommand;
    nlohmann::json parameters;
    std::uint64_t seed = 0;
    double wall_clock_seconds = 0.0;

    nlohmann::json to_json() const {
        return {{"schema_version", kSchemaVersion},
                {"library_version", kLibraryVersion},
                {"subcommand", subcommand},
                {"parameters", parameters},
                {"seed", seed},
                {"wall_clock_seconds", wall_clock_seconds}};
    }
};

inline nlohmann::json estimate_to_json(const CollisionEstimate& est) {
    return {{"trials", est.trials},
            {"collisions", est.collisions},
            {"p_hat", est.p_hat},
            {"ci_low", est.ci_low},
            {"ci_high", est.ci_high},
            {"a", est.params.a},
            {"b", est.params.b},
            {"d", est.d},
            {"k", est.k},
            {"seed", est.seed}};
}

inline const char* kSweepCsvHeader =
    "sigma,alpha,beta,gamma,a,b,d,k,trials,collisions,p_hat,ci_low,ci_high,seed,"
    "flag";

inline std::string sweep_to_csv(const SweepResult& result) {
    std::string out = kSweepCsvHeader;
    out += '\n';
    for (const SweepCell& cell : result.cells) {
        out += format_double(result.sigma) + ',';
        out += format_double(cell.alpha) + ',';
        out += format_double(cell.beta) + ',';
        out += format_double(cell.gamma) + ',';
        out += std::to_string(result.params.a) + ',';
        out += std::to_string(result.params.b) + ',';
        out += std::to_string(result.d) + ',';
        out += std::to_string(result.k) + ',';
        if (cell.skipped) {
            out += std::to_string(result.trials_per_cell) + ",0,,,,";
            out += std::to_string(result.seed) + ",skipped_nonpd\n";
        } else {
            out += std::to_string(cell.estimate.trials) + ',';
            out += std::to_string(cell.estimate.collisions) + ',';
            out += format_double(cell.estimate.p_hat) + ',';
            out += format_double(cell.estimate.ci_low) + ',';
            out += format_double(cell.estimate.ci_high) + ',';
            out += std::to_string(cell.estimate.seed) + ",\n";
        }
    }
    return out;
}

inline nlohmann::json sweep_to_json(const SweepResult& result) {
    nlohmann::json rows = nlohmann::json::array();
    for (const SweepCell& cell : result.cells) {
        nlohmann::json row = {{"sigma", result.sigma},
                              {"alpha", cell.alpha},
                              {"beta", cell.beta},
                              {"gamma", cell.gamma},
                              {"a", result.params.a},
                              {"b", result.params.b},
                              {"d", result.d},
                              {"k", result.k},
                              {"flag", cell.skipped ? "skipped_nonpd" : ""}};
        if (!cell.skipped) {
            row["trials"] = cell.estimate.trials;
            row["collisions"] = cell.estimate.collisions;
            row["p_hat"] = cell.estimate.p_hat;
            row["ci_low"] = cell.estimate.ci_low;
            row["ci_high"] = cell.estimate.ci_high;
            row["seed"] = cell.estimate.seed;
        }
        rows.push_back(std::move(row));
    }
    return {{"schema_version", kSchemaVersion},
            {"sigma", result.sigma},
            {"grid_step", result.grid_step},
            {"trials_per_cell", result.trials_per_cell},
            {"seed", result.seed},
            {"rows", std::move(rows)}};
}

inline nlohmann::json detect_to_json(const DetectReport& report) {
    nlohmann::json j = {{"schema_version", kSchemaVersion},
                        {"db_size", report.db_size},
                        {"n_planted", report.n_planted},
                        {"k", report.k},
                        {"bucket_count", report.bucket_count},
                        {"max_bucket", report.max_bucket},
                        {"background_rate", report.background_rate},
                        {"candidates_examined", report.candidates_examined},
                        {"candidates_reducible", report.candidates_reducible},
                        {"false_candidate_rate", report.false_candidate_rate},
                        {"truncated", report.truncated}};
    if (report.recall)
        j["recall"] = *report.recall;
    else
        j["recall"] = nullptr;
    return j;
}

inline void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open output file: " + path);
    out << contents;
}

}  // namespace rph
