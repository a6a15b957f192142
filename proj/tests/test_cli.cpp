#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

// End-to-end tests of the command-line front end: exit-code contract,
// byte-identical reruns, and output schemas. The binary path comes from
// the RPHASH_CLI environment variable set by the build.

namespace {

struct RunResult {
    int exit_code;
    std::string output;  // stdout only
};

std::string cli_path() {
    const char* path = std::getenv("RPHASH_CLI");
    if (path == nullptr) {
        ADD_FAILURE() << "RPHASH_CLI is not set";
        return {};
    }
    return path;
}

RunResult run(const std::string& args) {
    const std::string cmd = cli_path() + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    EXPECT_NE(pipe, nullptr);
    std::string out;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof(buf), pipe)) > 0) out.append(buf, n);
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, std::move(out)};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

TEST(CliExitCodes, UsageErrorsExitTwo) {
    EXPECT_EQ(run("").exit_code, 2);                       // missing subcommand
    EXPECT_EQ(run("sweep --sigma -2.0 --trials 0").exit_code, 2);
    EXPECT_EQ(run("sweep --trials 100").exit_code, 2);     // missing --sigma
    EXPECT_EQ(run("convergence --regime large-b --gram=-0.5 --k 2 "
                  "--range \"\" --trials 10")
                  .exit_code,
              2);
    EXPECT_EQ(run("convergence --regime sideways --gram=-0.5 --k 2 "
                  "--range 2,4 --trials 10")
                  .exit_code,
              2);
    EXPECT_EQ(run("survival --mode below --threshold -1 --gram=-0.5 --k 2 "
                  "--trials 10")
                  .exit_code,
              2);
    EXPECT_EQ(run("detect --db-size 10 --planted 5 --gram=-0.4,-0.4,-0.4 "
                  "--d 8 --trials 10")
                  .exit_code,
              2);  // 5 planted triples cannot fit in 10 vectors
}

TEST(CliExitCodes, DomainErrorsExitThree) {
    // positive sigma: no valid grid
    EXPECT_EQ(run("sweep --sigma 1.0 --trials 10 --d 8").exit_code, 3);
    // indefinite gram matrix
    EXPECT_EQ(
        run("estimate --gram=-0.9,-0.9,-0.9 --d 8 --trials 10").exit_code, 3);
    // deterministic integral unsupported for a, b both > 1
    EXPECT_EQ(run("estimate --gram=-0.2,-0.2,-0.2 --a 2 --b 2 --d 8 "
                  "--trials 10 --numeric")
                  .exit_code,
              3);
}

TEST(CliDeterminism, IdenticalBytesAcrossRerunsAndWorkerCounts) {
    const std::string args =
        "sweep --sigma -2.0 --a 1 --b 2 --d 8 --k 3 --grid-step 0.25 "
        "--trials 400 --seed 7";
    const RunResult first = run(args);
    ASSERT_EQ(first.exit_code, 0);
    EXPECT_EQ(run(args).output, first.output);

    setenv("RPHASH_THREADS", "3", 1);
    const RunResult threaded = run(args);
    unsetenv("RPHASH_THREADS");
    EXPECT_EQ(threaded.output, first.output);
}

TEST(CliSweep, CsvSchemaAndCentreRow) {
    const RunResult res = run(
        "sweep --sigma -2.0 --a 1 --b 2 --d 10 --grid-step 0.2 "
        "--trials 4000 --seed 3");
    ASSERT_EQ(res.exit_code, 0);
    std::istringstream lines(res.output);
    std::string header;
    std::getline(lines, header);
    EXPECT_EQ(header,
              "sigma,alpha,beta,gamma,a,b,d,k,trials,collisions,p_hat,ci_low,"
              "ci_high,seed,flag");
    bool centre_seen = false;
    std::string line;
    while (std::getline(lines, line)) {
        EXPECT_EQ(std::count(line.begin(), line.end(), ','), 14) << line;
        if (line.find("-0.333333333333,-0.333333333333,-0.333333333333") !=
            std::string::npos) {
            centre_seen = true;
            std::istringstream fields(line);
            std::string f;
            for (int i = 0; i <= 10; ++i) std::getline(fields, f, ',');
            const double p_hat = std::stod(f);
            // generous MC band around the centre-cell rate
            EXPECT_GT(p_hat, 0.10);
            EXPECT_LT(p_hat, 0.18);
        }
    }
    EXPECT_TRUE(centre_seen);
}

TEST(CliEstimate, JsonJoinsAllEstimators) {
    const RunResult res = run(
        "estimate --gram=0,0,0 --k 3 --a 1 --b 2 --d 12 --trials 30000 "
        "--asymptotic --seed 5");
    ASSERT_EQ(res.exit_code, 0);
    const nlohmann::json j = nlohmann::json::parse(res.output);
    EXPECT_EQ(j.at("schema_version"), 1);
    EXPECT_NEAR(j.at("alpha").get<double>(), 3.0, 1e-12);
    EXPECT_NEAR(j.at("delta").get<double>(), 1.0, 1e-12);
    EXPECT_FALSE(j.at("reducible").get<bool>());
    // orthogonal triple, h=3: naive rate 1/9 from both estimators
    EXPECT_NEAR(j.at("numeric").get<double>(), 1.0 / 9.0, 2e-4);
    EXPECT_NEAR(j.at("mc").at("p_hat").get<double>(), 1.0 / 9.0, 0.006);
    // the large-b closed form is B(alpha a, b)/B(a, b) = B(3,2)/B(1,2);
    // it matches the naive rate only log-asymptotically in b
    EXPECT_NEAR(j.at("large_b").get<double>(), 1.0 / 6.0, 1e-9);
    EXPECT_TRUE(j.contains("large_a"));
}

TEST(CliSurvival, ClosedFormMatchesKnownTail) {
    const RunResult res =
        run("survival --mode above --threshold 2 --k 1 --d 8 --trials 50000 "
            "--seed 6");
    ASSERT_EQ(res.exit_code, 0);
    const nlohmann::json j = nlohmann::json::parse(res.output);
    EXPECT_NEAR(j.at("closed_form").get<double>(), 0.0455, 2e-4);
    EXPECT_NEAR(j.at("mc").at("p_hat").get<double>(), 0.0455, 0.004);
}

TEST(CliConvergence, RowsCoverRange) {
    const RunResult res = run(
        "convergence --regime large-b --gram=0 --k 2 --a 1 --d 8 "
        "--range 2,4,8 --trials 5000 --seed 8");
    ASSERT_EQ(res.exit_code, 0);
    std::istringstream lines(res.output);
    std::string header;
    std::getline(lines, header);
    EXPECT_EQ(header, "regime,a,b,h,trials,p_mc,p_asymptotic,ratio,log_ratio,seed");
    int rows = 0;
    std::string line;
    while (std::getline(lines, line)) ++rows;
    EXPECT_EQ(rows, 3);
}

TEST(CliOutput, WritesFileAndManifest) {
    const auto dir = std::filesystem::temp_directory_path() / "rphash_cli_test";
    std::filesystem::create_directories(dir);
    const auto csv = dir / "sweep.csv";
    const RunResult res =
        run("sweep --sigma -2.0 --d 8 --grid-step 0.25 --trials 200 --seed 2 "
            "--out " +
            csv.string());
    ASSERT_EQ(res.exit_code, 0);
    EXPECT_TRUE(res.output.empty());  // payload went to the file
    ASSERT_TRUE(std::filesystem::exists(csv));
    const auto manifest_path = csv.string() + ".manifest.json";
    ASSERT_TRUE(std::filesystem::exists(manifest_path));
    const nlohmann::json manifest =
        nlohmann::json::parse(slurp(manifest_path));
    EXPECT_EQ(manifest.at("subcommand"), "sweep");
    EXPECT_EQ(manifest.at("seed"), 2);
    EXPECT_EQ(manifest.at("schema_version"), 1);
    EXPECT_EQ(manifest.at("parameters").at("trials"), 200);
    std::filesystem::remove_all(dir);
}

}  // namespace
