#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fixprice/cli.hpp"

namespace {

const std::string kData = FIXPRICE_DATA_DIR;

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "fixprice");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    const int code = fixprice::cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

// Runs the built executable and returns its exit status.
int spawn(const std::string& args) {
    const std::string cmd = std::string(FIXPRICE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string metric(const std::string& csv, const std::string& name) {
    std::istringstream in(csv);
    std::string line;
    while (std::getline(in, line))
        if (line.rfind(name + ",", 0) == 0) {
            const auto rest = line.substr(name.size() + 1);
            return rest.substr(0, rest.find(','));
        }
    return "<missing>";
}

std::filesystem::path temp_file(const std::string& name, const std::string& content = "") {
    const auto path = std::filesystem::temp_directory_path() / ("fixprice_cli_test_" + name);
    if (!content.empty()) std::ofstream(path) << content;
    return path;
}

} // namespace

TEST(Cli, PriceBalanced) {
    const auto r = run({"price", "--instance", kData + "/uniform01.json", "--rule", "balanced"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(metric(r.out, "price"), "0.5");
    EXPECT_EQ(metric(r.out, "guaranteed_ratio"), "2");
    EXPECT_EQ(metric(r.out, "r"), "0.5");
}

TEST(Cli, PriceMedianOnPointMasses) {
    const auto r = run({"price", "--instance", kData + "/ten_vs_four.json", "--rule", "median"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(metric(r.out, "price"), "7");
}

TEST(Cli, LogRuleNeedsAtomlessInput) {
    auto r = run({"price", "--instance", kData + "/ten_vs_four.json", "--rule", "logrule"});
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.err.find("atomless required"), std::string::npos);
    r = run({"price", "--instance", kData + "/ten_vs_four.json", "--rule", "logrule", "--smoothing-width", "0.5"});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(metric(r.out, "guaranteed_ratio"), "4");
}

TEST(Cli, MedianConditionFailure) {
    const auto path = temp_file("reversed.json", R"({"buyer":{"type":"uniform","lo":0,"hi":0.4},
        "seller":{"type":"uniform","lo":0.6,"hi":1}})");
    const auto r = run({"price", "--instance", path.string(), "--rule", "median"});
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.err.find("median condition fails"), std::string::npos);
}

TEST(Cli, Evaluate) {
    auto r = run({"evaluate", "--instance", kData + "/ten_vs_four.json", "--price", "7"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(metric(r.out, "opt"), "6");
    EXPECT_EQ(metric(r.out, "gft"), "6");
    EXPECT_EQ(metric(r.out, "ratio"), "1");

    r = run({"evaluate", "--instance", kData + "/uniform01.json", "--price", "0.5"});
    ASSERT_EQ(r.code, 0);
    EXPECT_NEAR(std::stod(metric(r.out, "opt")), 1.0 / 6.0, 1e-12);
    EXPECT_EQ(metric(r.out, "gft"), "0.125");
    EXPECT_NEAR(std::stod(metric(r.out, "ratio")), 4.0 / 3.0, 1e-12);

    r = run({"evaluate", "--instance", kData + "/uniform01.json", "--price", "0"});
    EXPECT_EQ(metric(r.out, "gft"), "0");
    EXPECT_EQ(metric(r.out, "ratio"), "inf");

    r = run({"evaluate", "--instance", kData + "/uniform01.json", "--rule", "logrule"});
    ASSERT_EQ(r.code, 0);
    EXPECT_NEAR(std::stod(metric(r.out, "price")), 1.0 / 3.0, 1e-9);
    EXPECT_EQ(run({"evaluate", "--instance", kData + "/uniform01.json", "--price", "-1"}).code, 3);
}

TEST(Cli, SimulateAndDeterminism) {
    const std::vector<std::string> args{"simulate", "--instance", kData + "/da_20x20_uniform.json", "--replicates",
                                        "2000",     "--seed",     "11",  "--epsilon", "0.61"};
    const auto a = run(args);
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(metric(a.out, "expected_trades"), "10");
    EXPECT_NEAR(std::stod(metric(a.out, "event_floor")), 0.6888, 1e-4);

    auto with_workers = args;
    with_workers.insert(with_workers.end(), {"--workers", "3"});
    EXPECT_EQ(run(with_workers).out, a.out);

    const auto f1 = temp_file("sim1.json");
    const auto f2 = temp_file("sim2.json");
    auto to_file = args;
    to_file.insert(to_file.end(), {"--format", "json", "--out", f1.string()});
    ASSERT_EQ(run(to_file).code, 0);
    to_file.back() = f2.string();
    ASSERT_EQ(run(to_file).code, 0);
    std::ifstream i1(f1), i2(f2);
    const std::string s1((std::istreambuf_iterator<char>(i1)), {});
    const std::string s2((std::istreambuf_iterator<char>(i2)), {});
    EXPECT_EQ(s1, s2);
    const auto doc = nlohmann::json::parse(s1);
    EXPECT_TRUE(doc.contains("violations"));
    EXPECT_EQ(doc["metrics"]["opt_estimate"]["replicates"], 2000);
    EXPECT_EQ(doc["metrics"]["opt_estimate"]["seed"], 11);

    auto zero = args;
    zero[4] = "0";
    EXPECT_EQ(run(zero).code, 3);
}

TEST(Cli, LowerBound) {
    auto r = run({"lowerbound", "--n", "2", "--eps", "0.1388888888888889"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NEAR(std::stod(metric(r.out, "ratio")), 141.0 / 91.0, 1e-9);
    EXPECT_NE(r.out.find("p,gft\n"), std::string::npos);
    r = run({"lowerbound", "--n", "1", "--eps", "0.5"});
    EXPECT_EQ(metric(r.out, "ratio"), "1");
    EXPECT_EQ(run({"lowerbound", "--n", "16"}).code, 3);
    EXPECT_EQ(run({"lowerbound", "--n", "3", "--eps", "0.1"}).code, 3);
}

TEST(Cli, Verify) {
    const auto r = run({"verify", "--suite", "instances", "--seed", "3", "--format", "json"});
    ASSERT_EQ(r.code, 0) << r.out;
    const auto doc = nlohmann::json::parse(r.out);
    EXPECT_EQ(doc["metrics"]["ratio_ge_quarter_n"], "pass");
    EXPECT_TRUE(doc["violations"].empty());
}

TEST(Cli, InputErrors) {
    EXPECT_EQ(run({"price", "--instance", "/nonexistent.json", "--rule", "balanced"}).code, 2);
    const auto bad = temp_file("bad.json", "{\"buyer\": ");
    const auto r = run({"price", "--instance", bad.string(), "--rule", "balanced"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("line 1"), std::string::npos);
    EXPECT_EQ(run({"price", "--instance", kData + "/uniform01.json", "--rule", "nonsense"}).code, 2);
    EXPECT_EQ(run({"frobnicate"}).code, 2);
    EXPECT_EQ(run({"price", "--instance", kData + "/uniform01.json", "--rule", "balanced", "--format", "xml"}).code, 2);
    EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, ProcessExitCodes) {
    EXPECT_EQ(spawn("price --instance " + kData + "/uniform01.json --rule balanced"), 0);
    EXPECT_EQ(spawn("price --instance /nonexistent.json --rule balanced"), 2);
    EXPECT_EQ(spawn("price --instance " + kData + "/ten_vs_four.json --rule logrule"), 3);
    EXPECT_EQ(spawn("--format json lowerbound --n 16"), 3);
}
