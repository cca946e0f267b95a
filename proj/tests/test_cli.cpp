#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "nct/nct.hpp"

using namespace nct;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run run(const std::string &args, const std::string &env = "") {
    const std::string cmd = env + " " + NCT_CLI_PATH + " " + args + " 2>&1";
    Run r;
    FILE *p = ::popen(cmd.c_str(), "r");
    if (!p)
        return r;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, p)) > 0)
        r.out.append(buf, n);
    const int status = ::pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string data(const std::string &name) { return std::string(NCT_EXAMPLES_DIR) + "/" + name; }

fs::path tmp(const std::string &name) { return fs::temp_directory_path() / ("nct_test_cli_" + name); }

std::string slurp(const fs::path &p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json stdout_json(const Run &r) { return json::parse(r.out); }

} // namespace

TEST(Cli, VerifyIsReproducible) {
    const auto a = tmp("r1.json"), b = tmp("r2.json");
    ASSERT_EQ(run("verify core --trials 10 --seed 5 --report " + a.string()).code, 0);
    ASSERT_EQ(run("verify core --trials 10 --seed 5 --report " + b.string()).code, 0);
    const auto ja = json::parse(slurp(a)).get<VerificationReport>();
    const auto jb = json::parse(slurp(b)).get<VerificationReport>();
    EXPECT_EQ(canonical_dump(ja), canonical_dump(jb));
    EXPECT_EQ(ja.seed, 5u);
    fs::remove(a);
    fs::remove(b);
}

TEST(Cli, FlagsBeatEnvironment) {
    const auto r = run("verify symbols --trials 3 --seed 9", "NCT_SEED=11 NCT_BOX=2");
    ASSERT_EQ(r.code, 0) << r.out;
    const json j = json::parse(r.out.substr(0, r.out.rfind("symbols: ")));
    EXPECT_EQ(j.at("seed"), 9);
    EXPECT_EQ(j.at("parameters").at("box"), 2);
}

TEST(Cli, UsageErrors) {
    EXPECT_EQ(run("verify core --box 0").code, 2);
    EXPECT_EQ(run("verify nonsense").code, 2);
    EXPECT_EQ(run("verify core --format xml").code, 2);
    EXPECT_EQ(run("frobnicate").code, 2);
    EXPECT_EQ(run("verify core", "NCT_BOX=zero").code, 2);
    EXPECT_EQ(run("norm --element " + data("a.json")).code, 2);
    EXPECT_EQ(run("osc --dim 3").code, 2);
    EXPECT_EQ(run("expand sideways --symbol " + data("xi.json") + " --at 1 --order 1").code, 2);
    const auto r = run("verify core --box 0");
    EXPECT_NE(r.out.find("box"), std::string::npos) << r.out;
}

TEST(Cli, FormatsOnStdout) {
    const auto csv = run("verify symbols --trials 3 --format csv");
    ASSERT_EQ(csv.code, 0);
    EXPECT_EQ(csv.out.rfind("suite,check,status", 0), 0u);
    const auto md = run("verify symbols --trials 3 --format md");
    EXPECT_NE(md.out.find("| check | status |"), std::string::npos);
}

TEST(Cli, ApplyLambda) {
    const auto r = run("apply --symbol " + data("lambda_s2.json") + " --element " + data("u1.json"));
    ASSERT_EQ(r.code, 0) << r.out;
    const auto e = element_from_json(stdout_json(r));
    EXPECT_NEAR(std::abs(e.coeff({1, 0}) - Complex(2.0)), 0.0, 1e-14);
    EXPECT_EQ(e.size(), 1u);
}

TEST(Cli, ApplyWritesOutFile) {
    const auto p = tmp("applied.json");
    ASSERT_EQ(run("apply --symbol " + data("lambda_s2.json") + " --element " + data("a.json") + " --out " + p.string()).code,
              0);
    const auto e = element_from_json(json::parse(slurp(p)));
    // lambda^2 = 1 + |m|^2 on each mode
    EXPECT_NEAR(std::abs(e.coeff({1, -1}) - 3.0 * Complex(0.5, -0.25)), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(e.coeff({-2, 1}) - 6.0 * Complex(0.0, 0.75)), 0.0, 1e-14);
    fs::remove(p);
}

TEST(Cli, NormAtZeroIsL2) {
    const auto r = run("norm --s 0 --element " + data("a.json"));
    ASSERT_EQ(r.code, 0) << r.out;
    const double expected = std::sqrt(1.0 + 0.25 + 0.0625 + 0.5625);
    EXPECT_NEAR(stdout_json(r).at("norm").get<double>(), expected, 1e-14);
    const auto r2 = run("norm --s 2 --element " + data("a.json"));
    EXPECT_NEAR(stdout_json(r2).at("norm2").get<double>(), 1.0 + 0.3125 * 9.0 + 0.5625 * 36.0, 1e-12);
}

TEST(Cli, ExpandComposeMatchesOracle) {
    const auto r = run("expand compose --symbol " + data("xi.json") + " --symbol2 " + data("u1const.json") +
                       " --at 3 --order 2 --oracle");
    ASSERT_EQ(r.code, 0) << r.out;
    const json j = stdout_json(r);
    EXPECT_LE(j.at("residual").get<double>(), 1e-10);
    EXPECT_EQ(j.at("oracle_kind"), "operator");
    const auto v = element_from_json(j.at("expansion").at("value"));
    EXPECT_NEAR(std::abs(v.coeff({1}) - 4.0), 0.0, 1e-14);
}

TEST(Cli, ExpandAdjointAtRealPoint) {
    const auto r = run("expand adjoint --symbol " + data("xi_u1.json") + " --at 0.5,-1.5 --order 3 --oracle");
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_LE(stdout_json(r).at("residual").get<double>(), 1e-10);
    EXPECT_EQ(run("expand adjoint --symbol " + data("xi_u1.json") + " --at 0.5,x --order 3").code, 2);
    EXPECT_EQ(run("expand compose --symbol " + data("xi.json") + " --at 1 --order 1").code, 2);
}

TEST(Cli, Rellich) {
    const auto r = run("rellich --seq " + data("seq") + " --s 2 --t 0 --eps 0.01 --C 1");
    ASSERT_EQ(r.code, 0) << r.out;
    const json j = stdout_json(r);
    EXPECT_TRUE(j.at("certified").get<bool>());
    EXPECT_GE(j.at("indices").size(), 2u);
    EXPECT_LE(j.at("max_pair_distance2").get<double>(), 0.01);
    EXPECT_EQ(j.at("files").size(), j.at("indices").size());
    EXPECT_EQ(run("rellich --seq " + data("seq") + " --s 1 --t 2 --eps 0.01").code, 3);
    EXPECT_EQ(run("rellich --seq /nonexistent --s 2 --t 0 --eps 0.01").code, 3);
}

TEST(Cli, Osc) {
    for (const std::string cut : {"gaussian", "cos"}) {
        const auto p = tmp("osc.json");
        const auto r = run("osc --amplitude poly-gauss --dim 1 --cutoff " + cut + " --report " + p.string());
        ASSERT_EQ(r.code, 0) << r.out;
        const json j = json::parse(slurp(p));
        const double re = j.at("normalized_value")[0], a0 = j.at("a0")[0];
        EXPECT_NEAR(re, a0, 1e-5) << cut;
        fs::remove(p);
    }
    const auto r = run("osc --amplitude gaussian --dim 2");
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_NEAR(stdout_json(r).at("normalized_value")[0].get<double>(), 1.0, 1e-5);
}

TEST(Cli, MalformedInput) {
    const auto r = run("norm --s 0 --element " + data("malformed.json"));
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(r.out.find("line 4"), std::string::npos) << r.out;
    EXPECT_EQ(run("norm --s 0 --element /nonexistent.json").code, 3);
    // theta of the symbol and the element disagree
    EXPECT_EQ(run("apply --symbol " + data("xi_u1.json") + " --element " + data("seq/a00.json")).code, 0);
    EXPECT_EQ(run("apply --symbol " + data("xi.json") + " --element " + data("u1.json")).code, 3);
}
