#include <gtest/gtest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

struct Outcome {
    int code;
    std::string out;
};

// Runs the CLI with stdout captured in a temp file; stderr is discarded.
Outcome qhe(const std::string& args) {
    static int counter = 0;
    const auto dir = std::filesystem::temp_directory_path();
    const auto out = dir / ("qhe_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++) + ".txt");
    const std::string cmd = std::string("\"") + QHE_CLI_PATH + "\" " + args + " > \"" + out.string() + "\" 2>/dev/null";
    const int status = std::system(cmd.c_str());
    std::ifstream in(out);
    std::stringstream ss;
    ss << in.rdbuf();
    std::filesystem::remove(out);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

}  // namespace

TEST(Cli, MissingRequiredOptionIsUsageError) {
    EXPECT_EQ(qhe("run --engine seq-out").code, 2);
    EXPECT_EQ(qhe("").code, 2);
}

TEST(Cli, UnknownEngineIsUsageError) {
    EXPECT_EQ(qhe("run --engine turbine --A 5").code, 2);
    EXPECT_EQ(qhe("run --engine sim-out --A 5 --omega-sb 3").code, 2);  // omega_sb > A/2
}

TEST(Cli, RunSeqOutJson) {
    const auto r = qhe("run --engine seq-out --A 50 --Th 100 --Tc 15");
    ASSERT_EQ(r.code, 0);
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j.at("engine"), "seq-out");
    EXPECT_NEAR(j.at("metrics").at("w_battery").get<double>(), 14.51928, 1e-5);
    EXPECT_NEAR(j.at("metrics").at("pcg").get<double>(), 4.0 * 14.51928, 1e-4);
}

TEST(Cli, ZeroPhaseRun) {
    const auto r = qhe("run --engine seq-frag --A 10 --Th 8 --Tc 1 --lambda 0 --format csv");
    ASSERT_EQ(r.code, 0);
    std::istringstream in(r.out);
    std::string header, line;
    std::getline(in, header);
    EXPECT_EQ(header, "q_hot,q_cold_stroke,q_cold_in_stroke1,q_total,w_battery,pcg,eta,closure");
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        EXPECT_NE(line.find(",0,0,0,"), std::string::npos) << line;  // w_battery, pcg, eta
    }
    EXPECT_EQ(n, 2);
}

TEST(Cli, SweepCsvRows) {
    const auto r = qhe("sweep --engine seq-out --tu-min 10 --tu-max 30 --tu-steps 3 --fast --eta-vs-tc 5,10");
    ASSERT_EQ(r.code, 0);
    std::istringstream in(r.out);
    std::string header, line;
    std::getline(in, header);
    EXPECT_EQ(header.substr(0, 8), "t_u,w_m,");
    EXPECT_NE(header.find("eta_tc_10"), std::string::npos);
    int n = 0;
    while (std::getline(in, line)) ++n;
    EXPECT_EQ(n, 3);
}

TEST(Cli, ConfigFile) {
    const auto path = std::filesystem::temp_directory_path() / ("qhe_cli_cfg_" + std::to_string(::getpid()) + ".ini");
    {
        std::ofstream cfg(path);
        cfg << "[run]\nengine=seq-out\nA=50\nTh=50\n";
    }
    const auto r = qhe("--config \"" + path.string() + "\" run");
    std::filesystem::remove(path);
    ASSERT_EQ(r.code, 0);
    EXPECT_NEAR(nlohmann::json::parse(r.out).at("metrics").at("w_battery").get<double>(), 12.33799, 1e-5);
}

TEST(Cli, VerifyGroups) {
    EXPECT_EQ(qhe("verify --only appendix").code, 0);
    EXPECT_EQ(qhe("verify --only no-such-check").code, 2);
    EXPECT_NE(qhe("verify --only gibbs --kappa -1").code, 0);
}
