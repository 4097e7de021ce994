/*
 * Copyright 2026 The Dyadic Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

struct Completed {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override
    {
        dir_ = fs::temp_directory_path() /
               ("dyadic_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    Completed invoke(const std::string& args) const
    {
        const auto out = dir_ / "stdout.txt";
        const auto err = dir_ / "stderr.txt";
        const std::string cmd =
            std::string(DYADIC_CLI_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
        const int status = std::system(cmd.c_str());
        return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
    }

    fs::path write_config(const std::string& name, const std::string& text) const
    {
        const auto p = dir_ / name;
        std::ofstream(p) << text;
        return p;
    }

    static std::string preset(const std::string& name) { return std::string(DYADIC_PRESET_DIR) + "/" + name; }

    fs::path dir_;
};

TEST_F(Cli, Version)
{
    const auto r = invoke("--version");
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_FALSE(r.out.empty());
}

TEST_F(Cli, ValidateAcceptsAPreset)
{
    const auto r = invoke("validate " + preset("det_decay.cfg"));
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_EQ(r.out.rfind("ok\n", 0), 0u);
    EXPECT_NE(r.out.find("nodes = 11\n"), std::string::npos);
}

TEST_F(Cli, ValidateRejectsOverBudgetTopologies)
{
    const auto r = invoke("validate " + preset("over_budget.cfg"));
    EXPECT_EQ(r.exit_code, 2);
    EXPECT_NE(r.out.find("nodes = 78536544841"), std::string::npos);
    EXPECT_NE(r.out.find("error:"), std::string::npos);
}

TEST_F(Cli, RunWritesArtifactsAndManifest)
{
    const auto out = dir_ / "run";
    const auto r = invoke("run " + preset("self_similar.cfg") + " --out-dir " + out.string() + " --seed 9");
    EXPECT_EQ(r.exit_code, 0) << r.err;
    EXPECT_NE(r.out.find("oracle = pass"), std::string::npos);
    EXPECT_TRUE(fs::exists(out / "profile.csv"));
    const std::string manifest = slurp(out / "manifest.txt");
    EXPECT_NE(manifest.find("# seed 9"), std::string::npos);
    EXPECT_NE(manifest.find("# file profile.csv"), std::string::npos);
}

TEST_F(Cli, ConfigErrorsExitTwoAndWriteNothing)
{
    const auto out = dir_ / "never";
    const auto bad = write_config("bad.cfg", "experiment.name = det_decay\nscheme.alpah = 1\n");
    const auto r = invoke("run " + bad.string() + " --out-dir " + out.string());
    EXPECT_EQ(r.exit_code, 2);
    EXPECT_EQ(r.err.rfind("error config exit=2:", 0), 0u) << r.err;
    EXPECT_FALSE(fs::exists(out));

    const auto invalid = invoke("run " + preset("over_budget.cfg") + " --out-dir " + out.string());
    EXPECT_EQ(invalid.exit_code, 2);
    EXPECT_FALSE(fs::exists(out));

    EXPECT_EQ(invoke("run " + (dir_ / "missing.cfg").string()).exit_code, 2);
    EXPECT_EQ(invoke("").exit_code, 2);
    EXPECT_EQ(invoke("run " + preset("det_decay.cfg") + " --threads zero").exit_code, 2);
}

TEST_F(Cli, OracleMismatchExitsFour)
{
    // A steep profile loses the ansatz to cancellation in double precision.
    const auto cfg = write_config("steep.cfg",
                                  "experiment.name = self_similar\nmodel.kind = dn\ntopology.depth = 10\n"
                                  "scheme.alpha = 1\nprofile.a0 = 1\n");
    const auto r = invoke("run " + cfg.string() + " --out-dir " + (dir_ / "steep").string());
    EXPECT_EQ(r.exit_code, 4);
    EXPECT_EQ(r.err.rfind("error oracle_mismatch exit=4:", 0), 0u) << r.err;
}

TEST_F(Cli, DivergenceExitsThree)
{
    const auto cfg = write_config("blowup.cfg",
                                  "experiment.name = det_decay\nmodel.kind = dn\ntopology.depth = 8\n"
                                  "scheme.alpha = 2\nscheme.forcing = 1\nnumerics.dt = 0.1\n"
                                  "numerics.t_end = 10\ninitial.scale = 1\n");
    const auto r = invoke("run " + cfg.string() + " --out-dir " + (dir_ / "blowup").string());
    EXPECT_EQ(r.exit_code, 3);
    EXPECT_EQ(r.err.rfind("error divergence exit=3:", 0), 0u) << r.err;
}

} // namespace
