// SPDX-License-Identifier: Apache-2.0
//
// statcsi: statistical CSI acquisition for multi-band planar arrays
// Copyright (C) 2026 The statcsi authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------


#include "harness.hpp"

#include "statcsi/statcsi.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

using namespace statcsi::harness;
using nlohmann::json;
namespace fs = std::filesystem;

namespace
{
    fs::path scratch(const std::string &name)
    {
        const fs::path p = fs::temp_directory_path() / ("statcsi_harness_" + name);
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }

    std::string slurp(const fs::path &p)
    {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    fs::path write_config(const fs::path &dir, const json &cfg)
    {
        const fs::path p = dir / "config.json";
        std::ofstream(p) << cfg.dump(2);
        return p;
    }

    std::string config_error(const json &user)
    {
        try
        {
            resolve_config(user);
        }
        catch (const ConfigError &e)
        {
            return e.path();
        }
        return "";
    }

    json quick_cov(const fs::path &out)
    {
        return {{"experiment", "cov-nmse"},
                {"seeds", {1, 2}},
                {"output_dir", out.string()},
                {"scenario", {{"paths", {3, 6}}}}};
    }
}

TEST(Config, DefaultsMirrorSimulationTable)
{
    const json r = resolve_config({{"experiment", "sumrate"}});
    const json &sc = r["scenario"];
    ASSERT_EQ(sc["bands"].size(), 3u);
    EXPECT_EQ(sc["bands"][0]["carrier_hz"], 2.4e9);
    EXPECT_EQ(sc["bands"][1]["carrier_hz"], 3.0e9);
    EXPECT_EQ(sc["bands"][2]["carrier_hz"], 3.6e9);
    EXPECT_EQ(sc["bands"][0]["n"], 8);
    EXPECT_EQ(sc["bands"][1]["n"], 10);
    EXPECT_EQ(sc["bands"][2]["n"], 12);
    EXPECT_EQ(sc["k_users"], 12);
    EXPECT_EQ(sc["n_slots"], 200);
    EXPECT_EQ(sc["blocks_per_slot"], 5);
    EXPECT_EQ(sc["codebook_oversampling"], 4);
    EXPECT_EQ(sc["aging_eta"], 0.95);
    EXPECT_EQ(sc["spread"], 0.02);
    EXPECT_DOUBLE_EQ(r["me"]["eps_min"].get<double>(), 1e-4 * 225.0);
    EXPECT_EQ(r["me"]["pos_floor"], 1e-12);
    EXPECT_EQ(r["me"]["max_iters"], 500);
    EXPECT_FALSE(r["seeds"].empty());
    EXPECT_EQ(r["output_dir"], "results/sumrate");
}

TEST(Config, ResolutionIsIdempotent)
{
    const json r = resolve_config({{"experiment", "aps-figure"}, {"seeds", {4}}});
    EXPECT_EQ(resolve_config(r), r);
}

TEST(Config, OverridesApply)
{
    RunOverrides ov;
    ov.output_dir = "elsewhere";
    ov.seeds = std::vector<std::uint64_t>{9, 8};
    ov.threads = 3;
    const json r = resolve_config({{"experiment", "cov-nmse"}, {"seeds", {1}}}, ov);
    EXPECT_EQ(r["output_dir"], "elsewhere");
    EXPECT_EQ(r["seeds"], json({9, 8}));
    EXPECT_EQ(r["threads"], 3);
}

TEST(Config, SchemaErrorsCarryFieldPaths)
{
    EXPECT_EQ(config_error({{"experiment", "nope"}}), "experiment");
    EXPECT_EQ(config_error({{"experiment", "cov-nmse"}, {"seeds", json::array()}}), "seeds");
    EXPECT_EQ(config_error({{"experiment", "cov-nmse"}, {"seeds", {1, -2}}}), "seeds[1]");
    EXPECT_EQ(config_error({{"experiment", "cov-nmse"}, {"typo", 1}}), "typo");
    EXPECT_EQ(config_error({{"experiment", "cov-nmse"}, {"scenario", {{"k_users", "12"}}}}), "scenario.k_users");
    EXPECT_EQ(config_error({{"experiment", "cov-nmse"}, {"scenario", {{"bands", {{{"n", 8}}, {{"n", 10}, {"spacing_ratio", 0.7}}}}}}}),
              "scenario.bands[1].spacing_ratio");
    EXPECT_EQ(config_error({{"experiment", "cov-nmse"}, {"scenario", {{"bands", {{{"carrier_hz", 1e9}}}}}}}), "scenario.bands[0].n");
    EXPECT_EQ(config_error({{"experiment", "cov-nmse"}, {"me", {{"k0", 2.0}}}}), "me.k0");
    EXPECT_EQ(config_error({{"experiment", "cov-nmse"}, {"scenario", {{"methods", {"MF", "CS-RB"}}}}}), "scenario.methods[1]");
    EXPECT_EQ(config_error({{"experiment", "cov-nmse"}, {"scenario", {{"grid_size", 16}}}}), "scenario.grid_size");
    EXPECT_EQ(config_error(json::array()), "<root>");
    EXPECT_THROW(parse_seed_list("1,,2"), ConfigError);
    EXPECT_EQ(parse_seed_list("3,1,2"), (std::vector<std::uint64_t>{3, 1, 2}));
}

TEST(Run, EmptySeedsWritesNothing)
{
    const fs::path dir = scratch("empty_seeds");
    json cfg = quick_cov(dir / "out");
    cfg["seeds"] = json::array();
    std::ostringstream out, err;
    EXPECT_EQ(run(write_config(dir, cfg).string(), {}, out, err), exit_config);
    EXPECT_FALSE(fs::exists(dir / "out"));
    EXPECT_NE(err.str().find("seeds"), std::string::npos);
}

TEST(Run, MalformedJsonIsConfigError)
{
    const fs::path dir = scratch("malformed");
    std::ofstream(dir / "bad.json") << "{ \"experiment\": ";
    std::ostringstream out, err;
    EXPECT_EQ(run((dir / "bad.json").string(), {}, out, err), exit_config);
    EXPECT_EQ(run((dir / "missing.json").string(), {}, out, err), exit_config);
}

TEST(Run, NumericalFailureCleansUp)
{
    const fs::path dir = scratch("numerical");
    const json cfg = {{"experiment", "cov-nmse"},
                      {"seeds", {1}},
                      {"output_dir", (dir / "out").string()},
                      {"scenario", {{"paths", {1}}, {"measurement_snr_db", 400.0}}},
                      {"ar", {{"ridge", 0.0}, {"cond_threshold", 1e300}}}};
    std::ostringstream out, err;
    EXPECT_EQ(run(write_config(dir, cfg).string(), {}, out, err), exit_numerical);
    EXPECT_FALSE(fs::exists(dir / "out"));
}

TEST(Run, CovNmseLayoutAndManifest)
{
    const fs::path dir = scratch("cov");
    std::ostringstream out, err;
    ASSERT_EQ(run(write_config(dir, quick_cov(dir / "out")).string(), {}, out, err), exit_ok) << err.str();
    std::ifstream csv(dir / "out" / "nmse_vs_paths.csv");
    std::string header;
    std::getline(csv, header);
    EXPECT_EQ(header, "method,target_n,paths,seed,nmse");
    int rows = 0;
    for (std::string l; std::getline(csv, l);)
        ++rows;
    EXPECT_EQ(rows, 2 * 2 * 2 * 2); // seeds x paths x targets x methods
    const json m = json::parse(slurp(dir / "out" / "manifest.json"));
    EXPECT_EQ(m["version"], statcsi::version);
    EXPECT_EQ(m["config"]["experiment"], "cov-nmse");
    EXPECT_TRUE(m["config"]["me"].contains("eps_min"));
    EXPECT_TRUE(m["config"]["me"].contains("pos_floor"));
    EXPECT_TRUE(m["config"]["scenario"].contains("codebook_oversampling"));
    EXPECT_TRUE(m["config"]["scenario"].contains("aging_eta"));
    EXPECT_TRUE(m["config"]["scenario"].contains("spread"));
}

TEST(Run, ApsFigureWritesGridsAndTrace)
{
    const fs::path dir = scratch("apsfig");
    const json cfg = {{"experiment", "aps-figure"}, {"seeds", {3}}, {"output_dir", (dir / "out").string()}};
    std::ostringstream out, err;
    ASSERT_EQ(run(write_config(dir, cfg).string(), {}, out, err), exit_ok) << err.str();
    for (const char *f : {"aps_true_p8_seed3.csv", "aps_ar_p8_seed3.csv", "aps_me_p8_seed3.csv",
                          "lattice_p8_seed3_re.csv", "lattice_p8_seed3_im.csv", "me_trace_p8_seed3.json", "peaks.csv"})
        EXPECT_TRUE(fs::exists(dir / "out" / f)) << f;
    const statcsi::ApsGrid me = statcsi::read_aps_csv((dir / "out" / "aps_me_p8_seed3.csv").string());
    EXPECT_EQ(me.b, 32);
    const statcsi::CorrelationLattice lat = statcsi::read_lattice_csv(
        (dir / "out" / "lattice_p8_seed3_re.csv").string(), (dir / "out" / "lattice_p8_seed3_im.csv").string(), 0.5);
    EXPECT_EQ(lat.n, 8);
    const json tr = json::parse(slurp(dir / "out" / "me_trace_p8_seed3.json"));
    EXPECT_EQ(tr["eps_trace"].size(), tr["iterations_run"].get<std::size_t>());
}

TEST(Run, ByteIdenticalAcrossRunsAndThreads)
{
    const fs::path dir = scratch("determinism");
    const fs::path cfg = write_config(dir, {{"experiment", "aps-nmse-sweep"}, {"seeds", {1, 2, 3}}, {"scenario", {{"paths", {4, 8}}}}});
    std::ostringstream out, err;
    RunOverrides a, b;
    a.output_dir = (dir / "a").string();
    a.threads = 1;
    b.output_dir = (dir / "b").string();
    b.threads = 4;
    ASSERT_EQ(run(cfg.string(), a, out, err), exit_ok) << err.str();
    ASSERT_EQ(run(cfg.string(), b, out, err), exit_ok) << err.str();
    EXPECT_EQ(slurp(dir / "a" / "aps_nmse.csv"), slurp(dir / "b" / "aps_nmse.csv"));
}

TEST(Summarize, AggregatesAndIsDeterministic)
{
    const fs::path dir = scratch("summarize");
    std::ostringstream out, err;
    ASSERT_EQ(run(write_config(dir, quick_cov(dir / "out")).string(), {}, out, err), exit_ok);
    std::ostringstream s1, s2, e;
    EXPECT_EQ(summarize((dir / "out").string(), s1, e), exit_ok);
    EXPECT_EQ(summarize((dir / "out").string(), s2, e), exit_ok);
    EXPECT_EQ(s1.str(), s2.str());
    EXPECT_NE(s1.str().find("method=AR  target_n=10  paths=3"), std::string::npos) << s1.str();
    EXPECT_NE(s1.str().find("(n=2)"), std::string::npos);
}

TEST(Summarize, MeanAndStdOfKnownRows)
{
    const fs::path dir = scratch("known_rows");
    std::ofstream(dir / "nmse_vs_paths.csv") << "method,target_n,paths,seed,nmse\nAR,10,5,1,1\nAR,10,5,2,3\n";
    const json manifest = {{"version", "x"},
                           {"config", {{"experiment", "cov-nmse"}}},
                           {"files", {{{"name", "nmse_vs_paths.csv"}, {"group_by", {"method", "paths"}}, {"value", "nmse"}}}}};
    std::ofstream(dir / "manifest.json") << manifest.dump();
    std::ostringstream out, err;
    EXPECT_EQ(summarize(dir.string(), out, err), exit_ok);
    EXPECT_NE(out.str().find("method=AR  paths=5  2 +- 1.41421  (n=2)"), std::string::npos) << out.str();
}

TEST(Summarize, ErrorsNameTheProblem)
{
    const fs::path dir = scratch("summarize_err");
    std::ostringstream out, err;
    EXPECT_EQ(summarize(dir.string(), out, err), exit_config);
    EXPECT_NE(err.str().find("manifest"), std::string::npos);

    ASSERT_EQ(run(write_config(dir, quick_cov(dir / "out")).string(), {}, out, err), exit_ok);
    std::ofstream(dir / "out" / "nmse_vs_paths.csv", std::ios::app) << "AR,10,3,9,not-a-number\n";
    std::ostringstream err2;
    EXPECT_EQ(summarize((dir / "out").string(), out, err2), exit_config);
    EXPECT_NE(err2.str().find("nmse_vs_paths.csv"), std::string::npos) << err2.str();
}

TEST(Cli, ExitCodes)
{
    const fs::path dir = scratch("cli");
    const std::string cli = STATCSI_CLI_PATH;
    const fs::path cfg = write_config(dir, quick_cov(dir / "out"));
    auto sh = [](const std::string &cmd) {
        const int rc = std::system((cmd + " > /dev/null 2>&1").c_str());
        return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    };
    EXPECT_EQ(sh(cli + " run " + cfg.string() + " --threads 2"), 0);
    EXPECT_EQ(sh(cli + " summarize " + (dir / "out").string()), 0);
    EXPECT_EQ(sh(cli + " run " + cfg.string() + " --seeds 1,x"), 2);
    EXPECT_EQ(sh(cli + " run"), 2);
    EXPECT_EQ(sh(cli + " bogus"), 2);
    EXPECT_EQ(sh(cli + " summarize " + dir.string() + "/nowhere"), 2);
}
