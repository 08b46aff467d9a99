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

#include "statcsi/version.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char **argv)
{
    using namespace statcsi::harness;
    CLI::App app{"statcsi: multi-band spatial covariance and APS estimation experiments"};
    app.set_version_flag("--version", std::string(statcsi::version));
    app.require_subcommand(1);

    std::string config_path, out_dir, seeds_text, result_dir;
    int threads = 0;
    auto *run_cmd = app.add_subcommand("run", "Run an experiment described by a JSON config");
    run_cmd->add_option("config", config_path, "Experiment config (JSON)")->required();
    run_cmd->add_option("--out", out_dir, "Output directory (overrides output_dir)");
    run_cmd->add_option("--seeds", seeds_text, "Comma-separated seed list (overrides seeds)");
    run_cmd->add_option("--threads", threads, "Worker threads (overrides threads)")->check(CLI::PositiveNumber);

    auto *sum_cmd = app.add_subcommand("summarize", "Print mean and spread of a result directory");
    sum_cmd->add_option("dir", result_dir, "Result directory containing manifest.json")->required();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int rc = app.exit(e);
        return rc == 0 ? exit_ok : exit_config;
    }

    if (*run_cmd)
    {
        RunOverrides ov;
        if (!out_dir.empty())
            ov.output_dir = out_dir;
        if (threads > 0)
            ov.threads = threads;
        if (run_cmd->count("--seeds"))
        {
            try
            {
                ov.seeds = parse_seed_list(seeds_text);
            }
            catch (const ConfigError &e)
            {
                std::cerr << "config error: " << e.what() << "\n";
                return exit_config;
            }
        }
        return run(config_path, ov, std::cout, std::cerr);
    }
    return summarize(result_dir, std::cout, std::cerr);
}
