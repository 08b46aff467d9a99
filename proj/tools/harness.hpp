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

#ifndef STATCSI_HARNESS_HPP
#define STATCSI_HARNESS_HPP

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace statcsi::harness
{
    inline constexpr int exit_ok = 0;
    inline constexpr int exit_config = 2;
    inline constexpr int exit_numerical = 3;

    // Schema violation; message starts with the offending field path
    class ConfigError : public std::runtime_error
    {
    public:
        ConfigError(const std::string &path, const std::string &what)
            : std::runtime_error(path + ": " + what), path_(path) {}
        const std::string &path() const noexcept { return path_; }

    private:
        std::string path_;
    };

    struct RunOverrides
    {
        std::optional<std::string> output_dir;
        std::optional<std::vector<std::uint64_t>> seeds;
        std::optional<int> threads;
    };

    // Merge user config with the built-in profile and validate; throws ConfigError
    nlohmann::json resolve_config(const nlohmann::json &user, const RunOverrides &overrides = {});

    // Execute a resolved config; returns the list of files written (relative to the output dir)
    std::vector<std::string> execute(const nlohmann::json &resolved, std::ostream &log);

    // CLI entry points returning process exit codes
    int run(const std::string &config_path, const RunOverrides &overrides, std::ostream &out, std::ostream &err);
    int summarize(const std::string &result_dir, std::ostream &out, std::ostream &err);

    std::vector<std::uint64_t> parse_seed_list(const std::string &text); // "1,2,3"; throws ConfigError
}

#endif
