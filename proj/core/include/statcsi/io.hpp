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

#ifndef STATCSI_IO_HPP
#define STATCSI_IO_HPP

#include "statcsi/channel_synthesis.hpp"

#include <string>
#include <vector>

namespace statcsi
{
    // Shortest round-trip decimal representation
    std::string format_double(double x);

    // Parse a comma-separated numeric table; throws InvalidArgument naming the file on malformed input
    std::vector<std::vector<double>> read_numeric_csv(const std::string &path);

    // B rows x B columns, row-major, first index along u
    void write_aps_csv(const std::string &path, const ApsGrid &aps);
    ApsGrid read_aps_csv(const std::string &path);

    // Two (2n-1) x (2n-1) files, offset (-(n-1), -(n-1)) at the top-left
    void write_lattice_csv(const std::string &real_path, const std::string &imag_path, const CorrelationLattice &lat);
    CorrelationLattice read_lattice_csv(const std::string &real_path, const std::string &imag_path,
                                        double spacing_ratio = 0.5);
}

#endif
