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

#ifndef STATCSI_ERRORS_HPP
#define STATCSI_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace statcsi
{
    // Precondition or range violation on caller-supplied data
    class InvalidArgument : public std::invalid_argument
    {
    public:
        using std::invalid_argument::invalid_argument;
    };

    // Singular systems, Gram-Schmidt breakdown, non-finite intermediate results
    class NumericalError : public std::runtime_error
    {
    public:
        explicit NumericalError(const std::string &what, double condition = 0.0)
            : std::runtime_error(what), condition_(condition) {}
        double condition() const noexcept { return condition_; }

    private:
        double condition_;
    };
}

#endif
