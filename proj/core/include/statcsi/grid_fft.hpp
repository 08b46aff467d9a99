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

#ifndef STATCSI_GRID_FFT_HPP
#define STATCSI_GRID_FFT_HPP

#include "statcsi/channel_synthesis.hpp"

#include <memory>

namespace statcsi
{
    // Transform pair between lattice arrays stored at wrapped indices (m mod B, n' mod B)
    // and spectra on the angular-frequency grid (k/B - 1/2, l/B - 1/2).
    //   forward:  P(k,l) = sum_{m,n'} x(m,n') exp(-j 2 pi (m u_k + n' v_l))
    //   inverse:  x(m,n') = B^-2 sum_{k,l} P(k,l) exp(+j 2 pi (m u_k + n' v_l))
    // One instance is not safe for concurrent use; create one per worker.
    class GridFft
    {
    public:
        explicit GridFft(int b);
        ~GridFft();
        GridFft(const GridFft &) = delete;
        GridFft &operator=(const GridFft &) = delete;

        int size() const { return b_; }
        CMat forward(const CMat &lattice_wrapped);
        CMat inverse(const CMat &spectrum);

    private:
        struct Impl;
        int b_;
        std::unique_ptr<Impl> impl_;
    };

    // Place r(m,n') at (m mod B, n' mod B); all other cells zero
    CMat embed_lattice(const CorrelationLattice &lattice, int b);
    CorrelationLattice extract_lattice(const CMat &wrapped, int half_width, double spacing_ratio = 0.5);
}

#endif
