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

#ifndef STATCSI_ME_APS_HPP
#define STATCSI_ME_APS_HPP

#include "statcsi/covariance_extrapolation.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace statcsi
{
    struct MeConfig
    {
        int fft_size = 32;
        std::optional<double> eps_min;    // Unset: 1e-4 times the number of constrained cells
        int max_iters = 500;
        double k0 = 1.0;                  // Initial convergence-rate factor
        double pos_floor = 1e-12;         // Reciprocal clamp, relative to the spectrum grid mean
        double eps_initial = 1.0;         // epsilon_0 compared against epsilon_1
        double k_halving_tolerance = 0.2; // Halve k only if eps_d > eps_{d-1} (1 + tol); 0 is the strict rule
        bool alpha_monotone = false;      // true: alpha_d = max(alpha_{d-1}, 1 - k alpha_inf)

        void validate(int lattice_half_width) const;
    };

    struct MeDiagnostics
    {
        int iterations_run = 0;
        std::vector<double> eps_trace;
        std::vector<double> alpha_trace;
        std::vector<double> beta_trace;
        std::vector<double> k_trace;
        std::vector<double> min_ratio_trace; // Pre-clamp min / mean over the spectra reciprocated this iteration
        bool converged = false;
        bool clamped = false; // Any reciprocal hit pos_floor
        double eps_min = 0.0;
        double final_eps = 0.0; // Residual of the returned spectrum
    };

    struct MeResult
    {
        ApsGrid spectrum;
        MeDiagnostics diagnostics;
    };

    // Number of constrained cells with |r| >= 1e-15
    int constrained_cells(const CorrelationLattice &lattice);
    double default_eps_min(const CorrelationLattice &lattice);

    // sum over the window of |known - current|^2 / |known|^2, cells with |known| < 1e-15 skipped
    double residual(const CorrelationLattice &current, const CorrelationLattice &known);

    // alpha rule on spectra: spec_rprime = DFT(r'), spec_correction = DFT((r - r') w)
    struct AlphaStep
    {
        double alpha = 0.0;
        double alpha_inf = 0.0;
        bool negative = false;
    };
    AlphaStep alpha_step(const RMat &spec_rprime, const RMat &spec_correction, double k, double alpha_prev,
                         bool monotone = true);

    // beta rule on spectra: spec_cprime = DFT(c' w), spec_cprev = DFT(c1^{d-1})
    double beta_step(const RMat &spec_cprime, const RMat &spec_cprev, double k);

    MeResult me_estimate(const CorrelationLattice &lattice, const MeConfig &cfg = {});

    struct ArSpectrum
    {
        ApsGrid spectrum;
        bool clamped = false;
    };

    // sigma^2 / |1 + sum a(q,l) exp(-j 2 pi (q u + l v))|^2 on the B x B grid
    ArSpectrum ar_spectrum(const ArModel &model, int b, double pos_floor = 1e-12);
    ArSpectrum ar_spectrum(const CorrelationLattice &lattice, int b, double pos_floor = 1e-12);

    // Strict local maxima over the 8 wrapped neighbours above rel_threshold * max
    std::vector<std::pair<int, int>> find_peaks(const ApsGrid &aps, double rel_threshold = 0.05);
    int frequency_cell(double f, int b);
    // True centers (angular frequency) with a peak within Chebyshev distance tol cells, wrapped
    int count_matched(const std::vector<std::pair<int, int>> &peaks, const std::vector<Direction> &centers_freq, int b,
                      int tol = 1);
}

#endif
