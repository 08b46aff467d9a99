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

#ifndef STATCSI_CHANNEL_SYNTHESIS_HPP
#define STATCSI_CHANNEL_SYNTHESIS_HPP

#include "statcsi/array_geometry.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace statcsi
{
    using Rng = std::mt19937_64;

    // Nonnegative angular power spectrum on a B x B grid.
    // values(k, l) is the density at angular frequencies (k/B - 1/2, l/B - 1/2),
    // first axis pairs with u (z-axis), second with v (x-axis).
    struct ApsGrid
    {
        int b = 0;
        RMat values;
        std::optional<BandConfig> band_tag; // Band whose spacing ratio defines the angular frequencies

        ApsGrid() = default;
        ApsGrid(int size, std::optional<BandConfig> tag = std::nullopt);

        static double frequency(int k, int b) { return double(k) / double(b) - 0.5; }
        double mass() const; // sum(values) / B^2
        void validate() const;
    };

    // Hermitian-symmetric lattice r(m, n') for |m|, |n'| <= n - 1
    struct CorrelationLattice
    {
        int n = 0;
        CMat values; // (2n-1) x (2n-1), entry (m + n - 1, n' + n - 1)
        double spacing_ratio = 0.5;

        CorrelationLattice() = default;
        CorrelationLattice(int half_width, double ratio = 0.5);

        int width() const { return 2 * n - 1; }
        cdouble at(int m, int np) const { return values(m + n - 1, np + n - 1); }
        cdouble &at(int m, int np) { return values(m + n - 1, np + n - 1); }
        bool contains(int m, int np) const { return std::abs(m) <= n - 1 && std::abs(np) <= n - 1; }

        double symmetry_error() const; // max |r(-m,-n') - conj r(m,n')|
        void validate() const;         // conjugate symmetry and real nonnegative r(0,0)
        void symmetrize();             // replace by (r + conj(flip(r))) / 2
    };

    struct CovarianceMatrix
    {
        int n = 0;
        CMat entries;            // n^2 x n^2
        bool stationary = true;  // Block-Toeplitz structure holds (false for sample estimates)

        CovarianceMatrix() = default;
        CovarianceMatrix(int side, CMat mat, bool is_stationary);

        struct Check
        {
            double hermitian_error = 0.0;
            double min_eig_ratio = 0.0;   // lambda_min / lambda_max
            double toeplitz_error = 0.0;  // max deviation from offset-mean, 0 if not stationary
            bool ok = false;
        };
        Check check(double herm_tol = 1e-12, double psd_tol = 1e-9, double toeplitz_tol = 1e-10) const;
    };

    struct ClusterAps
    {
        ApsGrid aps;
        std::vector<Direction> centers_cosine; // Cluster centers (u, v) in directional cosines
        std::vector<Direction> centers_freq;   // Same centers in angular frequency (spacing_ratio * cosine)
        std::vector<double> powers;            // Normalized cluster powers, sum = 1
    };

    struct ClusterApsParams
    {
        int b = 32;
        int paths = 8;
        double spread = 0.02;      // Std-dev per axis in directional cosine units
        double power_decay = 1.0;  // Cluster power exp(-decay * U), U ~ Uniform(0, 1)
        double extent = 0.9;       // Centers drawn with |u|, |v| <= extent
        double spacing_ratio = 0.5;
    };

    ClusterAps generate_cluster_aps(const ClusterApsParams &params, std::uint64_t seed);

    // Angular-frequency scale factor from the APS grid to the given band
    double band_frequency_scale(const ApsGrid &aps, const BandConfig &band);

    CovarianceMatrix covariance_from_aps(const ApsGrid &aps, const BandConfig &band);
    CorrelationLattice lattice_from_aps(const ApsGrid &aps, const BandConfig &band, int half_width);

    // Assemble the n^2 x n^2 covariance from a lattice with half-width >= n
    CovarianceMatrix covariance_from_lattice(const CorrelationLattice &lattice, int n);
    // Average all covariance entries that share a lattice offset, then Hermitian-symmetrize
    CorrelationLattice lattice_from_covariance(const CovarianceMatrix &cov, double spacing_ratio);

    CVec sample_channel(const ApsGrid &aps, const BandConfig &band, Rng &rng);
    CVec sample_channel(const ApsGrid &aps, const BandConfig &band, std::uint64_t seed);

    CovarianceMatrix sample_covariance(const std::vector<CVec> &channels);

    // Add white measurement noise sigma^2 = mass / snr to r(0,0)
    CorrelationLattice add_lattice_noise(const CorrelationLattice &lattice, double snr_db, double mass = 1.0);
}

#endif
