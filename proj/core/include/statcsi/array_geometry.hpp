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

#ifndef STATCSI_ARRAY_GEOMETRY_HPP
#define STATCSI_ARRAY_GEOMETRY_HPP

#include <Eigen/Dense>
#include <complex>
#include <string>

namespace statcsi
{
    using cdouble = std::complex<double>;
    using CVec = Eigen::VectorXcd;
    using CMat = Eigen::MatrixXcd;
    using RMat = Eigen::MatrixXd;

    // One carrier band of an n x n uniform planar array
    struct BandConfig
    {
        std::string label = "f1";
        double carrier_hz = 2.4e9;
        int n = 8;                  // Antennas per side
        double spacing_ratio = 0.5; // d / lambda

        void validate() const; // Throws InvalidArgument
        double wavelength() const;
        double spacing_m() const; // Physical spacing d in [m]
    };

    // Arrival direction in directional cosines, u = sin(theta) cos(phi), v = cos(theta)
    struct Direction
    {
        double u = 0.0;
        double v = 0.0;
    };

    // Steering vector v_z(u) (x) v_x(v) of length n^2.
    // Entry (a, b) sits at index a * n + b (0-based), a = z-row, b = x-column.
    CVec steering_vector(const BandConfig &band, const Direction &dir);

    // Same vector parameterized directly by angular frequencies (spacing_ratio * cosine).
    // No range check; used on DFT grids that may map outside the physical sphere.
    CVec steering_vector_angular(int n, double fu, double fv);

    struct LatticeOffset
    {
        int m = 0;  // Offset along the z-axis (pairs with angular frequency u)
        int np = 0; // Offset along the x-axis (pairs with angular frequency v)
        bool operator==(const LatticeOffset &) const = default;
    };

    // Lattice offset of covariance entry (row, col), both 1-based in [1, n^2].
    // With row = (a-1) n + b and col = (c-1) n + d the offset is (c - a, d - b).
    LatticeOffset lattice_index_map(int n, int row, int col);
    LatticeOffset lattice_index_map(const BandConfig &band, int row, int col);
}

#endif
