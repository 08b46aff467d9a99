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

#include "statcsi/array_geometry.hpp"
#include "statcsi/errors.hpp"

#include <cmath>
#include <numbers>

namespace statcsi
{
    void BandConfig::validate() const
    {
        if (n < 2)
            throw InvalidArgument("band '" + label + "': n must be >= 2");
        if (!(spacing_ratio > 0.0) || spacing_ratio > 0.5)
            throw InvalidArgument("band '" + label + "': spacing_ratio must lie in (0, 0.5]");
        if (!(carrier_hz > 0.0) || !std::isfinite(carrier_hz))
            throw InvalidArgument("band '" + label + "': carrier_hz must be positive");
    }

    double BandConfig::wavelength() const
    {
        return 299792458.0 / carrier_hz;
    }

    double BandConfig::spacing_m() const
    {
        return spacing_ratio * wavelength();
    }

    CVec steering_vector_angular(int n, double fu, double fv)
    {
        const double two_pi = 2.0 * std::numbers::pi;
        CVec vz(n), vx(n);
        for (int k = 0; k < n; ++k)
        {
            vz[k] = std::polar(1.0, -two_pi * k * fu);
            vx[k] = std::polar(1.0, -two_pi * k * fv);
        }
        CVec out(n * n);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                out[a * n + b] = vz[a] * vx[b];
        return out;
    }

    CVec steering_vector(const BandConfig &band, const Direction &dir)
    {
        band.validate();
        if (!(std::abs(dir.u) <= 1.0) || !(std::abs(dir.v) <= 1.0))
            throw InvalidArgument("direction cosines must satisfy |u| <= 1 and |v| <= 1");
        return steering_vector_angular(band.n, band.spacing_ratio * dir.u, band.spacing_ratio * dir.v);
    }

    LatticeOffset lattice_index_map(int n, int row, int col)
    {
        if (n < 2)
            throw InvalidArgument("lattice_index_map: n must be >= 2");
        const int size = n * n;
        if (row < 1 || row > size || col < 1 || col > size)
            throw InvalidArgument("lattice_index_map: index out of range [1, n^2]");
        const int a = (row - 1) / n, b = (row - 1) % n;
        const int c = (col - 1) / n, d = (col - 1) % n;
        return {c - a, d - b};
    }

    LatticeOffset lattice_index_map(const BandConfig &band, int row, int col)
    {
        band.validate();
        return lattice_index_map(band.n, row, col);
    }
}
