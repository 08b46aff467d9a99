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

#include "statcsi/channel_synthesis.hpp"
#include "statcsi/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace statcsi
{
    namespace
    {
        constexpr double two_pi = 2.0 * std::numbers::pi;

        // E(i, k) = exp(sign * j 2 pi * offset_i * scale * f_k), offsets -(n-1)..(n-1)
        CMat fourier_rows(int half_width, int b, double scale, double sign)
        {
            const int w = 2 * half_width - 1;
            CMat e(w, b);
            for (int i = 0; i < w; ++i)
            {
                const int m = i - (half_width - 1);
                for (int k = 0; k < b; ++k)
                    e(i, k) = std::polar(1.0, sign * two_pi * m * scale * ApsGrid::frequency(k, b));
            }
            return e;
        }

        CorrelationLattice lattice_unchecked(const ApsGrid &aps, const BandConfig &band, int half_width)
        {
            const double scale = band_frequency_scale(aps, band);
            const CMat e = fourier_rows(half_width, aps.b, scale, 1.0);
            CorrelationLattice lat(half_width, band.spacing_ratio);
            lat.values = e * aps.values.cast<cdouble>() * e.transpose() / double(aps.b * aps.b);
            lat.symmetrize();
            lat.at(0, 0) = cdouble(lat.at(0, 0).real(), 0.0);
            return lat;
        }
    }

    ApsGrid::ApsGrid(int size, std::optional<BandConfig> tag)
        : b(size), values(RMat::Zero(size, size)), band_tag(std::move(tag)) {}

    double ApsGrid::mass() const
    {
        return values.sum() / double(b) / double(b);
    }

    void ApsGrid::validate() const
    {
        if (b < 1 || values.rows() != b || values.cols() != b)
            throw InvalidArgument("ApsGrid: values must be B x B");
        if (!values.allFinite())
            throw InvalidArgument("ApsGrid: non-finite value");
        if (values.minCoeff() < 0.0)
            throw InvalidArgument("ApsGrid: negative value");
    }

    CorrelationLattice::CorrelationLattice(int half_width, double ratio)
        : n(half_width), values(CMat::Zero(2 * half_width - 1, 2 * half_width - 1)), spacing_ratio(ratio) {}

    double CorrelationLattice::symmetry_error() const
    {
        double err = 0.0;
        for (int m = -(n - 1); m <= n - 1; ++m)
            for (int np = -(n - 1); np <= n - 1; ++np)
                err = std::max(err, std::abs(at(-m, -np) - std::conj(at(m, np))));
        return err;
    }

    void CorrelationLattice::validate() const
    {
        if (n < 1 || values.rows() != width() || values.cols() != width())
            throw InvalidArgument("CorrelationLattice: values must be (2n-1) x (2n-1)");
        if (!values.allFinite())
            throw InvalidArgument("CorrelationLattice: non-finite value");
        const double scale = std::max(1.0, std::abs(at(0, 0)));
        if (symmetry_error() > 1e-10 * scale)
            throw InvalidArgument("CorrelationLattice: conjugate symmetry violated");
        if (at(0, 0).real() < 0.0 || std::abs(at(0, 0).imag()) > 1e-10 * scale)
            throw InvalidArgument("CorrelationLattice: r(0,0) must be real and nonnegative");
    }

    void CorrelationLattice::symmetrize()
    {
        CMat out = values;
        for (int m = -(n - 1); m <= n - 1; ++m)
            for (int np = -(n - 1); np <= n - 1; ++np)
                out(m + n - 1, np + n - 1) = 0.5 * (at(m, np) + std::conj(at(-m, -np)));
        values = out;
    }

    CovarianceMatrix::CovarianceMatrix(int side, CMat mat, bool is_stationary)
        : n(side), entries(std::move(mat)), stationary(is_stationary) {}

    CovarianceMatrix::Check CovarianceMatrix::check(double herm_tol, double psd_tol, double toeplitz_tol) const
    {
        Check c;
        c.hermitian_error = (entries - entries.adjoint()).cwiseAbs().maxCoeff();
        const CMat h = 0.5 * (entries + entries.adjoint());
        Eigen::SelfAdjointEigenSolver<CMat> es(h, Eigen::EigenvaluesOnly);
        const double lmax = es.eigenvalues().maxCoeff();
        const double lmin = es.eigenvalues().minCoeff();
        c.min_eig_ratio = lmax > 0.0 ? lmin / lmax : (lmin < 0.0 ? -1.0 : 0.0);
        if (stationary)
        {
            const CorrelationLattice lat = lattice_from_covariance(*this, 0.5);
            const int s = n * n;
            for (int row = 0; row < s; ++row)
                for (int col = 0; col < s; ++col)
                {
                    const LatticeOffset o = lattice_index_map(n, row + 1, col + 1);
                    c.toeplitz_error = std::max(c.toeplitz_error, std::abs(entries(row, col) - lat.at(o.m, o.np)));
                }
        }
        c.ok = c.hermitian_error <= herm_tol && c.min_eig_ratio >= -psd_tol && c.toeplitz_error <= toeplitz_tol;
        return c;
    }

    ClusterAps generate_cluster_aps(const ClusterApsParams &p, std::uint64_t seed)
    {
        if (p.paths < 1)
            throw InvalidArgument("generate_cluster_aps: paths must be >= 1");
        if (p.b < 8)
            throw InvalidArgument("generate_cluster_aps: grid size must be >= 8");
        if (!(p.spread > 0.0))
            throw InvalidArgument("generate_cluster_aps: spread must be > 0");
        if (std::int64_t(p.paths) > std::int64_t(p.b) * p.b)
            throw InvalidArgument("generate_cluster_aps: more paths than grid cells");
        if (!(p.extent > 0.0) || p.extent > 1.0)
            throw InvalidArgument("generate_cluster_aps: extent must lie in (0, 1]");
        if (!(p.spacing_ratio > 0.0) || p.spacing_ratio > 0.5)
            throw InvalidArgument("generate_cluster_aps: spacing_ratio must lie in (0, 0.5]");

        Rng rng(seed);
        std::uniform_real_distribution<double> pos(-p.extent, p.extent);
        std::uniform_real_distribution<double> unit(0.0, 1.0);

        ClusterAps out;
        BandConfig tag;
        tag.spacing_ratio = p.spacing_ratio;
        out.aps = ApsGrid(p.b, tag);
        std::vector<double> cu(p.paths), cv(p.paths);
        for (auto &x : cu)
            x = pos(rng);
        for (auto &x : cv)
            x = pos(rng);
        out.powers.resize(p.paths);
        for (auto &x : out.powers)
            x = std::exp(-p.power_decay * unit(rng));
        double total = 0.0;
        for (double x : out.powers)
            total += x;
        for (auto &x : out.powers)
            x /= total;

        const int b = p.b;
        const double sigma = p.spread * p.spacing_ratio;
        const double reach = 3.0 * sigma + 1.0 / b;
        RMat kernel(b, b);
        for (int c = 0; c < p.paths; ++c)
        {
            const double fu = p.spacing_ratio * cu[c], fv = p.spacing_ratio * cv[c];
            out.centers_cosine.push_back({cu[c], cv[c]});
            out.centers_freq.push_back({fu, fv});
            kernel.setZero();
            for (int k = 0; k < b; ++k)
            {
                const double du = ApsGrid::frequency(k, b) - fu;
                if (std::abs(du) > reach)
                    continue;
                for (int l = 0; l < b; ++l)
                {
                    const double dv = ApsGrid::frequency(l, b) - fv;
                    if (std::abs(dv) > reach)
                        continue;
                    kernel(k, l) = std::exp(-(du * du + dv * dv) / (2.0 * sigma * sigma));
                }
            }
            double ks = kernel.sum();
            if (!(ks > 0.0))
            {
                const int k = std::clamp(int(std::lround((fu + 0.5) * b)), 0, b - 1);
                const int l = std::clamp(int(std::lround((fv + 0.5) * b)), 0, b - 1);
                kernel(k, l) = 1.0;
                ks = 1.0;
            }
            out.aps.values += (out.powers[c] / ks) * kernel;
        }
        out.aps.values *= 1.0 / out.aps.mass();
        return out;
    }

    double band_frequency_scale(const ApsGrid &aps, const BandConfig &band)
    {
        if (!aps.band_tag)
            return 1.0;
        return band.spacing_ratio / aps.band_tag->spacing_ratio;
    }

    CorrelationLattice lattice_from_aps(const ApsGrid &aps, const BandConfig &band, int half_width)
    {
        aps.validate();
        band.validate();
        if (half_width < 1)
            throw InvalidArgument("lattice_from_aps: half_width must be >= 1");
        if (2 * half_width - 1 > aps.b)
            throw InvalidArgument("lattice_from_aps: 2 * half_width - 1 exceeds the grid size");
        return lattice_unchecked(aps, band, half_width);
    }

    CovarianceMatrix covariance_from_lattice(const CorrelationLattice &lattice, int n)
    {
        if (n < 1 || n > lattice.n)
            throw InvalidArgument("covariance_from_lattice: lattice half-width smaller than array size");
        const int s = n * n;
        CMat r(s, s);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c)
                    for (int d = 0; d < n; ++d)
                        r(a * n + b, c * n + d) = lattice.at(c - a, d - b);
        return CovarianceMatrix(n, std::move(r), true);
    }

    CovarianceMatrix covariance_from_aps(const ApsGrid &aps, const BandConfig &band)
    {
        aps.validate();
        band.validate();
        return covariance_from_lattice(lattice_unchecked(aps, band, band.n), band.n);
    }

    CorrelationLattice lattice_from_covariance(const CovarianceMatrix &cov, double spacing_ratio)
    {
        const int n = cov.n;
        if (n < 1 || cov.entries.rows() != n * n || cov.entries.cols() != n * n)
            throw InvalidArgument("lattice_from_covariance: entries must be n^2 x n^2");
        CorrelationLattice lat(n, spacing_ratio);
        Eigen::MatrixXi count = Eigen::MatrixXi::Zero(lat.width(), lat.width());
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c)
                    for (int d = 0; d < n; ++d)
                    {
                        lat.at(c - a, d - b) += cov.entries(a * n + b, c * n + d);
                        count(c - a + n - 1, d - b + n - 1) += 1;
                    }
        for (int i = 0; i < lat.width(); ++i)
            for (int j = 0; j < lat.width(); ++j)
                lat.values(i, j) /= double(count(i, j));
        lat.symmetrize();
        lat.at(0, 0) = cdouble(lat.at(0, 0).real(), 0.0);
        return lat;
    }

    CVec sample_channel(const ApsGrid &aps, const BandConfig &band, Rng &rng)
    {
        aps.validate();
        band.validate();
        const int b = aps.b, n = band.n;
        const double scale = band_frequency_scale(aps, band);
        std::normal_distribution<double> gauss(0.0, 1.0);
        CMat alpha(b, b);
        const double cell = 1.0 / double(b) / double(b);
        for (int k = 0; k < b; ++k)
            for (int l = 0; l < b; ++l)
            {
                const double re = gauss(rng);
                const double im = gauss(rng);
                alpha(k, l) = std::sqrt(0.5 * aps.values(k, l) * cell) * cdouble(re, im);
            }
        // ez(a, k) = exp(-j 2 pi a f_k)
        CMat ez(n, b);
        for (int a = 0; a < n; ++a)
            for (int k = 0; k < b; ++k)
                ez(a, k) = std::polar(1.0, -two_pi * a * scale * ApsGrid::frequency(k, b));
        const CMat g = ez * alpha * ez.transpose();
        CVec out(n * n);
        for (int a = 0; a < n; ++a)
            for (int c = 0; c < n; ++c)
                out[a * n + c] = g(a, c);
        return out;
    }

    CVec sample_channel(const ApsGrid &aps, const BandConfig &band, std::uint64_t seed)
    {
        Rng rng(seed);
        return sample_channel(aps, band, rng);
    }

    CovarianceMatrix sample_covariance(const std::vector<CVec> &channels)
    {
        if (channels.empty())
            throw InvalidArgument("sample_covariance: no channels");
        const Eigen::Index len = channels.front().size();
        const int n = int(std::lround(std::sqrt(double(len))));
        if (n * n != len)
            throw InvalidArgument("sample_covariance: channel length is not a square");
        CMat r = CMat::Zero(len, len);
        for (const auto &g : channels)
        {
            if (g.size() != len)
                throw InvalidArgument("sample_covariance: channels differ in length");
            r.noalias() += g * g.adjoint();
        }
        r /= double(channels.size());
        r = 0.5 * (r + r.adjoint()).eval();
        return CovarianceMatrix(n, std::move(r), false);
    }

    CorrelationLattice add_lattice_noise(const CorrelationLattice &lattice, double snr_db, double mass)
    {
        CorrelationLattice out = lattice;
        out.at(0, 0) += mass * std::pow(10.0, -snr_db / 10.0);
        return out;
    }
}
