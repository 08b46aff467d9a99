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

#include "statcsi/me_aps.hpp"
#include "statcsi/errors.hpp"
#include "statcsi/grid_fft.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace statcsi
{
    namespace
    {
        constexpr double tiny_known = 1e-15;

        struct Window
        {
            std::vector<std::pair<int, int>> cells; // wrapped (i, j) of constrained offsets
            std::vector<std::pair<int, int>> all;   // wrapped (i, j) of every offset in the window
        };

        Window make_window(const CMat &known, int half_width, int b)
        {
            Window w;
            const int h = half_width - 1;
            for (int m = -h; m <= h; ++m)
                for (int np = -h; np <= h; ++np)
                {
                    const int i = (m + b) % b, j = (np + b) % b;
                    w.all.emplace_back(i, j);
                    if (std::abs(known(i, j)) >= tiny_known)
                        w.cells.emplace_back(i, j);
                }
            return w;
        }

        double wrapped_residual(const CMat &current, const CMat &known, const Window &w)
        {
            double e = 0.0;
            for (const auto &[i, j] : w.cells)
                e += std::norm(known(i, j) - current(i, j)) / std::norm(known(i, j));
            return e;
        }

        CMat windowed(const CMat &x, const Window &w)
        {
            CMat out = CMat::Zero(x.rows(), x.cols());
            for (const auto &[i, j] : w.all)
                out(i, j) = x(i, j);
            return out;
        }

        // Reciprocal with clamp at floor * mean; reports the pre-clamp min / mean
        RMat clamped_reciprocal(const RMat &s, double floor_rel, double &min_ratio, bool &clamped)
        {
            const double mean = s.cwiseAbs().mean();
            min_ratio = mean > 0.0 ? s.minCoeff() / mean : -std::numeric_limits<double>::infinity();
            const double floor = floor_rel * (mean > 0.0 ? mean : 1.0);
            RMat out(s.rows(), s.cols());
            for (Eigen::Index i = 0; i < s.size(); ++i)
            {
                double v = s.data()[i];
                if (!(v >= floor))
                {
                    v = floor;
                    clamped = true;
                }
                out.data()[i] = 1.0 / v;
            }
            return out;
        }
    }

    void MeConfig::validate(int n) const
    {
        if (fft_size < 2 * (2 * n - 1))
            throw InvalidArgument("MeConfig: fft_size must be >= 2 (2n - 1)");
        if (fft_size % 2 != 0)
            throw InvalidArgument("MeConfig: fft_size must be even");
        if (eps_min && !(*eps_min > 0.0))
            throw InvalidArgument("MeConfig: eps_min must be > 0");
        if (max_iters < 1)
            throw InvalidArgument("MeConfig: max_iters must be >= 1");
        if (!(k0 > 0.0) || k0 > 1.0)
            throw InvalidArgument("MeConfig: k0 must lie in (0, 1]");
        if (!(pos_floor > 0.0))
            throw InvalidArgument("MeConfig: pos_floor must be > 0");
        if (!(k_halving_tolerance >= 0.0))
            throw InvalidArgument("MeConfig: k_halving_tolerance must be >= 0");
    }

    int constrained_cells(const CorrelationLattice &lattice)
    {
        int count = 0;
        for (Eigen::Index i = 0; i < lattice.values.size(); ++i)
            count += std::abs(lattice.values.data()[i]) >= tiny_known ? 1 : 0;
        return count;
    }

    double default_eps_min(const CorrelationLattice &lattice)
    {
        return 1e-4 * double(constrained_cells(lattice));
    }

    double residual(const CorrelationLattice &current, const CorrelationLattice &known)
    {
        if (current.n < known.n)
            throw InvalidArgument("residual: current lattice smaller than the window");
        double e = 0.0;
        const int h = known.n - 1;
        for (int m = -h; m <= h; ++m)
            for (int np = -h; np <= h; ++np)
            {
                const cdouble k = known.at(m, np);
                if (std::abs(k) < tiny_known)
                    continue;
                e += std::norm(k - current.at(m, np)) / std::norm(k);
            }
        return e;
    }

    AlphaStep alpha_step(const RMat &fr, const RMat &fd, double k, double alpha_prev, bool monotone)
    {
        AlphaStep out;
        double inf = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < fd.size(); ++i)
        {
            const double d = fd.data()[i];
            if (d < 0.0)
            {
                out.negative = true;
                inf = std::min(inf, fr.data()[i] / std::abs(d));
            }
        }
        if (!out.negative)
            return out;
        out.alpha_inf = inf;
        double a = 1.0 - k * inf;
        if (monotone)
            a = std::max(alpha_prev, a);
        out.alpha = std::clamp(a, 0.0, 1.0);
        return out;
    }

    double beta_step(const RMat &x, const RMat &y, double k)
    {
        if (!(x.minCoeff() < 0.0))
            return 0.0;
        double sup = 0.0;
        for (Eigen::Index i = 0; i < x.size(); ++i)
        {
            const double ax = std::abs(x.data()[i]);
            const double den = ax + std::abs(y.data()[i]);
            if (den > 0.0)
                sup = std::max(sup, ax / den);
        }
        return std::clamp((1.0 - k) + k * sup, 0.0, 1.0);
    }

    MeResult me_estimate(const CorrelationLattice &lattice, const MeConfig &cfg)
    {
        lattice.validate();
        cfg.validate(lattice.n);
        const double r00 = lattice.at(0, 0).real();
        if (!(r00 > 0.0))
            throw InvalidArgument("me_estimate: r(0,0) must be > 0");

        const int b = cfg.fft_size;
        GridFft fft(b);
        const CMat rk = embed_lattice(lattice, b);
        const Window win = make_window(rk, lattice.n, b);

        MeResult res;
        MeDiagnostics &dg = res.diagnostics;
        dg.eps_min = cfg.eps_min.value_or(default_eps_min(lattice));

        CMat c = CMat::Zero(b, b);
        c(0, 0) = 1.0 / r00;
        double alpha = 0.0, k = cfg.k0, eps_prev = cfg.eps_initial;
        RMat spectrum;

        for (int d = 1; d <= cfg.max_iters; ++d)
        {
            dg.iterations_run = d;
            const RMat cspec = fft.forward(c).real();
            double ratio_c = 0.0, ratio_r = 0.0;
            spectrum = clamped_reciprocal(cspec, cfg.pos_floor, ratio_c, dg.clamped);
            const CMat rp = fft.inverse(spectrum.cast<cdouble>());
            const double eps = wrapped_residual(rp, rk, win);
            if (!std::isfinite(eps))
                throw NumericalError("me_estimate: non-finite residual at iteration " + std::to_string(d));
            dg.eps_trace.push_back(eps);
            if (eps <= dg.eps_min)
            {
                dg.converged = true;
                dg.min_ratio_trace.push_back(ratio_c);
                dg.k_trace.push_back(k);
                break;
            }
            if (eps > eps_prev * (1.0 + cfg.k_halving_tolerance))
                k *= 0.5;
            eps_prev = eps;
            dg.k_trace.push_back(k);

            const CMat corr = windowed(rk - rp, win);
            const AlphaStep as = alpha_step(spectrum, fft.forward(corr).real(), k, alpha, cfg.alpha_monotone);
            alpha = as.alpha;
            dg.alpha_trace.push_back(alpha);

            const CMat rd = rp + (1.0 - alpha) * corr;
            const RMat rspec = fft.forward(rd).real();
            const RMat rrec = clamped_reciprocal(rspec, cfg.pos_floor, ratio_r, dg.clamped);
            const CMat cp = windowed(fft.inverse(rrec.cast<cdouble>()), win);
            const double beta = beta_step(fft.forward(cp).real(), cspec, k);
            dg.beta_trace.push_back(beta);
            dg.min_ratio_trace.push_back(std::min(ratio_c, ratio_r));
            c = beta * c + (1.0 - beta) * cp;
        }

        if (!dg.converged)
        {
            double ratio = 0.0;
            spectrum = clamped_reciprocal(fft.forward(c).real(), cfg.pos_floor, ratio, dg.clamped);
        }
        const CMat rfinal = fft.inverse(spectrum.cast<cdouble>());
        dg.final_eps = wrapped_residual(rfinal, rk, win);

        BandConfig tag;
        tag.spacing_ratio = lattice.spacing_ratio;
        res.spectrum = ApsGrid(b, tag);
        res.spectrum.values = spectrum;
        if (!res.spectrum.values.allFinite())
            throw NumericalError("me_estimate: non-finite spectrum");
        return res;
    }

    ArSpectrum ar_spectrum(const ArModel &model, int b, double pos_floor)
    {
        if (model.quadrant != Quadrant::pp)
            throw InvalidArgument("ar_spectrum: model must be the ++ quadrant");
        if (model.b.empty() || !(model.b.front().real() > 0.0))
            throw InvalidArgument("ar_spectrum: invalid model");
        if (b < 2 * model.n - 1 || b % 2 != 0)
            throw InvalidArgument("ar_spectrum: grid too small");
        GridFft fft(b);
        const auto sup = ar_support(model.n);
        const auto a = model.a();
        CMat x = CMat::Zero(b, b);
        for (std::size_t i = 0; i < sup.size(); ++i)
            x(sup[i].first % b, sup[i].second % b) = a[i];
        x(0, 0) = 1.0;
        const CMat den = fft.forward(x);
        ArSpectrum out;
        BandConfig tag;
        out.spectrum = ApsGrid(b, tag);
        const double s2 = model.sigma2();
        RMat mag(b, b);
        for (int i = 0; i < b; ++i)
            for (int j = 0; j < b; ++j)
                mag(i, j) = std::norm(den(i, j));
        const double floor = pos_floor * std::max(mag.mean(), std::numeric_limits<double>::min());
        for (int i = 0; i < b; ++i)
            for (int j = 0; j < b; ++j)
            {
                double v = mag(i, j);
                if (!(v >= floor))
                {
                    v = floor;
                    out.clamped = true;
                }
                out.spectrum.values(i, j) = s2 / v;
            }
        return out;
    }

    ArSpectrum ar_spectrum(const CorrelationLattice &lattice, int b, double pos_floor)
    {
        const ArModel model = solve_ar_coefficients(build_ar_system(lattice, Quadrant::pp));
        ArSpectrum out = ar_spectrum(model, b, pos_floor);
        out.spectrum.band_tag->spacing_ratio = lattice.spacing_ratio;
        return out;
    }

    std::vector<std::pair<int, int>> find_peaks(const ApsGrid &aps, double rel_threshold)
    {
        const int b = aps.b;
        const double mx = aps.values.maxCoeff();
        std::vector<std::pair<int, int>> peaks;
        for (int i = 0; i < b; ++i)
            for (int j = 0; j < b; ++j)
            {
                const double v = aps.values(i, j);
                if (!(v > rel_threshold * mx))
                    continue;
                bool is_peak = true;
                for (int di = -1; di <= 1 && is_peak; ++di)
                    for (int dj = -1; dj <= 1; ++dj)
                    {
                        if (di == 0 && dj == 0)
                            continue;
                        if (!(v > aps.values((i + di + b) % b, (j + dj + b) % b)))
                        {
                            is_peak = false;
                            break;
                        }
                    }
                if (is_peak)
                    peaks.emplace_back(i, j);
            }
        return peaks;
    }

    int frequency_cell(double f, int b)
    {
        const long c = std::lround((f + 0.5) * b);
        return int(((c % b) + b) % b);
    }

    int count_matched(const std::vector<std::pair<int, int>> &peaks, const std::vector<Direction> &centers, int b,
                      int tol)
    {
        auto wrap_dist = [b](int x, int y) {
            const int d = std::abs(x - y) % b;
            return std::min(d, b - d);
        };
        int matched = 0;
        for (const auto &c : centers)
        {
            const int i = frequency_cell(c.u, b), j = frequency_cell(c.v, b);
            for (const auto &[pi, pj] : peaks)
                if (wrap_dist(i, pi) <= tol && wrap_dist(j, pj) <= tol)
                {
                    ++matched;
                    break;
                }
        }
        return matched;
    }
}
