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

#include "statcsi/grid_fft.hpp"
#include "statcsi/errors.hpp"

#include <fftw3.h>
#include <mutex>

namespace statcsi
{
    namespace
    {
        std::mutex &planner_mutex()
        {
            static std::mutex m;
            return m;
        }
    }

    struct GridFft::Impl
    {
        fftw_complex *in = nullptr;
        fftw_complex *out = nullptr;
        fftw_plan fwd = nullptr;
        fftw_plan bwd = nullptr;
    };

    GridFft::GridFft(int b) : b_(b), impl_(std::make_unique<Impl>())
    {
        if (b < 2 || b % 2 != 0)
            throw InvalidArgument("GridFft: grid size must be even and >= 2");
        const std::size_t count = std::size_t(b) * std::size_t(b);
        std::lock_guard<std::mutex> lock(planner_mutex());
        impl_->in = fftw_alloc_complex(count);
        impl_->out = fftw_alloc_complex(count);
        impl_->fwd = fftw_plan_dft_2d(b, b, impl_->in, impl_->out, FFTW_FORWARD, FFTW_ESTIMATE);
        impl_->bwd = fftw_plan_dft_2d(b, b, impl_->in, impl_->out, FFTW_BACKWARD, FFTW_ESTIMATE);
        if (!impl_->fwd || !impl_->bwd)
            throw NumericalError("GridFft: FFTW planning failed");
    }

    GridFft::~GridFft()
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        if (impl_->fwd)
            fftw_destroy_plan(impl_->fwd);
        if (impl_->bwd)
            fftw_destroy_plan(impl_->bwd);
        fftw_free(impl_->in);
        fftw_free(impl_->out);
    }

    // The (-1)^(m+n') factor shifts the DFT grid from k/B to k/B - 1/2 (B even)
    CMat GridFft::forward(const CMat &x)
    {
        const int b = b_;
        if (x.rows() != b || x.cols() != b)
            throw InvalidArgument("GridFft::forward: size mismatch");
        for (int i = 0; i < b; ++i)
            for (int j = 0; j < b; ++j)
            {
                const cdouble v = ((i + j) % 2 == 0) ? x(i, j) : -x(i, j);
                impl_->in[i * b + j][0] = v.real();
                impl_->in[i * b + j][1] = v.imag();
            }
        fftw_execute(impl_->fwd);
        CMat out(b, b);
        for (int i = 0; i < b; ++i)
            for (int j = 0; j < b; ++j)
                out(i, j) = cdouble(impl_->out[i * b + j][0], impl_->out[i * b + j][1]);
        return out;
    }

    CMat GridFft::inverse(const CMat &p)
    {
        const int b = b_;
        if (p.rows() != b || p.cols() != b)
            throw InvalidArgument("GridFft::inverse: size mismatch");
        for (int i = 0; i < b; ++i)
            for (int j = 0; j < b; ++j)
            {
                impl_->in[i * b + j][0] = p(i, j).real();
                impl_->in[i * b + j][1] = p(i, j).imag();
            }
        fftw_execute(impl_->bwd);
        const double scale = 1.0 / (double(b) * double(b));
        CMat out(b, b);
        for (int i = 0; i < b; ++i)
            for (int j = 0; j < b; ++j)
            {
                const cdouble v(impl_->out[i * b + j][0] * scale, impl_->out[i * b + j][1] * scale);
                out(i, j) = ((i + j) % 2 == 0) ? v : -v;
            }
        return out;
    }

    CMat embed_lattice(const CorrelationLattice &lattice, int b)
    {
        if (lattice.width() > b)
            throw InvalidArgument("embed_lattice: lattice wider than the grid");
        CMat x = CMat::Zero(b, b);
        const int h = lattice.n - 1;
        for (int m = -h; m <= h; ++m)
            for (int np = -h; np <= h; ++np)
                x((m + b) % b, (np + b) % b) = lattice.at(m, np);
        return x;
    }

    CorrelationLattice extract_lattice(const CMat &x, int half_width, double spacing_ratio)
    {
        const int b = int(x.rows());
        if (2 * half_width - 1 > b)
            throw InvalidArgument("extract_lattice: half-width too large for the grid");
        CorrelationLattice lat(half_width, spacing_ratio);
        const int h = half_width - 1;
        for (int m = -h; m <= h; ++m)
            for (int np = -h; np <= h; ++np)
                lat.at(m, np) = x((m + b) % b, (np + b) % b);
        return lat;
    }
}
