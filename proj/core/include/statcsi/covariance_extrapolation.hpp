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

#ifndef STATCSI_COVARIANCE_EXTRAPOLATION_HPP
#define STATCSI_COVARIANCE_EXTRAPOLATION_HPP

#include "statcsi/channel_synthesis.hpp"

#include <array>
#include <utility>
#include <vector>

namespace statcsi
{
    // Prediction quadrants: pp uses rho(m-q, n'-l), mp rho(m+q, n'-l), mm rho(m+q, n'+l), pm rho(m-q, n'+l)
    enum class Quadrant
    {
        pp,
        mp,
        mm,
        pm
    };

    // Quarter-plane support {(0,0)} followed by (q, l), q = 1..n-1 outer, l = 1..n-1 inner
    std::vector<std::pair<int, int>> ar_support(int n);

    struct ArModel
    {
        int n = 0;
        std::vector<cdouble> b; // b(q,l) in ar_support order, b[0] = b(0,0) = 1 / sigma^2
        Quadrant quadrant = Quadrant::pp;
        double condition = 1.0;   // Condition estimate of the weighted system
        bool regularized = false; // Ridge term added before solving

        double sigma2() const { return 1.0 / b.front().real(); }
        std::vector<cdouble> a() const; // a(q,l) = sigma^2 b(q,l), a(0,0) = 1
    };

    struct ArSystem
    {
        int n = 0;
        CMat w_rho;
        std::vector<std::pair<int, int>> support;
        Quadrant quadrant = Quadrant::pp;
    };

    ArSystem build_ar_system(const CorrelationLattice &lattice, Quadrant quadrant = Quadrant::pp);

    // Columns are v_i with v_i^H W v_j = delta_ij; modified Gram-Schmidt with one re-orthogonalization pass
    CMat weighted_orthonormal_basis(const CMat &w);
    CMat weighted_orthonormal_basis(const ArSystem &system);

    struct ArSolveOptions
    {
        double cond_threshold = 1e12;
        double ridge = 1e-8; // Relative to r(0,0)
    };

    ArModel solve_ar_coefficients(const ArSystem &system, const ArSolveOptions &opt = {});

    // a3 = conj(a1), a4 = conj(a2), a2 from its own weighted system. Order: pp, mp, mm, pm
    std::array<ArModel, 4> derive_quadrant_models(const ArModel &model_pp, const CorrelationLattice &lattice,
                                                  const ArSolveOptions &opt = {});

    // One-step recursion of the given model at (m, n'), reading values through the getter
    template <typename Getter>
    cdouble ar_predict(const ArModel &model, int m, int np, Getter &&get)
    {
        const auto sup = ar_support(model.n);
        cdouble s = 0.0;
        for (std::size_t j = 1; j < sup.size(); ++j)
        {
            const auto [q, l] = sup[j];
            int dm = 0, dn = 0;
            switch (model.quadrant)
            {
            case Quadrant::pp: dm = m - q, dn = np - l; break;
            case Quadrant::mp: dm = m + q, dn = np - l; break;
            case Quadrant::mm: dm = m + q, dn = np + l; break;
            case Quadrant::pm: dm = m - q, dn = np + l; break;
            }
            s += model.b[j] * get(dm, dn);
        }
        return -s / model.b.front();
    }

    CorrelationLattice extrapolate_lattice(const CorrelationLattice &lattice, int target_half_width,
                                           const ArSolveOptions &opt = {});

    // Values rho(mu m, mu n') for |m|, |n'| <= out_half_width - 1 via Keys bicubic convolution
    CorrelationLattice interpolate_lattice(const CorrelationLattice &lattice, double mu, int out_half_width);

    CorrelationLattice baseline_linear_extrapolate(const CorrelationLattice &lattice, int target_half_width);

    // Nearest PSD matrix by eigenvalue clipping; stationary flag cleared if anything was clipped
    CovarianceMatrix psd_project(const CovarianceMatrix &cov);

    double spacing_ratio_mu(const BandConfig &source, const BandConfig &target);

    enum class PredictionMethod
    {
        autoregressive,
        linear
    };

    CovarianceMatrix predict_covariance(const CovarianceMatrix &r_source, const BandConfig &band_source,
                                        const BandConfig &band_target,
                                        PredictionMethod method = PredictionMethod::autoregressive,
                                        const ArSolveOptions &opt = {});

    double nmse(const CovarianceMatrix &estimate, const CovarianceMatrix &truth);
    double nmse(const CMat &estimate, const CMat &truth);
}

#endif
