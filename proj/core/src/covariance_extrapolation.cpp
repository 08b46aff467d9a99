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

#include "statcsi/covariance_extrapolation.hpp"
#include "statcsi/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace statcsi
{
    std::vector<std::pair<int, int>> ar_support(int n)
    {
        std::vector<std::pair<int, int>> s;
        s.reserve(std::size_t(1 + (n - 1) * (n - 1)));
        s.emplace_back(0, 0);
        for (int q = 1; q < n; ++q)
            for (int l = 1; l < n; ++l)
                s.emplace_back(q, l);
        return s;
    }

    std::vector<cdouble> ArModel::a() const
    {
        const double s2 = sigma2();
        std::vector<cdouble> out(b.size());
        for (std::size_t i = 0; i < b.size(); ++i)
            out[i] = s2 * b[i];
        return out;
    }

    ArSystem build_ar_system(const CorrelationLattice &lattice, Quadrant quadrant)
    {
        if (lattice.n < 2)
            throw InvalidArgument("build_ar_system: lattice half-width must be >= 2");
        lattice.validate();
        ArSystem sys;
        sys.n = lattice.n;
        sys.quadrant = quadrant;
        sys.support = ar_support(lattice.n);
        const int m_size = int(sys.support.size());
        sys.w_rho.resize(m_size, m_size);
        for (int i = 0; i < m_size; ++i)
        {
            const auto [m, np] = sys.support[i];
            for (int j = 0; j < m_size; ++j)
            {
                const auto [q, l] = sys.support[j];
                int dm = m - q, dn = np - l;
                if (quadrant == Quadrant::mp || quadrant == Quadrant::mm)
                    dm = -dm;
                if (quadrant == Quadrant::mm || quadrant == Quadrant::pm)
                    dn = -dn;
                sys.w_rho(i, j) = lattice.at(dm, dn);
            }
        }
        const double herm = (sys.w_rho - sys.w_rho.adjoint()).cwiseAbs().maxCoeff();
        if (herm > 1e-10 * std::max(1.0, std::abs(sys.w_rho(0, 0))))
            throw NumericalError("build_ar_system: weighted system is not Hermitian (corrupted lattice)");
        return sys;
    }

    CMat weighted_orthonormal_basis(const CMat &w)
    {
        const Eigen::Index size = w.rows();
        if (size == 0 || w.cols() != size)
            throw InvalidArgument("weighted_orthonormal_basis: W must be square and non-empty");
        CMat v = CMat::Zero(size, size);
        CMat wv = CMat::Zero(size, size); // W * v_j, cached
        const double scale = w.diagonal().real().cwiseAbs().maxCoeff();
        for (Eigen::Index i = 0; i < size; ++i)
        {
            CVec x = CVec::Zero(size);
            x[i] = 1.0;
            for (int pass = 0; pass < 2; ++pass)
                for (Eigen::Index j = 0; j < i; ++j)
                    x -= v.col(j) * wv.col(j).dot(x); // dot conjugates the first argument
            const CVec wx = w * x;
            const double nrm2 = x.dot(wx).real();
            if (!(nrm2 > 1e-14 * scale))
            {
                Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (w + w.adjoint()), Eigen::EigenvaluesOnly);
                const double lmin = es.eigenvalues().minCoeff(), lmax = es.eigenvalues().maxCoeff();
                const double cond = lmin > 0.0 ? lmax / lmin : std::numeric_limits<double>::infinity();
                throw NumericalError("weighted Gram-Schmidt breakdown at vector " + std::to_string(i) +
                                         ": W is numerically singular (condition estimate " + std::to_string(cond) + ")",
                                     cond);
            }
            const double nrm = std::sqrt(nrm2);
            v.col(i) = x / nrm;
            wv.col(i) = wx / nrm;
        }
        return v;
    }

    CMat weighted_orthonormal_basis(const ArSystem &system)
    {
        return weighted_orthonormal_basis(system.w_rho);
    }

    ArModel solve_ar_coefficients(const ArSystem &system, const ArSolveOptions &opt)
    {
        const CMat &w0 = system.w_rho;
        const Eigen::Index size = w0.rows();
        if (size == 0 || w0.cols() != size)
            throw InvalidArgument("solve_ar_coefficients: empty or non-square system");
        Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (w0 + w0.adjoint()), Eigen::EigenvaluesOnly);
        const double lmin = es.eigenvalues().minCoeff(), lmax = es.eigenvalues().maxCoeff();
        const double cond = lmin > 0.0 ? lmax / lmin : std::numeric_limits<double>::infinity();

        ArModel model;
        model.n = system.n;
        model.quadrant = system.quadrant;
        model.condition = cond;
        CMat w = w0;
        if (!(cond <= opt.cond_threshold))
        {
            w.diagonal().array() += opt.ridge * std::abs(w0(0, 0).real());
            model.regularized = true;
        }
        const CMat v = weighted_orthonormal_basis(w);
        const CVec b = v * v.row(0).adjoint();
        model.b.assign(b.data(), b.data() + b.size());
        model.b.front() = cdouble(model.b.front().real(), 0.0);
        if (!(model.b.front().real() > 0.0) || !b.allFinite())
            throw NumericalError("solve_ar_coefficients: invalid innovation power", cond);
        return model;
    }

    std::array<ArModel, 4> derive_quadrant_models(const ArModel &model_pp, const CorrelationLattice &lattice,
                                                  const ArSolveOptions &opt)
    {
        auto conj_model = [](const ArModel &src, Quadrant q) {
            ArModel out = src;
            out.quadrant = q;
            for (auto &x : out.b)
                x = std::conj(x);
            return out;
        };
        const ArModel mp = solve_ar_coefficients(build_ar_system(lattice, Quadrant::mp), opt);
        return {model_pp, mp, conj_model(model_pp, Quadrant::mm), conj_model(mp, Quadrant::pm)};
    }

    CorrelationLattice extrapolate_lattice(const CorrelationLattice &lattice, int target_half_width,
                                           const ArSolveOptions &opt)
    {
        const int n1 = lattice.n, n2 = target_half_width;
        if (n2 < n1)
            throw InvalidArgument("extrapolate_lattice: target half-width smaller than source");
        if (n2 == n1)
            return lattice;
        const ArModel pp = solve_ar_coefficients(build_ar_system(lattice, Quadrant::pp), opt);
        const auto models = derive_quadrant_models(pp, lattice, opt);
        const ArModel &a1 = models[0];
        const ArModel &a4 = models[3];

        CorrelationLattice out(n2, lattice.spacing_ratio);
        Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> filled =
            Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(out.width(), out.width(), false);
        for (int m = -(n1 - 1); m <= n1 - 1; ++m)
            for (int np = -(n1 - 1); np <= n1 - 1; ++np)
            {
                out.at(m, np) = lattice.at(m, np);
                filled(m + n2 - 1, np + n2 - 1) = true;
            }
        auto get = [&](int m, int np) -> cdouble {
            if (!out.contains(m, np) || !filled(m + n2 - 1, np + n2 - 1))
                throw NumericalError("extrapolate_lattice: recursion read an unfilled offset (" + std::to_string(m) +
                                     "," + std::to_string(np) + ")");
            return out.at(m, np);
        };
        for (int ring = n1; ring < n2; ++ring)
        {
            for (int m = 0; m <= ring; ++m)
                for (int np = -ring; np <= ring; ++np)
                {
                    if (std::max(std::abs(m), std::abs(np)) != ring)
                        continue;
                    if (m == 0 && np <= 0)
                        continue;
                    const cdouble val = np >= 0 ? ar_predict(a1, m, np, get) : ar_predict(a4, m, np, get);
                    out.at(m, np) = val;
                    out.at(-m, -np) = std::conj(val);
                    filled(m + n2 - 1, np + n2 - 1) = true;
                    filled(-m + n2 - 1, -np + n2 - 1) = true;
                }
        }
        if (!out.values.allFinite())
            throw NumericalError("extrapolate_lattice: non-finite extrapolated value", pp.condition);
        return out;
    }

    namespace
    {
        // Keys cubic convolution kernel, a = -1/2
        double keys(double x)
        {
            x = std::abs(x);
            if (x < 1.0)
                return (1.5 * x - 2.5) * x * x + 1.0;
            if (x < 2.0)
                return ((-0.5 * x + 2.5) * x - 4.0) * x + 2.0;
            return 0.0;
        }

        struct Stencil
        {
            int base = 0;      // Exact node when frac is zero, else floor(x) - 1
            bool exact = false;
            double w[4] = {0, 0, 0, 0};
        };

        Stencil stencil(double x)
        {
            Stencil s;
            const double fl = std::floor(x);
            const double frac = x - fl;
            if (frac < 1e-12 || frac > 1.0 - 1e-12)
            {
                s.exact = true;
                s.base = int(std::lround(x));
                return s;
            }
            s.base = int(fl) - 1;
            for (int i = 0; i < 4; ++i)
                s.w[i] = keys(x - double(s.base + i));
            return s;
        }

        int stencil_reach(const Stencil &s)
        {
            return s.exact ? std::abs(s.base) : std::max(std::abs(s.base), std::abs(s.base + 3));
        }
    }

    CorrelationLattice interpolate_lattice(const CorrelationLattice &lattice, double mu, int out_half_width)
    {
        if (!(mu > 0.0))
            throw InvalidArgument("interpolate_lattice: mu must be > 0");
        if (out_half_width < 1)
            throw InvalidArgument("interpolate_lattice: output half-width must be >= 1");
        CorrelationLattice out(out_half_width, lattice.spacing_ratio * mu);
        const int h = lattice.n;
        std::vector<Stencil> st(std::size_t(2 * out_half_width - 1));
        for (int m = -(out_half_width - 1); m <= out_half_width - 1; ++m)
        {
            st[std::size_t(m + out_half_width - 1)] = stencil(mu * m);
            if (stencil_reach(st[std::size_t(m + out_half_width - 1)]) > h - 1)
                throw InvalidArgument("interpolate_lattice: requested offset " + std::to_string(mu * m) +
                                      " lies outside the lattice range; extrapolate first");
        }
        auto eval = [&](const Stencil &su, const Stencil &sv) {
            if (su.exact && sv.exact)
                return lattice.at(su.base, sv.base);
            cdouble acc = 0.0;
            for (int i = 0; i < 4; ++i)
            {
                const double wu = su.exact ? (i == 0 ? 1.0 : 0.0) : su.w[i];
                const int mu_i = su.exact ? su.base : su.base + i;
                if (wu == 0.0)
                    continue;
                for (int j = 0; j < 4; ++j)
                {
                    const double wv = sv.exact ? (j == 0 ? 1.0 : 0.0) : sv.w[j];
                    const int nv_j = sv.exact ? sv.base : sv.base + j;
                    if (wv == 0.0)
                        continue;
                    acc += wu * wv * lattice.at(mu_i, nv_j);
                }
            }
            return acc;
        };
        const int o = out_half_width - 1;
        for (int m = 0; m <= o; ++m)
            for (int np = -o; np <= o; ++np)
            {
                if (m == 0 && np < 0)
                    continue;
                const cdouble val = eval(st[std::size_t(m + o)], st[std::size_t(np + o)]);
                out.at(m, np) = val;
                out.at(-m, -np) = std::conj(val);
            }
        out.at(0, 0) = cdouble(out.at(0, 0).real(), 0.0);
        return out;
    }

    CorrelationLattice baseline_linear_extrapolate(const CorrelationLattice &lattice, int target_half_width)
    {
        const int n1 = lattice.n, n2 = target_half_width;
        if (n2 < n1)
            throw InvalidArgument("baseline_linear_extrapolate: target half-width smaller than source");
        if (n1 < 2)
            throw InvalidArgument("baseline_linear_extrapolate: needs at least two samples per axis");
        CorrelationLattice out(n2, lattice.spacing_ratio);
        for (int m = -(n1 - 1); m <= n1 - 1; ++m)
            for (int np = -(n1 - 1); np <= n1 - 1; ++np)
                out.at(m, np) = lattice.at(m, np);
        const int e = n1 - 1;
        // Along n' for the known rows, then along m for every column
        for (int m = -e; m <= e; ++m)
            for (int k = n1; k < n2; ++k)
            {
                const double t = double(k - e);
                out.at(m, k) = out.at(m, e) + t * (out.at(m, e) - out.at(m, e - 1));
                out.at(m, -k) = out.at(m, -e) + t * (out.at(m, -e) - out.at(m, -e + 1));
            }
        for (int np = -(n2 - 1); np <= n2 - 1; ++np)
            for (int k = n1; k < n2; ++k)
            {
                const double t = double(k - e);
                out.at(k, np) = out.at(e, np) + t * (out.at(e, np) - out.at(e - 1, np));
                out.at(-k, np) = out.at(-e, np) + t * (out.at(-e, np) - out.at(-e + 1, np));
            }
        return out;
    }

    CovarianceMatrix psd_project(const CovarianceMatrix &cov)
    {
        const CMat h = 0.5 * (cov.entries + cov.entries.adjoint());
        Eigen::SelfAdjointEigenSolver<CMat> es(h);
        if (es.info() != Eigen::Success)
            throw NumericalError("psd_project: eigen-decomposition failed");
        const Eigen::VectorXd &lam = es.eigenvalues();
        if (lam.minCoeff() >= 0.0)
            return CovarianceMatrix(cov.n, h, cov.stationary);
        const Eigen::VectorXd clipped = lam.cwiseMax(0.0);
        CMat r = es.eigenvectors() * clipped.cast<cdouble>().asDiagonal() * es.eigenvectors().adjoint();
        r = 0.5 * (r + r.adjoint()).eval();
        return CovarianceMatrix(cov.n, std::move(r), false);
    }

    double spacing_ratio_mu(const BandConfig &source, const BandConfig &target)
    {
        // (d2 lambda1) / (d1 lambda2)
        return (target.spacing_m() * source.wavelength()) / (source.spacing_m() * target.wavelength());
    }

    CovarianceMatrix predict_covariance(const CovarianceMatrix &r_source, const BandConfig &band_source,
                                        const BandConfig &band_target, PredictionMethod method,
                                        const ArSolveOptions &opt)
    {
        band_source.validate();
        band_target.validate();
        if (r_source.n != band_source.n)
            throw InvalidArgument("predict_covariance: source covariance size does not match the source band");
        if (band_target.n < band_source.n)
            throw InvalidArgument("predict_covariance: target array smaller than source array");
        const CorrelationLattice src = lattice_from_covariance(r_source, band_source.spacing_ratio);
        const double mu = spacing_ratio_mu(band_source, band_target);
        const int n1 = band_source.n, n2 = band_target.n;

        auto extend = [&](int h) {
            if (h <= n1)
                return src;
            return method == PredictionMethod::autoregressive ? extrapolate_lattice(src, h, opt)
                                                              : baseline_linear_extrapolate(src, h);
        };
        CorrelationLattice target;
        const double mu_int = std::round(mu);
        if (std::abs(mu - mu_int) < 1e-12 && mu_int >= 1.0)
        {
            const int k = int(mu_int);
            const CorrelationLattice ext = extend(k * (n2 - 1) + 1);
            target = CorrelationLattice(n2, band_target.spacing_ratio);
            for (int m = -(n2 - 1); m <= n2 - 1; ++m)
                for (int np = -(n2 - 1); np <= n2 - 1; ++np)
                    target.at(m, np) = ext.at(k * m, k * np);
        }
        else
        {
            const int h = int(std::floor(mu * (n2 - 1))) + 3;
            target = interpolate_lattice(extend(h), mu, n2);
            target.spacing_ratio = band_target.spacing_ratio;
        }
        return psd_project(covariance_from_lattice(target, n2));
    }

    double nmse(const CMat &estimate, const CMat &truth)
    {
        if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols())
            throw InvalidArgument("nmse: dimension mismatch");
        const double den = truth.squaredNorm();
        if (!(den > 0.0))
            throw InvalidArgument("nmse: truth has zero norm");
        return (estimate - truth).squaredNorm() / den;
    }

    double nmse(const CovarianceMatrix &estimate, const CovarianceMatrix &truth)
    {
        return nmse(estimate.entries, truth.entries);
    }
}
