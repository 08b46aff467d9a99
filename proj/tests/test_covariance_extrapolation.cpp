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


#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace statcsi;

namespace
{
    BandConfig band(int n, double ratio = 0.5)
    {
        BandConfig b;
        b.n = n;
        b.spacing_ratio = ratio;
        return b;
    }

    CorrelationLattice white(int n)
    {
        CorrelationLattice lat(n);
        lat.at(0, 0) = 1.0;
        return lat;
    }

    CorrelationLattice cluster_lattice(int n, int paths, std::uint64_t seed, double snr_db = 30.0)
    {
        ClusterApsParams p;
        p.paths = paths;
        const ClusterAps c = generate_cluster_aps(p, seed);
        return add_lattice_noise(lattice_from_aps(c.aps, band(n), n), snr_db, c.aps.mass());
    }

    CVec dense_solve(const CMat &w)
    {
        CVec e1 = CVec::Zero(w.rows());
        e1[0] = 1.0;
        return w.fullPivLu().solve(e1);
    }
}

TEST(ArSupport, CanonicalOrder)
{
    const auto s = ar_support(3);
    const std::vector<std::pair<int, int>> expected = {{0, 0}, {1, 1}, {1, 2}, {2, 1}, {2, 2}};
    EXPECT_EQ(s, expected);
}

TEST(BuildArSystem, WhiteLatticeGivesIdentity)
{
    const ArSystem sys = build_ar_system(white(4));
    EXPECT_EQ(sys.w_rho.rows(), 10);
    EXPECT_LT(oracle::max_abs(sys.w_rho - CMat::Identity(10, 10)), 1e-15);
}

TEST(BuildArSystem, TwoByTwoHandEnumeration)
{
    const CorrelationLattice lat = cluster_lattice(2, 3, 4);
    const ArSystem sys = build_ar_system(lat);
    ASSERT_EQ(sys.w_rho.rows(), 2);
    EXPECT_EQ(sys.w_rho(0, 0), lat.at(0, 0));
    EXPECT_EQ(sys.w_rho(0, 1), lat.at(-1, -1));
    EXPECT_EQ(sys.w_rho(1, 0), lat.at(1, 1));
    EXPECT_EQ(sys.w_rho(1, 1), lat.at(0, 0));
}

TEST(BuildArSystem, EntriesFollowOffsetRule)
{
    const CorrelationLattice lat = cluster_lattice(5, 6, 9);
    const auto sup = ar_support(5);
    for (Quadrant q : {Quadrant::pp, Quadrant::mp, Quadrant::mm, Quadrant::pm})
    {
        const ArSystem sys = build_ar_system(lat, q);
        const int sm = (q == Quadrant::mp || q == Quadrant::mm) ? -1 : 1;
        const int sn = (q == Quadrant::mm || q == Quadrant::pm) ? -1 : 1;
        for (std::size_t i = 0; i < sup.size(); ++i)
            for (std::size_t j = 0; j < sup.size(); ++j)
                EXPECT_EQ(sys.w_rho(Eigen::Index(i), Eigen::Index(j)),
                          lat.at(sm * (sup[i].first - sup[j].first), sn * (sup[i].second - sup[j].second)));
        EXPECT_LT(oracle::max_abs(sys.w_rho - sys.w_rho.adjoint()), 1e-14);
    }
}

TEST(BuildArSystem, ThreePathLatticeIsPositiveDefinite)
{
    const ArSystem sys = build_ar_system(cluster_lattice(8, 3, 2));
    Eigen::SelfAdjointEigenSolver<CMat> es(sys.w_rho);
    EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
}

TEST(BuildArSystem, CorruptedLatticeIsRejected)
{
    CorrelationLattice lat = cluster_lattice(4, 3, 2);
    lat.at(1, 1) += cdouble(0.3, 0.1);
    EXPECT_THROW(build_ar_system(lat), InvalidArgument);
}

TEST(WeightedBasis, IdentityReturnsCanonicalVectors)
{
    EXPECT_LT(oracle::max_abs(weighted_orthonormal_basis(CMat::Identity(6, 6)) - CMat::Identity(6, 6)), 1e-15);
}

TEST(WeightedBasis, DiagonalClosedForm)
{
    CMat w = CMat::Zero(2, 2);
    w(0, 0) = 4.0;
    w(1, 1) = 1.0;
    const CMat v = weighted_orthonormal_basis(w);
    EXPECT_NEAR(std::abs(v(0, 0) - 0.5), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(v(1, 0)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(v(0, 1)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(v(1, 1) - 1.0), 0.0, 1e-15);
}

TEST(WeightedBasis, GramMatrixIsIdentity)
{
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 20; ++trial)
    {
        const CMat w = oracle::random_hpd(10, rng);
        const CMat v = weighted_orthonormal_basis(w);
        EXPECT_LT(oracle::max_abs(v.adjoint() * w * v - CMat::Identity(10, 10)), 1e-8);
        // Upper triangular: v_i lies in span(e_0..e_i)
        for (int i = 0; i < 10; ++i)
            for (int r = i + 1; r < 10; ++r)
                EXPECT_EQ(v(r, i), cdouble(0.0));
    }
}

TEST(WeightedBasis, SingularMatrixReportsCondition)
{
    CMat w = CMat::Ones(3, 3);
    try
    {
        weighted_orthonormal_basis(w);
        FAIL() << "expected NumericalError";
    }
    catch (const NumericalError &e)
    {
        EXPECT_GT(e.condition(), 1e12);
        EXPECT_NE(std::string(e.what()).find("condition"), std::string::npos);
    }
}

TEST(SolveAr, WhiteLatticeGivesUnitVector)
{
    const ArModel m = solve_ar_coefficients(build_ar_system(white(4)));
    ASSERT_EQ(m.b.size(), 10u);
    EXPECT_NEAR(std::abs(m.b[0] - 1.0), 0.0, 1e-15);
    for (std::size_t i = 1; i < m.b.size(); ++i)
        EXPECT_EQ(std::abs(m.b[i]), 0.0);
    EXPECT_NEAR(m.sigma2(), 1.0, 1e-15);
}

TEST(SolveAr, MatchesDenseSolveOnLattices)
{
    for (std::uint64_t seed = 1; seed <= 10; ++seed)
    {
        const ArSystem sys = build_ar_system(cluster_lattice(8, 2 + int(seed), seed, 10.0));
        const ArModel m = solve_ar_coefficients(sys);
        ASSERT_FALSE(m.regularized);
        const CVec ref = dense_solve(sys.w_rho);
        const CVec b = Eigen::Map<const CVec>(m.b.data(), Eigen::Index(m.b.size()));
        EXPECT_LT(oracle::max_abs(b - ref), 1e-8);
        CVec e1 = CVec::Zero(b.size());
        e1[0] = 1.0;
        EXPECT_LT(oracle::max_abs(sys.w_rho * b - e1), 1e-6);
        EXPECT_GT(m.b[0].real(), 0.0);
        EXPECT_EQ(m.b[0].imag(), 0.0);
    }
}

TEST(SolveAr, IllConditionedSystemIsRegularized)
{
    const CorrelationLattice lat = oracle::exponential_lattice(4, {0.13}, {-0.21}, {1.0});
    const ArModel m = solve_ar_coefficients(build_ar_system(lat));
    EXPECT_TRUE(m.regularized);
    EXPECT_GT(m.condition, 1e12);
}

TEST(SolveAr, SingleExponentialExtrapolatesExactly)
{
    const double f = 0.3; // exp(j pi 0.6 (m + n'))
    const CorrelationLattice lat = oracle::exponential_lattice(3, {f}, {f}, {1.0});
    const CorrelationLattice ext = extrapolate_lattice(lat, 7);
    double err = 0.0;
    for (int m = -6; m <= 6; ++m)
        for (int np = -6; np <= 6; ++np)
            err = std::max(err, std::abs(ext.at(m, np) - oracle::exponential_value(m, np, f, f)));
    EXPECT_LT(err, 1e-8);
}

TEST(QuadrantModels, RealLatticeGivesRealConjugatePairs)
{
    // Symmetric in both axes: S(u,v) = S(-u,v) = S(u,-v)
    CorrelationLattice lat = oracle::exponential_lattice(
        4, {0.1, -0.1, 0.1, -0.1, 0.0}, {0.2, 0.2, -0.2, -0.2, 0.0}, {1.0, 1.0, 1.0, 1.0, 0.5});
    EXPECT_LT(lat.values.imag().cwiseAbs().maxCoeff(), 1e-14);
    lat.values = lat.values.real().cast<cdouble>();
    lat.at(0, 0) += 0.1;
    const ArModel pp = solve_ar_coefficients(build_ar_system(lat));
    const auto models = derive_quadrant_models(pp, lat);
    for (const auto &m : models)
        for (std::size_t i = 0; i < m.b.size(); ++i)
        {
            EXPECT_LT(std::abs(m.b[i].imag()), 1e-10);
            EXPECT_NEAR(std::abs(m.b[i] - pp.b[i]), 0.0, 1e-8 * std::abs(pp.b[0]));
        }
}

TEST(QuadrantModels, ConjugatePairsAreExact)
{
    const CorrelationLattice lat = cluster_lattice(6, 5, 14);
    const ArModel pp = solve_ar_coefficients(build_ar_system(lat));
    const auto models = derive_quadrant_models(pp, lat);
    EXPECT_EQ(models[0].quadrant, Quadrant::pp);
    EXPECT_EQ(models[1].quadrant, Quadrant::mp);
    EXPECT_EQ(models[2].quadrant, Quadrant::mm);
    EXPECT_EQ(models[3].quadrant, Quadrant::pm);
    for (std::size_t i = 0; i < pp.b.size(); ++i)
    {
        EXPECT_EQ(models[2].b[i], std::conj(models[0].b[i]));
        EXPECT_EQ(models[3].b[i], std::conj(models[1].b[i]));
    }
}

TEST(QuadrantModels, TwoPathLatticeRepredictsInterior)
{
    const CorrelationLattice lat = oracle::exponential_lattice(4, {0.17, -0.23}, {0.08, 0.31}, {1.0, 0.6});
    const ArModel pp = solve_ar_coefficients(build_ar_system(lat));
    const auto models = derive_quadrant_models(pp, lat);
    const int h = 3;
    auto get = [&](int m, int np) { return lat.at(m, np); };
    double err = 0.0;
    for (int i = 1; i <= h; ++i)
        for (int j = 1; j <= h; ++j)
        {
            err = std::max(err, std::abs(ar_predict(models[0], i, j, get) - lat.at(i, j)));
            err = std::max(err, std::abs(ar_predict(models[1], -i, j, get) - lat.at(-i, j)));
            err = std::max(err, std::abs(ar_predict(models[2], -i, -j, get) - lat.at(-i, -j)));
            err = std::max(err, std::abs(ar_predict(models[3], i, -j, get) - lat.at(i, -j)));
        }
    EXPECT_LT(err, 1e-6);
}

TEST(Extrapolate, SameWidthIsIdentity)
{
    const CorrelationLattice lat = cluster_lattice(6, 4, 3);
    EXPECT_EQ(extrapolate_lattice(lat, 6).values, lat.values);
    EXPECT_THROW(extrapolate_lattice(lat, 5), InvalidArgument);
}

TEST(Extrapolate, SingleExponentialClosedForm)
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> d(-0.45, 0.45);
    for (int trial = 0; trial < 10; ++trial)
    {
        const double fu = d(rng), fv = d(rng);
        const int n1 = 3 + trial % 4;
        const CorrelationLattice ext = extrapolate_lattice(oracle::exponential_lattice(n1, {fu}, {fv}, {1.0}), 12);
        double err = 0.0;
        for (int m = -11; m <= 11; ++m)
            for (int np = -11; np <= 11; ++np)
                err = std::max(err, std::abs(ext.at(m, np) - oracle::exponential_value(m, np, fu, fv)));
        EXPECT_LT(err, 1e-6) << fu << " " << fv << " n1=" << n1;
    }
}

TEST(Extrapolate, PreservesConjugateSymmetryAndKnownValues)
{
    const CorrelationLattice lat = cluster_lattice(8, 5, 8);
    const CorrelationLattice ext = extrapolate_lattice(lat, 10);
    EXPECT_EQ(ext.symmetry_error(), 0.0);
    for (int m = -7; m <= 7; ++m)
        for (int np = -7; np <= 7; ++np)
            EXPECT_EQ(ext.at(m, np), lat.at(m, np));
}

TEST(Extrapolate, FivePathsBeatsLinearBaseline)
{
    ClusterApsParams p;
    p.paths = 5;
    for (std::uint64_t seed = 1; seed <= 5; ++seed)
    {
        const ClusterAps c = generate_cluster_aps(p, seed);
        CovarianceMatrix r1 = covariance_from_aps(c.aps, band(8));
        r1.entries.diagonal().array() += 1e-3;
        const CovarianceMatrix truth = covariance_from_aps(c.aps, band(10));
        const double ar = nmse(predict_covariance(r1, band(8), band(10)), truth);
        const double lin = nmse(predict_covariance(r1, band(8), band(10), PredictionMethod::linear), truth);
        EXPECT_LT(ar, lin) << seed;
    }
}

TEST(Interpolate, UnitRatioIsExact)
{
    const CorrelationLattice lat = cluster_lattice(6, 4, 2);
    EXPECT_EQ(interpolate_lattice(lat, 1.0, 6).values, lat.values);
}

TEST(Interpolate, HalfStepSingleExponential)
{
    const double fu = 0.05, fv = -0.035;
    const CorrelationLattice lat = oracle::exponential_lattice(8, {fu}, {fv}, {1.0});
    const CorrelationLattice half = interpolate_lattice(lat, 0.5, 8);
    double err = 0.0;
    for (int m = -7; m <= 7; ++m)
        for (int np = -7; np <= 7; ++np)
            err = std::max(err, std::abs(half.at(m, np) - oracle::exponential_value(0.5 * m, 0.5 * np, fu, fv)));
    EXPECT_LT(err, 1e-3);
}

TEST(Interpolate, KeepsConjugateSymmetryAndRejectsOutOfRange)
{
    const CorrelationLattice lat = cluster_lattice(8, 6, 5);
    EXPECT_LT(interpolate_lattice(lat, 0.8, 8).symmetry_error(), 1e-12);
    EXPECT_LT(interpolate_lattice(lat, 1.3, 5).symmetry_error(), 1e-12);
    EXPECT_THROW(interpolate_lattice(lat, 1.3, 8), InvalidArgument);
    EXPECT_THROW(interpolate_lattice(lat, 0.0, 4), InvalidArgument);
}

TEST(LinearBaseline, ConstantAndAffineAreExact)
{
    CorrelationLattice c(4);
    c.values.setConstant(cdouble(2.0, 0.0));
    const CorrelationLattice ce = baseline_linear_extrapolate(c, 7);
    EXPECT_LT(oracle::max_abs(ce.values - CMat::Constant(13, 13, cdouble(2.0, 0.0))), 1e-14);

    // r(m, n') = 3 + j (0.4 m - 0.25 n') is conjugate-symmetric and affine
    auto affine = [](int m, int np) { return cdouble(3.0, 0.4 * m - 0.25 * np); };
    CorrelationLattice a(4);
    for (int m = -3; m <= 3; ++m)
        for (int np = -3; np <= 3; ++np)
            a.at(m, np) = affine(m, np);
    const CorrelationLattice ae = baseline_linear_extrapolate(a, 7);
    for (int m = -6; m <= 6; ++m)
        for (int np = -6; np <= 6; ++np)
            EXPECT_NEAR(std::abs(ae.at(m, np) - affine(m, np)), 0.0, 1e-12) << m << "," << np;
}

TEST(LinearBaseline, WorseThanArOnSingleExponential)
{
    const double fu = 0.21, fv = -0.13;
    const CorrelationLattice lat = oracle::exponential_lattice(5, {fu}, {fv}, {1.0});
    auto max_err = [&](const CorrelationLattice &x) {
        double e = 0.0;
        for (int m = -8; m <= 8; ++m)
            for (int np = -8; np <= 8; ++np)
                e = std::max(e, std::abs(x.at(m, np) - oracle::exponential_value(m, np, fu, fv)));
        return e;
    };
    EXPECT_GT(max_err(baseline_linear_extrapolate(lat, 9)), max_err(extrapolate_lattice(lat, 9)));
}

TEST(PredictCovariance, SameBandIsStationaryProjection)
{
    std::mt19937_64 rng(2);
    ClusterApsParams p;
    p.paths = 6;
    const ClusterAps c = generate_cluster_aps(p, 31);
    std::vector<CVec> gs;
    Rng crng(4);
    for (int t = 0; t < 200; ++t)
        gs.push_back(sample_channel(c.aps, band(4), crng));
    const CovarianceMatrix sample = sample_covariance(gs);
    const CovarianceMatrix pred = predict_covariance(sample, band(4), band(4));
    const CovarianceMatrix ref = psd_project(covariance_from_lattice(lattice_from_covariance(sample, 0.5), 4));
    EXPECT_LT(oracle::max_abs(pred.entries - ref.entries), 1e-12);
}

TEST(PredictCovariance, SinglePointIsExact)
{
    for (auto [k, l] : {std::pair{20, 9}, std::pair{5, 27}, std::pair{16, 16}})
    {
        const ApsGrid aps = oracle::point_aps(32, k, l);
        const double e = nmse(predict_covariance(covariance_from_aps(aps, band(8)), band(8), band(12)),
                              covariance_from_aps(aps, band(12)));
        EXPECT_LT(e, 1e-6);
    }
}

TEST(PredictCovariance, OutputsSatisfyInvariants)
{
    ClusterApsParams p;
    p.paths = 10;
    for (std::uint64_t seed = 1; seed <= 4; ++seed)
    {
        const ClusterAps c = generate_cluster_aps(p, seed);
        CovarianceMatrix r1 = covariance_from_aps(c.aps, band(8));
        r1.entries.diagonal().array() += 1e-2;
        for (double ratio : {0.5, 0.4, 0.45})
            for (auto method : {PredictionMethod::autoregressive, PredictionMethod::linear})
            {
                const CovarianceMatrix out = predict_covariance(r1, band(8), band(10, ratio), method);
                const auto chk = out.check(1e-12, 1e-9, 1e-8);
                EXPECT_LT(chk.hermitian_error, 1e-12);
                EXPECT_GE(chk.min_eig_ratio, -1e-9);
            }
    }
}

TEST(PredictCovariance, FractionalRatioTracksTruth)
{
    ClusterApsParams p;
    p.paths = 3;
    const ClusterAps c = generate_cluster_aps(p, 2);
    BandConfig src = band(8, 0.5), tgt = band(8, 0.4);
    EXPECT_NEAR(spacing_ratio_mu(src, tgt), 0.8, 1e-15);
    CovarianceMatrix r1 = covariance_from_aps(c.aps, src);
    r1.entries.diagonal().array() += 1e-3;
    const CovarianceMatrix truth = covariance_from_aps(c.aps, tgt);
    const double e = nmse(predict_covariance(r1, src, tgt), truth);
    const double unscaled = nmse(predict_covariance(r1, src, band(8, 0.5)), truth);
    EXPECT_LT(e, 0.5 * unscaled);
}

TEST(PredictCovariance, RejectsSmallerTarget)
{
    const CovarianceMatrix r = covariance_from_aps(oracle::point_aps(32, 3, 4), band(8));
    EXPECT_THROW(predict_covariance(r, band(8), band(6)), InvalidArgument);
}

TEST(Nmse, AlgebraicIdentities)
{
    std::mt19937_64 rng(3);
    const CMat t = oracle::random_hpd(9, rng);
    EXPECT_EQ(nmse(t, t), 0.0);
    EXPECT_NEAR(nmse(CMat(2.0 * t), t), 1.0, 1e-14);
    EXPECT_NEAR(nmse(CMat(CMat::Zero(9, 9)), t), 1.0, 1e-14);
    EXPECT_THROW(nmse(t, CMat(CMat::Zero(9, 9))), InvalidArgument);
    EXPECT_THROW(nmse(CMat(CMat::Zero(4, 4)), t), InvalidArgument);
}

TEST(PsdProject, ClipsNegativeEigenvalues)
{
    CMat a = CMat::Zero(4, 4);
    a(0, 0) = 1.0;
    a(1, 1) = -0.5;
    a(2, 2) = 2.0;
    const CovarianceMatrix out = psd_project(CovarianceMatrix(2, a, true));
    EXPECT_NEAR(std::abs(out.entries(0, 0) - 1.0), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(out.entries(1, 1)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(out.entries(2, 2) - 2.0), 0.0, 1e-15);
    EXPECT_FALSE(out.stationary);
}
