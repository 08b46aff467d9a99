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


#include "statcsi/statcsi.hpp"

#include <benchmark/benchmark.h>

using namespace statcsi;

namespace
{
    BandConfig band(int n)
    {
        BandConfig b;
        b.n = n;
        return b;
    }

    ClusterAps clusters(int paths, std::uint64_t seed)
    {
        ClusterApsParams p;
        p.paths = paths;
        return generate_cluster_aps(p, seed);
    }

    CorrelationLattice noisy_lattice(int n, int paths)
    {
        const ClusterAps c = clusters(paths, 42);
        return add_lattice_noise(lattice_from_aps(c.aps, band(n), n), 10.0, c.aps.mass());
    }
}

static void BM_CovarianceFromAps(benchmark::State &state)
{
    const ClusterAps c = clusters(8, 1);
    const BandConfig b = band(int(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(covariance_from_aps(c.aps, b));
}
BENCHMARK(BM_CovarianceFromAps)->Arg(8)->Arg(12);

static void BM_SolveAr(benchmark::State &state)
{
    const ArSystem sys = build_ar_system(noisy_lattice(int(state.range(0)), 8));
    for (auto _ : state)
        benchmark::DoNotOptimize(solve_ar_coefficients(sys));
}
BENCHMARK(BM_SolveAr)->Arg(4)->Arg(8);

static void BM_ExtrapolateLattice(benchmark::State &state)
{
    const CorrelationLattice lat = noisy_lattice(8, 8);
    for (auto _ : state)
        benchmark::DoNotOptimize(extrapolate_lattice(lat, int(state.range(0))));
}
BENCHMARK(BM_ExtrapolateLattice)->Arg(10)->Arg(12);

static void BM_PredictCovariance(benchmark::State &state)
{
    const ClusterAps c = clusters(10, 3);
    CovarianceMatrix r1 = covariance_from_aps(c.aps, band(8));
    r1.entries.diagonal().array() += 1e-3;
    for (auto _ : state)
        benchmark::DoNotOptimize(predict_covariance(r1, band(8), band(10)));
}
BENCHMARK(BM_PredictCovariance);

static void BM_MeEstimate(benchmark::State &state)
{
    const CorrelationLattice lat = noisy_lattice(8, int(state.range(0)));
    MeConfig cfg;
    cfg.max_iters = 100;
    for (auto _ : state)
        benchmark::DoNotOptimize(me_estimate(lat, cfg));
}
BENCHMARK(BM_MeEstimate)->Arg(8)->Arg(15)->Unit(benchmark::kMillisecond);

static void BM_ArSpectrum(benchmark::State &state)
{
    const CorrelationLattice lat = noisy_lattice(8, 8);
    for (auto _ : state)
        benchmark::DoNotOptimize(ar_spectrum(lat, 32));
}
BENCHMARK(BM_ArSpectrum);

static void BM_RobustPrecoder(benchmark::State &state)
{
    const int k_users = int(state.range(0));
    std::vector<CovarianceMatrix> covs;
    std::vector<CVec> csi;
    for (int k = 0; k < k_users; ++k)
    {
        covs.push_back(covariance_from_aps(clusters(30, 100 + std::uint64_t(k)).aps, band(10)));
        csi.push_back(codebook_vector(10, 4, 17 * k));
    }
    for (auto _ : state)
        benchmark::DoNotOptimize(robust_precoder(csi, covs, 0.1));
}
BENCHMARK(BM_RobustPrecoder)->Arg(4)->Arg(12)->Unit(benchmark::kMillisecond);

static void BM_RunScenario(benchmark::State &state)
{
    Scenario sc;
    BandConfig b1 = band(8), b2 = band(10);
    b2.carrier_hz = 3.0e9;
    b2.label = "f2";
    sc.bands = {b1, b2};
    sc.k_users = 4;
    sc.n_slots = 10;
    sc.paths = 30;
    const std::vector<Method> methods = {Method::mf, Method::rzf, Method::ar_rb, Method::me_rb, Method::ideal_rb};
    for (auto _ : state)
        benchmark::DoNotOptimize(run_scenario(sc, methods, 1));
}
BENCHMARK(BM_RunScenario)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
