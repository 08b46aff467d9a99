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

#ifndef STATCSI_TRANSMISSION_EVAL_HPP
#define STATCSI_TRANSMISSION_EVAL_HPP

#include "statcsi/me_aps.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace statcsi
{
    enum class Method
    {
        mf,
        rzf,
        me_rb,
        ar_rb,
        ideal_rb
    };

    std::string method_name(Method m); // "MF", "RZF", "ME-RB", "AR-RB", "Ideal-RB"
    Method method_from_name(const std::string &name);

    struct Scenario
    {
        std::vector<BandConfig> bands;
        int source_band = 0; // Band whose lattice feeds the APS estimators
        int target_band = 1; // Band used for transmission
        int k_users = 12;
        std::vector<double> snr_db_range = {0.0, 10.0, 20.0};
        int n_slots = 200;
        int blocks_per_slot = 5;
        double aging_eta = 0.95;
        int codebook_oversampling = 4;
        int paths = 30;
        double spread = 0.02;
        double power_decay = 1.0;
        double cluster_extent = 0.9;
        int grid_size = 32;
        double estimation_snr_db = 10.0;
        double robust_rho = 1.0;
        MeConfig me;

        void validate() const;
    };

    struct PrecoderSet
    {
        std::vector<CVec> vectors;
        Method method = Method::mf;
    };

    struct PmiResult
    {
        int index = 0;       // Beam index p * (O n) + q
        CVec codeword;       // Unit-modulus entries, squared norm n^2
        double correlation = 0.0;
        bool degenerate = false; // Zero channel
    };

    PmiResult quantize_pmi(const CVec &channel, const BandConfig &band, int oversampling);
    CVec codebook_vector(int n, int oversampling, int index);

    CVec age_channel(const CVec &g_prev, const ApsGrid &aps, const BandConfig &band, double eta, Rng &rng);
    CVec age_channel(const CVec &g_prev, const ApsGrid &aps, const BandConfig &band, double eta, std::uint64_t seed);

    PrecoderSet mf_precoder(const std::vector<CVec> &csi);
    PrecoderSet rzf_precoder(const std::vector<CVec> &csi, double noise_power);
    // Dominant generalized eigenvector of (R_k + rho g g^H, sum_{l != k} R_l + noise I)
    PrecoderSet robust_precoder(const std::vector<CVec> &pmi_csi, const std::vector<CovarianceMatrix> &covariances,
                                double noise_power, double rho = 1.0, Method tag = Method::ideal_rb);
    PrecoderSet robust_precoder(const std::vector<CVec> &pmi_csi, const std::vector<ApsGrid> &aps,
                                const BandConfig &band, double noise_power, double rho = 1.0,
                                Method tag = Method::ideal_rb);

    // channels[block][user]
    double sum_rate(const std::vector<std::vector<CVec>> &channels, const PrecoderSet &precoders, double noise_power);

    struct SumRateRow
    {
        Method method;
        double snr_db;
        double sum_rate;
    };

    // Statistical CSI: true APS per user plus the estimates from the source-band lattice
    struct UserStatistics
    {
        std::vector<ApsGrid> truth;
        std::vector<ApsGrid> me;
        std::vector<ApsGrid> ar;
        std::vector<int> me_iterations;
        std::vector<bool> me_converged;
    };

    UserStatistics build_user_statistics(const Scenario &scenario, const std::vector<Method> &methods,
                                         std::uint64_t seed);

    // Per-SNR slot-averaged sum rate, one row per (method, snr) in the given method order
    std::vector<SumRateRow> run_scenario(const Scenario &scenario, const std::vector<Method> &methods,
                                         std::uint64_t seed);
}

#endif
