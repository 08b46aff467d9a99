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

#include "statcsi/transmission_eval.hpp"
#include "statcsi/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace statcsi
{
    namespace
    {
        std::uint64_t splitmix64(std::uint64_t x)
        {
            x += 0x9E3779B97F4A7C15ULL;
            x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
            x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
            return x ^ (x >> 31);
        }

        std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index)
        {
            return splitmix64(splitmix64(seed ^ (stream * 0xD1B54A32D192ED03ULL)) + index);
        }

        // Cholesky factor of the leakage matrix and the eigen-decomposition of the whitened signal covariance
        struct RobustPrep
        {
            Eigen::LLT<CMat> llt;
            CMat q;              // Eigenvectors of L^-1 R_k L^-H
            Eigen::VectorXd lam; // Ascending eigenvalues
        };

        std::vector<RobustPrep> prepare_robust(const std::vector<CovarianceMatrix> &cov, double noise_power)
        {
            const std::size_t k_users = cov.size();
            const Eigen::Index s = cov.front().entries.rows();
            CMat total = CMat::Zero(s, s);
            for (const auto &r : cov)
                total += r.entries;
            std::vector<RobustPrep> prep(k_users);
            for (std::size_t k = 0; k < k_users; ++k)
            {
                CMat leak = total - cov[k].entries;
                leak.diagonal().array() += noise_power;
                leak = 0.5 * (leak + leak.adjoint()).eval();
                prep[k].llt.compute(leak);
                if (prep[k].llt.info() != Eigen::Success)
                {
                    const double tr = std::abs(leak.trace());
                    leak.diagonal().array() += 1e-9 * (tr > 0.0 ? tr : 1.0);
                    prep[k].llt.compute(leak);
                    if (prep[k].llt.info() != Eigen::Success)
                        throw NumericalError("robust_precoder: interference matrix is not positive definite");
                }
                const auto l = prep[k].llt.matrixL();
                const CMat tmp = l.solve(cov[k].entries);
                CMat w = l.solve(tmp.adjoint()).adjoint();
                w = 0.5 * (w + w.adjoint()).eval();
                Eigen::SelfAdjointEigenSolver<CMat> es(w);
                if (es.info() != Eigen::Success)
                    throw NumericalError("robust_precoder: eigen-decomposition failed");
                prep[k].q = es.eigenvectors();
                prep[k].lam = es.eigenvalues();
            }
            return prep;
        }

        // Dominant eigenvector of diag(lam) + rho z z^H from the secular equation
        // 1 = rho sum |z_i|^2 / (mu - lam_i), mu > max(lam)
        CVec rank_one_dominant(const Eigen::VectorXd &lam, const CVec &z, double rho)
        {
            const Eigen::Index s = lam.size();
            const double lmax = lam[s - 1];
            const double z2 = z.squaredNorm();
            const double scale = std::max({std::abs(lmax), std::abs(lam[0]), rho * z2, 1e-300});
            CVec x = CVec::Zero(s);
            if (!(rho * z2 > 1e-14 * scale))
            {
                x[s - 1] = 1.0;
                return x;
            }
            double lo = lmax, hi = lmax + rho * z2;
            for (int it = 0; it < 200 && hi - lo > 1e-15 * scale; ++it)
            {
                const double mid = 0.5 * (lo + hi);
                double f = 1.0;
                for (Eigen::Index i = 0; i < s; ++i)
                    f -= rho * std::norm(z[i]) / (mid - lam[i]);
                (f < 0.0 ? lo : hi) = mid;
            }
            const double mu = hi;
            for (Eigen::Index i = 0; i < s; ++i)
                x[i] = z[i] / (mu - lam[i]);
            if (!x.allFinite() || !(x.norm() > 0.0))
            {
                x.setZero();
                x[s - 1] = 1.0;
            }
            return x;
        }

        CVec robust_vector(const RobustPrep &prep, const CVec &g, double rho)
        {
            const auto l = prep.llt.matrixL();
            const CVec y = l.solve(g);
            const CVec x = prep.q * rank_one_dominant(prep.lam, prep.q.adjoint() * y, rho);
            CVec p = prep.llt.matrixU().solve(x);
            const double nrm = p.norm();
            if (!(nrm > 0.0) || !p.allFinite())
                throw NumericalError("robust_precoder: degenerate precoder");
            p /= nrm;
            // Fix the arbitrary eigenvector phase so that the first nonzero entry is real positive
            for (Eigen::Index i = 0; i < p.size(); ++i)
                if (std::abs(p[i]) > 1e-300)
                {
                    p *= std::conj(p[i]) / std::abs(p[i]);
                    break;
                }
            return p;
        }
    }

    std::string method_name(Method m)
    {
        switch (m)
        {
        case Method::mf: return "MF";
        case Method::rzf: return "RZF";
        case Method::me_rb: return "ME-RB";
        case Method::ar_rb: return "AR-RB";
        case Method::ideal_rb: return "Ideal-RB";
        }
        return "?";
    }

    Method method_from_name(const std::string &name)
    {
        for (Method m : {Method::mf, Method::rzf, Method::me_rb, Method::ar_rb, Method::ideal_rb})
            if (method_name(m) == name)
                return m;
        throw InvalidArgument("unknown method '" + name + "'");
    }

    void Scenario::validate() const
    {
        if (bands.empty())
            throw InvalidArgument("scenario: at least one band required");
        for (const auto &b : bands)
            b.validate();
        if (source_band < 0 || source_band >= int(bands.size()) || target_band < 0 || target_band >= int(bands.size()))
            throw InvalidArgument("scenario: band index out of range");
        if (k_users < 1)
            throw InvalidArgument("scenario: k_users must be >= 1");
        if (blocks_per_slot < 2)
            throw InvalidArgument("scenario: blocks_per_slot must be >= 2");
        if (n_slots < 1)
            throw InvalidArgument("scenario: n_slots must be >= 1");
        if (!(aging_eta >= 0.0 && aging_eta <= 1.0))
            throw InvalidArgument("scenario: aging_eta must lie in [0, 1]");
        if (codebook_oversampling < 1)
            throw InvalidArgument("scenario: codebook_oversampling must be >= 1");
        if (paths < 1)
            throw InvalidArgument("scenario: paths must be >= 1");
        if (snr_db_range.empty())
            throw InvalidArgument("scenario: snr_db_range must be non-empty");
        me.validate(bands[std::size_t(source_band)].n);
    }

    CVec codebook_vector(int n, int oversampling, int index)
    {
        const int beams = oversampling * n;
        if (index < 0 || index >= beams * beams)
            throw InvalidArgument("codebook_vector: index out of range");
        const int p = index / beams, q = index % beams;
        return steering_vector_angular(n, double(p) / beams - 0.5, double(q) / beams - 0.5);
    }

    PmiResult quantize_pmi(const CVec &channel, const BandConfig &band, int oversampling)
    {
        band.validate();
        const int n = band.n;
        if (channel.size() != n * n)
            throw InvalidArgument("quantize_pmi: channel length must be n^2");
        if (oversampling < 1)
            throw InvalidArgument("quantize_pmi: oversampling must be >= 1");
        const int beams = oversampling * n;
        CMat f(beams, n);
        for (int p = 0; p < beams; ++p)
            for (int a = 0; a < n; ++a)
                f(p, a) = std::polar(1.0, 2.0 * std::numbers::pi * a * (double(p) / beams - 0.5));
        CMat g(n, n);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                g(a, b) = channel[a * n + b];
        const CMat corr = f * g * f.transpose();
        PmiResult out;
        double best = -1.0;
        for (int p = 0; p < beams; ++p)
            for (int q = 0; q < beams; ++q)
            {
                const double c = std::abs(corr(p, q));
                if (c > best)
                {
                    best = c;
                    out.index = p * beams + q;
                }
            }
        out.correlation = best;
        out.degenerate = !(channel.squaredNorm() > 0.0);
        if (out.degenerate)
            out.index = 0;
        out.codeword = codebook_vector(n, oversampling, out.index);
        return out;
    }

    CVec age_channel(const CVec &g_prev, const ApsGrid &aps, const BandConfig &band, double eta, Rng &rng)
    {
        if (!(eta >= 0.0 && eta <= 1.0))
            throw InvalidArgument("age_channel: eta must lie in [0, 1]");
        if (eta == 1.0)
            return g_prev;
        const CVec innov = sample_channel(aps, band, rng);
        if (innov.size() != g_prev.size())
            throw InvalidArgument("age_channel: channel length mismatch");
        return eta * g_prev + std::sqrt(1.0 - eta * eta) * innov;
    }

    CVec age_channel(const CVec &g_prev, const ApsGrid &aps, const BandConfig &band, double eta, std::uint64_t seed)
    {
        Rng rng(seed);
        return age_channel(g_prev, aps, band, eta, rng);
    }

    PrecoderSet mf_precoder(const std::vector<CVec> &csi)
    {
        if (csi.empty())
            throw InvalidArgument("mf_precoder: no users");
        PrecoderSet out;
        out.method = Method::mf;
        for (const auto &g : csi)
        {
            const double nrm = g.norm();
            if (!(nrm > 0.0))
                throw InvalidArgument("mf_precoder: zero CSI vector");
            out.vectors.push_back(g / nrm);
        }
        return out;
    }

    PrecoderSet rzf_precoder(const std::vector<CVec> &csi, double noise_power)
    {
        if (csi.empty())
            throw InvalidArgument("rzf_precoder: no users");
        const Eigen::Index s = csi.front().size();
        const int k_users = int(csi.size());
        CMat g(s, k_users);
        for (int k = 0; k < k_users; ++k)
        {
            if (csi[std::size_t(k)].size() != s)
                throw InvalidArgument("rzf_precoder: CSI vectors differ in length");
            if (!(csi[std::size_t(k)].norm() > 0.0))
                throw InvalidArgument("rzf_precoder: zero CSI vector");
            g.col(k) = csi[std::size_t(k)];
        }
        CMat gram = g.adjoint() * g;
        gram.diagonal().array() += double(k_users) * noise_power;
        const CMat p = g * gram.ldlt().solve(CMat::Identity(k_users, k_users));
        PrecoderSet out;
        out.method = Method::rzf;
        for (int k = 0; k < k_users; ++k)
        {
            const double nrm = p.col(k).norm();
            if (!(nrm > 0.0) || !p.col(k).allFinite())
                throw NumericalError("rzf_precoder: degenerate precoder column");
            out.vectors.push_back(p.col(k) / nrm);
        }
        return out;
    }

    PrecoderSet robust_precoder(const std::vector<CVec> &pmi_csi, const std::vector<CovarianceMatrix> &covariances,
                                double noise_power, double rho, Method tag)
    {
        if (pmi_csi.empty() || pmi_csi.size() != covariances.size())
            throw InvalidArgument("robust_precoder: need one covariance per user");
        for (std::size_t k = 0; k < pmi_csi.size(); ++k)
            if (covariances[k].entries.rows() != pmi_csi[k].size())
                throw InvalidArgument("robust_precoder: covariance size does not match the CSI length");
        const auto prep = prepare_robust(covariances, noise_power);
        PrecoderSet out;
        out.method = tag;
        for (std::size_t k = 0; k < pmi_csi.size(); ++k)
            out.vectors.push_back(robust_vector(prep[k], pmi_csi[k], rho));
        return out;
    }

    PrecoderSet robust_precoder(const std::vector<CVec> &pmi_csi, const std::vector<ApsGrid> &aps,
                                const BandConfig &band, double noise_power, double rho, Method tag)
    {
        std::vector<CovarianceMatrix> cov;
        for (const auto &s : aps)
            cov.push_back(covariance_from_aps(s, band));
        return robust_precoder(pmi_csi, cov, noise_power, rho, tag);
    }

    double sum_rate(const std::vector<std::vector<CVec>> &channels, const PrecoderSet &precoders, double noise_power)
    {
        if (channels.empty())
            throw InvalidArgument("sum_rate: no transmission blocks");
        const std::size_t k_users = precoders.vectors.size();
        const double blocks = double(channels.size());
        double total = 0.0;
        for (std::size_t k = 0; k < k_users; ++k)
        {
            double interference = 0.0;
            std::vector<double> signal(channels.size());
            for (std::size_t t = 0; t < channels.size(); ++t)
            {
                if (channels[t].size() != k_users)
                    throw InvalidArgument("sum_rate: user count mismatch");
                const CVec &g = channels[t][k];
                for (std::size_t l = 0; l < k_users; ++l)
                {
                    const double gain = std::norm(g.dot(precoders.vectors[l]));
                    if (l == k)
                        signal[t] = gain;
                    else
                        interference += gain;
                }
            }
            const double w = interference / blocks + noise_power;
            double rate = 0.0;
            for (double s : signal)
                rate += std::log2(w + s);
            total += rate / blocks - std::log2(w);
        }
        return std::max(total, 0.0);
    }

    UserStatistics build_user_statistics(const Scenario &sc, const std::vector<Method> &methods, std::uint64_t seed)
    {
        sc.validate();
        const BandConfig &src = sc.bands[std::size_t(sc.source_band)];
        const bool need_me = std::find(methods.begin(), methods.end(), Method::me_rb) != methods.end();
        const bool need_ar = std::find(methods.begin(), methods.end(), Method::ar_rb) != methods.end();
        UserStatistics st;
        for (int k = 0; k < sc.k_users; ++k)
        {
            ClusterApsParams p;
            p.b = sc.grid_size;
            p.paths = sc.paths;
            p.spread = sc.spread;
            p.power_decay = sc.power_decay;
            p.extent = sc.cluster_extent;
            p.spacing_ratio = src.spacing_ratio;
            ClusterAps c = generate_cluster_aps(p, derive_seed(seed, 1, std::uint64_t(k)));
            st.truth.push_back(c.aps);
            if (!need_me && !need_ar)
                continue;
            const CorrelationLattice lat =
                add_lattice_noise(lattice_from_aps(c.aps, src, src.n), sc.estimation_snr_db, c.aps.mass());
            if (need_me)
            {
                MeConfig cfg = sc.me;
                cfg.fft_size = sc.grid_size;
                MeResult r = me_estimate(lat, cfg);
                st.me.push_back(r.spectrum);
                st.me_iterations.push_back(r.diagnostics.iterations_run);
                st.me_converged.push_back(r.diagnostics.converged);
            }
            if (need_ar)
                st.ar.push_back(ar_spectrum(lat, sc.grid_size).spectrum);
        }
        return st;
    }

    std::vector<SumRateRow> run_scenario(const Scenario &sc, const std::vector<Method> &methods, std::uint64_t seed)
    {
        const UserStatistics st = build_user_statistics(sc, methods, seed);
        const BandConfig &tgt = sc.bands[std::size_t(sc.target_band)];
        const int k_users = sc.k_users;
        const std::size_t n_snr = sc.snr_db_range.size();

        auto covs = [&](const std::vector<ApsGrid> &aps) {
            std::vector<CovarianceMatrix> out;
            for (const auto &a : aps)
                out.push_back(covariance_from_aps(a, tgt));
            return out;
        };
        std::vector<std::vector<RobustPrep>> prep(methods.size() * n_snr);
        for (std::size_t mi = 0; mi < methods.size(); ++mi)
        {
            const Method m = methods[mi];
            if (m != Method::me_rb && m != Method::ar_rb && m != Method::ideal_rb)
                continue;
            const auto c = covs(m == Method::me_rb ? st.me : m == Method::ar_rb ? st.ar : st.truth);
            for (std::size_t si = 0; si < n_snr; ++si)
                prep[mi * n_snr + si] = prepare_robust(c, std::pow(10.0, -sc.snr_db_range[si] / 10.0));
        }

        std::vector<double> acc(methods.size() * n_snr, 0.0);
        Rng rng(derive_seed(seed, 2, 0));
        for (int slot = 0; slot < sc.n_slots; ++slot)
        {
            std::vector<std::vector<CVec>> blocks(std::size_t(sc.blocks_per_slot), std::vector<CVec>(std::size_t(k_users)));
            for (int k = 0; k < k_users; ++k)
            {
                blocks[0][std::size_t(k)] = sample_channel(st.truth[std::size_t(k)], tgt, rng);
                for (int t = 1; t < sc.blocks_per_slot; ++t)
                    blocks[std::size_t(t)][std::size_t(k)] =
                        age_channel(blocks[std::size_t(t - 1)][std::size_t(k)], st.truth[std::size_t(k)], tgt,
                                    sc.aging_eta, rng);
            }
            std::vector<CVec> pmi;
            for (int k = 0; k < k_users; ++k)
                pmi.push_back(quantize_pmi(blocks[0][std::size_t(k)], tgt, sc.codebook_oversampling).codeword);
            const std::vector<std::vector<CVec>> tx(blocks.begin() + 1, blocks.end());

            for (std::size_t mi = 0; mi < methods.size(); ++mi)
                for (std::size_t si = 0; si < n_snr; ++si)
                {
                    const double noise = std::pow(10.0, -sc.snr_db_range[si] / 10.0);
                    PrecoderSet ps;
                    switch (methods[mi])
                    {
                    case Method::mf: ps = mf_precoder(pmi); break;
                    case Method::rzf: ps = rzf_precoder(pmi, noise); break;
                    default:
                        ps.method = methods[mi];
                        for (int k = 0; k < k_users; ++k)
                            ps.vectors.push_back(
                                robust_vector(prep[mi * n_snr + si][std::size_t(k)], pmi[std::size_t(k)], sc.robust_rho));
                    }
                    acc[mi * n_snr + si] += sum_rate(tx, ps, noise);
                }
        }
        std::vector<SumRateRow> rows;
        for (std::size_t mi = 0; mi < methods.size(); ++mi)
            for (std::size_t si = 0; si < n_snr; ++si)
                rows.push_back({methods[mi], sc.snr_db_range[si], acc[mi * n_snr + si] / double(sc.n_slots)});
        return rows;
    }
}
