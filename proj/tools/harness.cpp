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

#include "harness.hpp"

#include "statcsi/statcsi.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace statcsi::harness
{
    using json = nlohmann::json;
    namespace fs = std::filesystem;

    namespace
    {
        const std::vector<std::string> experiment_tags = {"cov-nmse", "aps-figure", "aps-nmse-sweep", "sumrate"};

        // Strict reader over one JSON object: typed getters with defaults, unknown keys rejected by finish()
        class Reader
        {
        public:
            Reader(const json &j, std::string path) : j_(j), path_(std::move(path))
            {
                if (!j_.is_object())
                    throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
            }

            std::string field(const std::string &key) const { return path_.empty() ? key : path_ + "." + key; }
            bool has(const std::string &key) const { return j_.contains(key); }

            const json *get(const std::string &key)
            {
                seen_.insert(key);
                auto it = j_.find(key);
                return it == j_.end() ? nullptr : &*it;
            }

            double number(const std::string &key, double def, double lo = -HUGE_VAL, double hi = HUGE_VAL)
            {
                const json *v = get(key);
                if (!v)
                    return def;
                if (!v->is_number())
                    throw ConfigError(field(key), "expected a number");
                const double x = v->get<double>();
                if (!std::isfinite(x) || x < lo || x > hi)
                    throw ConfigError(field(key), "value out of range");
                return x;
            }

            int integer(const std::string &key, int def, int lo, int hi)
            {
                const json *v = get(key);
                if (!v)
                    return def;
                return as_int(*v, field(key), lo, hi);
            }

            bool boolean(const std::string &key, bool def)
            {
                const json *v = get(key);
                if (!v)
                    return def;
                if (!v->is_boolean())
                    throw ConfigError(field(key), "expected true or false");
                return v->get<bool>();
            }

            std::string string(const std::string &key, const std::string &def)
            {
                const json *v = get(key);
                if (!v)
                    return def;
                if (!v->is_string())
                    throw ConfigError(field(key), "expected a string");
                return v->get<std::string>();
            }

            std::vector<double> numbers(const std::string &key, const std::vector<double> &def)
            {
                const json *v = get(key);
                if (!v)
                    return def;
                if (!v->is_array() || v->empty())
                    throw ConfigError(field(key), "expected a non-empty array of numbers");
                std::vector<double> out;
                for (std::size_t i = 0; i < v->size(); ++i)
                {
                    if (!(*v)[i].is_number())
                        throw ConfigError(field(key) + "[" + std::to_string(i) + "]", "expected a number");
                    out.push_back((*v)[i].get<double>());
                }
                return out;
            }

            std::vector<int> integers(const std::string &key, const std::vector<int> &def, int lo, int hi)
            {
                const json *v = get(key);
                if (!v)
                    return def;
                if (!v->is_array() || v->empty())
                    throw ConfigError(field(key), "expected a non-empty array of integers");
                std::vector<int> out;
                for (std::size_t i = 0; i < v->size(); ++i)
                    out.push_back(as_int((*v)[i], field(key) + "[" + std::to_string(i) + "]", lo, hi));
                return out;
            }

            void finish() const
            {
                for (auto it = j_.begin(); it != j_.end(); ++it)
                    if (!seen_.count(it.key()))
                        throw ConfigError(field(it.key()), "unknown field");
            }

            static int as_int(const json &v, const std::string &path, int lo, int hi)
            {
                if (!v.is_number_integer())
                    throw ConfigError(path, "expected an integer");
                const long long x = v.get<long long>();
                if (x < lo || x > hi)
                    throw ConfigError(path, "value out of range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
                return int(x);
            }

        private:
            const json &j_;
            std::string path_;
            std::set<std::string> seen_;
        };

        struct Config
        {
            std::string experiment;
            std::vector<std::uint64_t> seeds;
            std::string output_dir;
            int threads = 1;
            Scenario sc;
            std::vector<int> target_bands;
            std::vector<int> paths;
            double measurement_snr_db = 10.0;
            std::vector<Method> methods;
            ArSolveOptions ar;
            double ar_pos_floor = 1e-12;
            double peak_threshold = 0.05;
            int peak_tolerance = 1;
        };

        std::vector<int> default_paths(const std::string &exp)
        {
            if (exp == "cov-nmse")
                return {5, 10, 15, 20};
            if (exp == "aps-figure")
                return {8};
            if (exp == "aps-nmse-sweep")
                return {4, 8, 15, 30};
            return {4, 30};
        }

        std::vector<BandConfig> default_bands()
        {
            return {{"f1", 2.4e9, 8, 0.5}, {"f2", 3.0e9, 10, 0.5}, {"f3", 3.6e9, 12, 0.5}};
        }

        Config parse_config(const json &user, const RunOverrides &ov)
        {
            Config c;
            Reader root(user, "");
            c.experiment = root.string("experiment", "");
            if (std::find(experiment_tags.begin(), experiment_tags.end(), c.experiment) == experiment_tags.end())
                throw ConfigError("experiment", "expected one of cov-nmse, aps-figure, aps-nmse-sweep, sumrate");

            if (const json *s = root.get("seeds"))
            {
                if (!s->is_array())
                    throw ConfigError("seeds", "expected an array of non-negative integers");
                for (std::size_t i = 0; i < s->size(); ++i)
                {
                    const json &v = (*s)[i];
                    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
                        throw ConfigError("seeds[" + std::to_string(i) + "]", "expected a non-negative integer");
                    c.seeds.push_back(v.get<std::uint64_t>());
                }
            }
            else
                c.seeds = {1, 2, 3, 4, 5};
            if (ov.seeds)
                c.seeds = *ov.seeds;
            if (c.seeds.empty())
                throw ConfigError("seeds", "must be non-empty");

            c.output_dir = ov.output_dir.value_or(root.string("output_dir", "results/" + c.experiment));
            c.threads = ov.threads.value_or(root.integer("threads", 1, 1, 1024));
            if (c.threads < 1)
                throw ConfigError("threads", "must be >= 1");

            static const json empty = json::object();
            const json *sj = root.get("scenario");
            Reader s(sj ? *sj : empty, "scenario");
            Scenario &sc = c.sc;
            if (const json *bj = s.get("bands"))
            {
                if (!bj->is_array() || bj->empty())
                    throw ConfigError("scenario.bands", "expected a non-empty array of band objects");
                for (std::size_t i = 0; i < bj->size(); ++i)
                {
                    Reader b((*bj)[i], "scenario.bands[" + std::to_string(i) + "]");
                    BandConfig band;
                    band.label = b.string("label", "f" + std::to_string(i + 1));
                    band.carrier_hz = b.number("carrier_hz", 2.4e9, 1.0);
                    if (!b.has("n"))
                        throw ConfigError(b.field("n"), "required field missing");
                    band.n = b.integer("n", 0, 2, 64);
                    band.spacing_ratio = b.number("spacing_ratio", 0.5);
                    if (!(band.spacing_ratio > 0.0) || band.spacing_ratio > 0.5)
                        throw ConfigError(b.field("spacing_ratio"), "must lie in (0, 0.5]");
                    b.finish();
                    sc.bands.push_back(band);
                }
            }
            else
                sc.bands = default_bands();
            const int nb = int(sc.bands.size());
            sc.source_band = s.integer("source_band", 0, 0, nb - 1);
            std::vector<int> def_targets;
            for (int i = 0; i < nb; ++i)
                if (i != sc.source_band)
                    def_targets.push_back(i);
            if (def_targets.empty())
                def_targets.push_back(sc.source_band);
            c.target_bands = s.integers("target_bands", def_targets, 0, nb - 1);
            sc.target_band = s.integer("target_band", def_targets.front(), 0, nb - 1);
            sc.k_users = s.integer("k_users", 12, 1, 1024);
            sc.snr_db_range = s.numbers("snr_db_range", {0.0, 10.0, 20.0});
            sc.n_slots = s.integer("n_slots", 200, 1, 1000000);
            sc.blocks_per_slot = s.integer("blocks_per_slot", 5, 2, 1000);
            sc.aging_eta = s.number("aging_eta", 0.95, 0.0, 1.0);
            sc.codebook_oversampling = s.integer("codebook_oversampling", 4, 1, 64);
            c.paths = s.integers("paths", default_paths(c.experiment), 1, 100000);
            sc.paths = c.paths.front();
            sc.spread = s.number("spread", 0.02);
            if (!(sc.spread > 0.0))
                throw ConfigError("scenario.spread", "must be > 0");
            sc.power_decay = s.number("power_decay", 1.0, 0.0);
            sc.cluster_extent = s.number("cluster_extent", 0.9);
            if (!(sc.cluster_extent > 0.0) || sc.cluster_extent > 1.0)
                throw ConfigError("scenario.cluster_extent", "must lie in (0, 1]");
            sc.grid_size = s.integer("grid_size", 32, 8, 4096);
            if (sc.grid_size % 2 != 0)
                throw ConfigError("scenario.grid_size", "must be even");
            c.measurement_snr_db = s.number("measurement_snr_db", c.experiment == "cov-nmse" ? 30.0 : 10.0);
            sc.estimation_snr_db = c.measurement_snr_db;
            sc.robust_rho = s.number("robust_rho", 1.0, 0.0);
            if (const json *mj = s.get("methods"))
            {
                if (!mj->is_array() || mj->empty())
                    throw ConfigError("scenario.methods", "expected a non-empty array of method names");
                for (std::size_t i = 0; i < mj->size(); ++i)
                {
                    const std::string p = "scenario.methods[" + std::to_string(i) + "]";
                    if (!(*mj)[i].is_string())
                        throw ConfigError(p, "expected a string");
                    try
                    {
                        c.methods.push_back(method_from_name((*mj)[i].get<std::string>()));
                    }
                    catch (const InvalidArgument &e)
                    {
                        throw ConfigError(p, e.what());
                    }
                }
            }
            else
                c.methods = {Method::mf, Method::rzf, Method::ar_rb, Method::me_rb, Method::ideal_rb};
            s.finish();

            const BandConfig &src = sc.bands[std::size_t(sc.source_band)];
            if (2 * src.n - 1 > sc.grid_size)
                throw ConfigError("scenario.grid_size", "must be >= 2 n - 1 of the source band");
            for (std::size_t i = 0; i < c.target_bands.size(); ++i)
                if (sc.bands[std::size_t(c.target_bands[i])].n < src.n)
                    throw ConfigError("scenario.target_bands[" + std::to_string(i) + "]",
                                      "target array must not be smaller than the source array");

            const json *mej = root.get("me");
            Reader me(mej ? *mej : empty, "me");
            MeConfig &m = sc.me;
            m.fft_size = sc.grid_size;
            const double auto_eps = 1e-4 * double((2 * src.n - 1) * (2 * src.n - 1));
            if (const json *e = me.get("eps_min"); e && !e->is_null())
            {
                if (!e->is_number() || !(e->get<double>() > 0.0))
                    throw ConfigError("me.eps_min", "expected a positive number or null");
                m.eps_min = e->get<double>();
            }
            else
                m.eps_min = auto_eps;
            m.max_iters = me.integer("max_iters", 500, 1, 10000000);
            m.k0 = me.number("k0", 1.0);
            if (!(m.k0 > 0.0) || m.k0 > 1.0)
                throw ConfigError("me.k0", "must lie in (0, 1]");
            m.pos_floor = me.number("pos_floor", 1e-12);
            if (!(m.pos_floor > 0.0))
                throw ConfigError("me.pos_floor", "must be > 0");
            m.eps_initial = me.number("eps_initial", 1.0, 0.0);
            m.k_halving_tolerance = me.number("k_halving_tolerance", 0.2, 0.0);
            m.alpha_monotone = me.boolean("alpha_monotone", false);
            me.finish();
            if (m.fft_size < 2 * (2 * src.n - 1))
                throw ConfigError("scenario.grid_size", "ME requires grid_size >= 2 (2 n - 1) of the source band");

            const json *arj = root.get("ar");
            Reader ar(arj ? *arj : empty, "ar");
            c.ar.cond_threshold = ar.number("cond_threshold", 1e12, 1.0);
            c.ar.ridge = ar.number("ridge", 1e-8, 0.0);
            c.ar_pos_floor = ar.number("pos_floor", 1e-12);
            if (!(c.ar_pos_floor > 0.0))
                throw ConfigError("ar.pos_floor", "must be > 0");
            ar.finish();

            const json *pj = root.get("peaks");
            Reader pk(pj ? *pj : empty, "peaks");
            c.peak_threshold = pk.number("rel_threshold", 0.05, 0.0, 1.0);
            c.peak_tolerance = pk.integer("tolerance_cells", 1, 0, 1000);
            pk.finish();
            root.finish();

            try
            {
                sc.validate();
            }
            catch (const InvalidArgument &e)
            {
                throw ConfigError("scenario", e.what());
            }
            return c;
        }

        json to_json(const Config &c)
        {
            json bands = json::array();
            for (const auto &b : c.sc.bands)
                bands.push_back({{"label", b.label}, {"carrier_hz", b.carrier_hz}, {"n", b.n}, {"spacing_ratio", b.spacing_ratio}});
            json methods = json::array();
            for (Method m : c.methods)
                methods.push_back(method_name(m));
            const Scenario &s = c.sc;
            return {
                {"experiment", c.experiment},
                {"seeds", c.seeds},
                {"output_dir", c.output_dir},
                {"threads", c.threads},
                {"scenario",
                 {{"bands", bands},
                  {"source_band", s.source_band},
                  {"target_bands", c.target_bands},
                  {"target_band", s.target_band},
                  {"k_users", s.k_users},
                  {"snr_db_range", s.snr_db_range},
                  {"n_slots", s.n_slots},
                  {"blocks_per_slot", s.blocks_per_slot},
                  {"aging_eta", s.aging_eta},
                  {"codebook_oversampling", s.codebook_oversampling},
                  {"paths", c.paths},
                  {"spread", s.spread},
                  {"power_decay", s.power_decay},
                  {"cluster_extent", s.cluster_extent},
                  {"grid_size", s.grid_size},
                  {"measurement_snr_db", c.measurement_snr_db},
                  {"robust_rho", s.robust_rho},
                  {"methods", methods}}},
                {"me",
                 {{"eps_min", *s.me.eps_min},
                  {"max_iters", s.me.max_iters},
                  {"k0", s.me.k0},
                  {"pos_floor", s.me.pos_floor},
                  {"eps_initial", s.me.eps_initial},
                  {"k_halving_tolerance", s.me.k_halving_tolerance},
                  {"alpha_monotone", s.me.alpha_monotone}}},
                {"ar", {{"cond_threshold", c.ar.cond_threshold}, {"ridge", c.ar.ridge}, {"pos_floor", c.ar_pos_floor}}},
                {"peaks", {{"rel_threshold", c.peak_threshold}, {"tolerance_cells", c.peak_tolerance}}},
            };
        }

        std::uint64_t task_seed(std::uint64_t seed, int paths)
        {
            std::uint64_t x = seed * 0x9E3779B97F4A7C15ULL + std::uint64_t(paths) * 0xC2B2AE3D27D4EB4FULL;
            x ^= x >> 31;
            x *= 0xBF58476D1CE4E5B9ULL;
            x ^= x >> 29;
            return x;
        }

        ClusterAps make_aps(const Config &c, std::uint64_t seed, int paths)
        {
            ClusterApsParams p;
            p.b = c.sc.grid_size;
            p.paths = paths;
            p.spread = c.sc.spread;
            p.power_decay = c.sc.power_decay;
            p.extent = c.sc.cluster_extent;
            p.spacing_ratio = c.sc.bands[std::size_t(c.sc.source_band)].spacing_ratio;
            return generate_cluster_aps(p, task_seed(seed, paths));
        }

        std::string f(double x) { return format_double(x); }

        struct FileSpec
        {
            std::string header;
            std::vector<std::string> group_by;
            std::string value;
        };

        // Output of one (seed, paths) task: CSV rows per file plus whole files
        struct TaskOutput
        {
            std::vector<std::pair<std::string, std::string>> rows;
            std::vector<std::pair<std::string, std::string>> blobs;
        };

        std::string stem(int paths, std::uint64_t seed)
        {
            return "p" + std::to_string(paths) + "_seed" + std::to_string(seed);
        }

        std::string matrix_csv(const RMat &m)
        {
            std::string out;
            for (Eigen::Index i = 0; i < m.rows(); ++i)
            {
                for (Eigen::Index j = 0; j < m.cols(); ++j)
                {
                    if (j)
                        out += ',';
                    out += f(m(i, j));
                }
                out += '\n';
            }
            return out;
        }

        json trace_json(const MeDiagnostics &d)
        {
            return {{"iterations_run", d.iterations_run}, {"converged", d.converged},   {"clamped", d.clamped},
                    {"eps_min", d.eps_min},               {"final_eps", d.final_eps},   {"eps_trace", d.eps_trace},
                    {"alpha_trace", d.alpha_trace},       {"beta_trace", d.beta_trace}, {"k_trace", d.k_trace},
                    {"min_ratio_trace", d.min_ratio_trace}};
        }

        TaskOutput run_cov_nmse(const Config &c, std::uint64_t seed, int paths)
        {
            TaskOutput out;
            const BandConfig &src = c.sc.bands[std::size_t(c.sc.source_band)];
            const ClusterAps aps = make_aps(c, seed, paths);
            CovarianceMatrix r1 = covariance_from_aps(aps.aps, src);
            r1.entries.diagonal().array() += aps.aps.mass() * std::pow(10.0, -c.measurement_snr_db / 10.0);
            for (int t : c.target_bands)
            {
                const BandConfig &tgt = c.sc.bands[std::size_t(t)];
                const CovarianceMatrix truth = covariance_from_aps(aps.aps, tgt);
                for (auto [name, m] : {std::pair{"AR", PredictionMethod::autoregressive}, std::pair{"linear", PredictionMethod::linear}})
                {
                    const double e = nmse(predict_covariance(r1, src, tgt, m, c.ar), truth);
                    out.rows.emplace_back("nmse_vs_paths.csv", std::string(name) + "," + std::to_string(tgt.n) + "," +
                                                                   std::to_string(paths) + "," + std::to_string(seed) + "," + f(e) + "\n");
                }
            }
            return out;
        }

        struct Estimates
        {
            ClusterAps truth;
            CorrelationLattice lattice;
            MeResult me;
            ArSpectrum ar;
        };

        Estimates estimate(const Config &c, std::uint64_t seed, int paths)
        {
            const BandConfig &src = c.sc.bands[std::size_t(c.sc.source_band)];
            Estimates e;
            e.truth = make_aps(c, seed, paths);
            e.lattice = add_lattice_noise(lattice_from_aps(e.truth.aps, src, src.n), c.measurement_snr_db, e.truth.aps.mass());
            e.me = me_estimate(e.lattice, c.sc.me);
            e.ar = ar_spectrum(e.lattice, c.sc.grid_size, c.ar_pos_floor);
            return e;
        }

        TaskOutput run_aps_figure(const Config &c, std::uint64_t seed, int paths)
        {
            TaskOutput out;
            const Estimates e = estimate(c, seed, paths);
            const std::string s = stem(paths, seed);
            out.blobs.emplace_back("aps_true_" + s + ".csv", matrix_csv(e.truth.aps.values));
            out.blobs.emplace_back("aps_ar_" + s + ".csv", matrix_csv(e.ar.spectrum.values));
            out.blobs.emplace_back("aps_me_" + s + ".csv", matrix_csv(e.me.spectrum.values));
            out.blobs.emplace_back("lattice_" + s + "_re.csv", matrix_csv(e.lattice.values.real()));
            out.blobs.emplace_back("lattice_" + s + "_im.csv", matrix_csv(e.lattice.values.imag()));
            out.blobs.emplace_back("me_trace_" + s + ".json", trace_json(e.me.diagnostics).dump(1) + "\n");
            const int b = c.sc.grid_size;
            for (auto [name, grid] : {std::pair{"AR", &e.ar.spectrum}, std::pair{"ME", &e.me.spectrum}})
            {
                const auto pk = find_peaks(*grid, c.peak_threshold);
                const int matched = count_matched(pk, e.truth.centers_freq, b, c.peak_tolerance);
                out.rows.emplace_back("peaks.csv", std::string(name) + "," + std::to_string(paths) + "," + std::to_string(seed) +
                                                       "," + std::to_string(pk.size()) + "," + std::to_string(matched) + "," +
                                                       (matched == paths ? "1" : "0") + "\n");
            }
            return out;
        }

        TaskOutput run_aps_nmse(const Config &c, std::uint64_t seed, int paths)
        {
            TaskOutput out;
            const Estimates e = estimate(c, seed, paths);
            for (int t : c.target_bands)
            {
                const BandConfig &tgt = c.sc.bands[std::size_t(t)];
                const CovarianceMatrix truth = covariance_from_aps(e.truth.aps, tgt);
                for (auto [name, grid] : {std::pair{"AR", &e.ar.spectrum}, std::pair{"ME", &e.me.spectrum}})
                {
                    const double v = nmse(covariance_from_aps(*grid, tgt), truth);
                    out.rows.emplace_back("aps_nmse.csv", std::string(name) + "," + std::to_string(tgt.n) + "," +
                                                              std::to_string(paths) + "," + std::to_string(seed) + "," + f(v) + "," +
                                                              (name == std::string("ME") ? (e.me.diagnostics.converged ? "1" : "0") : "1") +
                                                              "\n");
                }
            }
            return out;
        }

        TaskOutput run_sumrate(const Config &c, std::uint64_t seed, int paths)
        {
            TaskOutput out;
            Scenario sc = c.sc;
            sc.paths = paths;
            const auto rows = run_scenario(sc, c.methods, task_seed(seed, paths));
            for (const auto &r : rows)
                out.rows.emplace_back("sum_rate_p" + std::to_string(paths) + ".csv",
                                      method_name(r.method) + "," + f(r.snr_db) + "," + f(r.sum_rate) + "," +
                                          std::to_string(sc.n_slots) + "," + std::to_string(seed) + "\n");
            return out;
        }

        std::map<std::string, FileSpec> file_specs(const Config &c)
        {
            std::map<std::string, FileSpec> specs;
            if (c.experiment == "cov-nmse")
                specs["nmse_vs_paths.csv"] = {"method,target_n,paths,seed,nmse", {"method", "target_n", "paths"}, "nmse"};
            else if (c.experiment == "aps-figure")
                specs["peaks.csv"] = {"method,paths,seed,peaks_found,centers_matched,all_matched", {"method", "paths"}, "centers_matched"};
            else if (c.experiment == "aps-nmse-sweep")
                specs["aps_nmse.csv"] = {"method,target_n,paths,seed,nmse,converged", {"method", "target_n", "paths"}, "nmse"};
            else
                for (int p : c.paths)
                    specs["sum_rate_p" + std::to_string(p) + ".csv"] = {"method,snr_db,sum_rate_bps_hz,n_slots,seed",
                                                                        {"method", "snr_db"}, "sum_rate_bps_hz"};
            return specs;
        }

        void write_file(const fs::path &path, const std::string &content)
        {
            std::ofstream out(path, std::ios::binary | std::ios::trunc);
            if (!out)
                throw std::runtime_error("cannot write '" + path.string() + "'");
            out << content;
            out.close();
            if (!out)
                throw std::runtime_error("write failed for '" + path.string() + "'");
        }

        std::string read_file(const fs::path &path)
        {
            std::ifstream in(path, std::ios::binary);
            if (!in)
                throw InvalidArgument("cannot open '" + path.string() + "'");
            std::stringstream ss;
            ss << in.rdbuf();
            return ss.str();
        }
    }

    std::vector<std::uint64_t> parse_seed_list(const std::string &text)
    {
        std::vector<std::uint64_t> seeds;
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ','))
        {
            std::uint64_t v = 0;
            const auto r = std::from_chars(item.data(), item.data() + item.size(), v);
            if (item.empty() || r.ec != std::errc() || r.ptr != item.data() + item.size())
                throw ConfigError("--seeds", "malformed seed '" + item + "'");
            seeds.push_back(v);
        }
        if (seeds.empty())
            throw ConfigError("--seeds", "must be non-empty");
        return seeds;
    }

    json resolve_config(const json &user, const RunOverrides &overrides)
    {
        return to_json(parse_config(user, overrides));
    }

    std::vector<std::string> execute(const json &resolved, std::ostream &log)
    {
        const Config c = parse_config(resolved, {});
        const auto specs = file_specs(c);

        std::vector<std::pair<std::uint64_t, int>> tasks;
        for (std::uint64_t s : c.seeds)
            for (int p : c.paths)
                tasks.emplace_back(s, p);
        std::vector<TaskOutput> outputs(tasks.size());
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        auto worker = [&] {
            for (;;)
            {
                const std::size_t i = next.fetch_add(1);
                if (i >= tasks.size())
                    return;
                {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (failure)
                        return;
                }
                try
                {
                    const auto [seed, paths] = tasks[i];
                    if (c.experiment == "cov-nmse")
                        outputs[i] = run_cov_nmse(c, seed, paths);
                    else if (c.experiment == "aps-figure")
                        outputs[i] = run_aps_figure(c, seed, paths);
                    else if (c.experiment == "aps-nmse-sweep")
                        outputs[i] = run_aps_nmse(c, seed, paths);
                    else
                        outputs[i] = run_sumrate(c, seed, paths);
                }
                catch (...)
                {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure)
                        failure = std::current_exception();
                }
            }
        };
        const int nthreads = std::max(1, std::min<int>(c.threads, int(tasks.size())));
        std::vector<std::thread> pool;
        for (int t = 1; t < nthreads; ++t)
            pool.emplace_back(worker);
        worker();
        for (auto &t : pool)
            t.join();
        if (failure)
            std::rethrow_exception(failure);

        std::map<std::string, std::string> files;
        for (const auto &[name, spec] : specs)
            files[name] = spec.header + "\n";
        for (const auto &o : outputs)
        {
            for (const auto &[name, row] : o.rows)
                files[name] += row;
            for (const auto &[name, blob] : o.blobs)
                files[name] = blob;
        }

        const fs::path dir(c.output_dir);
        std::vector<std::string> written;
        try
        {
            fs::create_directories(dir);
            for (const auto &[name, content] : files)
            {
                written.push_back(name);
                write_file(dir / name, content);
            }
            json listing = json::array();
            for (const auto &[name, content] : files)
            {
                json entry = {{"name", name}};
                if (auto it = specs.find(name); it != specs.end())
                {
                    entry["group_by"] = it->second.group_by;
                    entry["value"] = it->second.value;
                }
                listing.push_back(entry);
            }
            const json manifest = {{"library", "statcsi"}, {"version", statcsi::version}, {"config", resolved}, {"files", listing}};
            written.push_back("manifest.json");
            write_file(dir / "manifest.json", manifest.dump(2) + "\n");
        }
        catch (...)
        {
            std::error_code ec;
            for (const auto &name : written)
                fs::remove(dir / name, ec);
            throw;
        }
        log << "wrote " << written.size() << " files to " << dir.string() << "\n";
        return written;
    }

    int run(const std::string &config_path, const RunOverrides &overrides, std::ostream &out, std::ostream &err)
    {
        json resolved;
        try
        {
            std::ifstream in(config_path);
            if (!in)
                throw ConfigError("<config>", "cannot open '" + config_path + "'");
            json user;
            try
            {
                user = json::parse(in);
            }
            catch (const json::parse_error &e)
            {
                throw ConfigError("<config>", std::string("malformed JSON: ") + e.what());
            }
            resolved = resolve_config(user, overrides);
        }
        catch (const ConfigError &e)
        {
            err << "config error: " << e.what() << "\n";
            return exit_config;
        }

        const fs::path dir(resolved["output_dir"].get<std::string>());
        std::error_code ec;
        const bool existed = fs::exists(dir, ec);
        auto cleanup_dir = [&] {
            std::error_code e2;
            if (!existed && fs::is_empty(dir, e2))
                fs::remove(dir, e2);
        };
        try
        {
            execute(resolved, out);
            return exit_ok;
        }
        catch (const ConfigError &e)
        {
            cleanup_dir();
            err << "config error: " << e.what() << "\n";
            return exit_config;
        }
        catch (const InvalidArgument &e)
        {
            cleanup_dir();
            err << "config error: " << e.what() << "\n";
            return exit_config;
        }
        catch (const std::exception &e)
        {
            cleanup_dir();
            err << "numerical failure: " << e.what() << "\n";
            return exit_numerical;
        }
    }

    namespace
    {
        std::vector<std::string> split(const std::string &line)
        {
            std::vector<std::string> out;
            std::stringstream ss(line);
            std::string cell;
            while (std::getline(ss, cell, ','))
                out.push_back(cell);
            if (!line.empty() && line.back() == ',')
                out.emplace_back();
            return out;
        }

        std::string fmt(double x)
        {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.6g", x);
            return buf;
        }
    }

    int summarize(const std::string &result_dir, std::ostream &out, std::ostream &err)
    {
        const fs::path dir(result_dir);
        json manifest;
        try
        {
            if (!fs::exists(dir / "manifest.json"))
            {
                err << "error: missing manifest in '" << result_dir << "'\n";
                return exit_config;
            }
            manifest = json::parse(read_file(dir / "manifest.json"));
            if (!manifest.contains("files") || !manifest["files"].is_array())
                throw InvalidArgument("manifest.json: missing file listing");
        }
        catch (const std::exception &e)
        {
            err << "error: corrupted manifest '" << (dir / "manifest.json").string() << "': " << e.what() << "\n";
            return exit_config;
        }

        out << "experiment: " << manifest["config"].value("experiment", "?") << "  (statcsi "
            << manifest.value("version", "?") << ")\n";
        for (const auto &entry : manifest["files"])
        {
            if (!entry.contains("group_by"))
                continue;
            const std::string name = entry["name"].get<std::string>();
            const auto group_by = entry["group_by"].get<std::vector<std::string>>();
            const std::string value = entry["value"].get<std::string>();
            try
            {
                std::stringstream ss(read_file(dir / name));
                std::string line;
                if (!std::getline(ss, line))
                    throw InvalidArgument("empty file");
                const auto header = split(line);
                auto col = [&](const std::string &k) {
                    const auto it = std::find(header.begin(), header.end(), k);
                    if (it == header.end())
                        throw InvalidArgument("missing column '" + k + "'");
                    return std::size_t(it - header.begin());
                };
                std::vector<std::size_t> gcols;
                for (const auto &g : group_by)
                    gcols.push_back(col(g));
                const std::size_t vcol = col(value);
                std::vector<std::string> order;
                std::map<std::string, std::vector<double>> groups;
                int line_no = 1;
                while (std::getline(ss, line))
                {
                    ++line_no;
                    if (line.empty())
                        continue;
                    const auto cells = split(line);
                    if (cells.size() != header.size())
                        throw InvalidArgument("line " + std::to_string(line_no) + ": expected " +
                                              std::to_string(header.size()) + " columns");
                    std::string key;
                    for (std::size_t i = 0; i < gcols.size(); ++i)
                        key += (i ? "  " : "") + group_by[i] + "=" + cells[gcols[i]];
                    double v = 0.0;
                    const std::string &cell = cells[vcol];
                    const auto r = std::from_chars(cell.data(), cell.data() + cell.size(), v);
                    if (cell.empty() || r.ec != std::errc() || r.ptr != cell.data() + cell.size())
                        throw InvalidArgument("line " + std::to_string(line_no) + ": malformed value '" + cell + "'");
                    if (!groups.count(key))
                        order.push_back(key);
                    groups[key].push_back(v);
                }
                out << "\n== " << name << " (" << value << ", mean +- std over seeds)\n";
                for (const auto &key : order)
                {
                    const auto &vals = groups[key];
                    double mean = 0.0;
                    for (double v : vals)
                        mean += v;
                    mean /= double(vals.size());
                    double var = 0.0;
                    for (double v : vals)
                        var += (v - mean) * (v - mean);
                    const double sd = vals.size() > 1 ? std::sqrt(var / double(vals.size() - 1)) : 0.0;
                    out << key << "  " << fmt(mean) << " +- " << fmt(sd) << "  (n=" << vals.size() << ")\n";
                }
            }
            catch (const std::exception &e)
            {
                err << "error: corrupted CSV '" << (dir / name).string() << "': " << e.what() << "\n";
                return exit_config;
            }
        }
        return exit_ok;
    }
}
