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

#include "statcsi/io.hpp"
#include "statcsi/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace statcsi
{
    std::string format_double(double x)
    {
        if (x == 0.0)
            return "0";
        char buf[64];
        const auto res = std::to_chars(buf, buf + sizeof(buf), x);
        return std::string(buf, res.ptr);
    }

    std::vector<std::vector<double>> read_numeric_csv(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw InvalidArgument("cannot open '" + path + "'");
        std::vector<std::vector<double>> rows;
        std::string line;
        int line_no = 0;
        while (std::getline(in, line))
        {
            ++line_no;
            if (!line.empty() && line.back() == '\r')
                line.pop_back();
            if (line.empty())
                continue;
            std::vector<double> row;
            std::stringstream ss(line);
            std::string cell;
            while (std::getline(ss, cell, ','))
            {
                double v = 0.0;
                const char *b = cell.data(), *e = cell.data() + cell.size();
                const auto r = std::from_chars(b, e, v);
                if (r.ec != std::errc() || r.ptr != e)
                    throw InvalidArgument("'" + path + "' line " + std::to_string(line_no) + ": malformed number '" +
                                          cell + "'");
                row.push_back(v);
            }
            if (!rows.empty() && row.size() != rows.front().size())
                throw InvalidArgument("'" + path + "' line " + std::to_string(line_no) + ": ragged row");
            rows.push_back(std::move(row));
        }
        return rows;
    }

    namespace
    {
        void write_matrix(const std::string &path, const RMat &m)
        {
            std::ofstream out(path, std::ios::binary | std::ios::trunc);
            if (!out)
                throw InvalidArgument("cannot write '" + path + "'");
            for (Eigen::Index i = 0; i < m.rows(); ++i)
            {
                for (Eigen::Index j = 0; j < m.cols(); ++j)
                {
                    if (j)
                        out << ',';
                    out << format_double(m(i, j));
                }
                out << '\n';
            }
            if (!out)
                throw InvalidArgument("write failed for '" + path + "'");
        }

        RMat read_square(const std::string &path)
        {
            const auto rows = read_numeric_csv(path);
            const std::size_t n = rows.size();
            if (n == 0 || rows.front().size() != n)
                throw InvalidArgument("'" + path + "': expected a square table");
            RMat m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    m(Eigen::Index(i), Eigen::Index(j)) = rows[i][j];
            return m;
        }
    }

    void write_aps_csv(const std::string &path, const ApsGrid &aps)
    {
        write_matrix(path, aps.values);
    }

    ApsGrid read_aps_csv(const std::string &path)
    {
        ApsGrid aps;
        aps.values = read_square(path);
        aps.b = int(aps.values.rows());
        aps.validate();
        return aps;
    }

    void write_lattice_csv(const std::string &real_path, const std::string &imag_path, const CorrelationLattice &lat)
    {
        write_matrix(real_path, lat.values.real());
        write_matrix(imag_path, lat.values.imag());
    }

    CorrelationLattice read_lattice_csv(const std::string &real_path, const std::string &imag_path, double ratio)
    {
        const RMat re = read_square(real_path);
        const RMat im = read_square(imag_path);
        if (re.rows() != im.rows() || re.rows() % 2 == 0)
            throw InvalidArgument("lattice CSV files must be matching odd-sized square tables");
        CorrelationLattice lat(int(re.rows() + 1) / 2, ratio);
        for (Eigen::Index i = 0; i < re.rows(); ++i)
            for (Eigen::Index j = 0; j < re.cols(); ++j)
                lat.values(i, j) = cdouble(re(i, j), im(i, j));
        return lat;
    }
}
