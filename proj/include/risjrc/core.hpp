// SPDX-License-Identifier: Apache-2.0
//
// risjrc: link-level simulation of RIS-assisted joint radar-communication
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

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace risjrc
{

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx j1{0.0, 1.0};

/// Raised on out-of-contract arguments (non-finite angles, bad sizes, ...).
class invalid_input : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when two operands that must agree in shape do not.
class dimension_mismatch : public std::logic_error
{
public:
    using std::logic_error::logic_error;
};

inline void require(bool cond, const std::string &msg)
{
    if (!cond)
        throw invalid_input(msg);
}

inline void require_dims(bool cond, const std::string &msg)
{
    if (!cond)
        throw dimension_mismatch(msg);
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

inline bool is_power_of_two(long n) { return n > 0 && (n & (n - 1)) == 0; }

inline int integer_sqrt(long n)
{
    long r = static_cast<long>(std::llround(std::sqrt(static_cast<double>(n))));
    while (r * r > n)
        --r;
    while ((r + 1) * (r + 1) <= n)
        ++r;
    return static_cast<int>(r);
}

inline bool is_perfect_square(long n)
{
    if (n < 0)
        return false;
    long r = integer_sqrt(n);
    return r * r == n;
}

inline int log2_exact(long n)
{
    int s = 0;
    while ((1L << s) < n)
        ++s;
    return s;
}

/// Largest deviation of |x_k| from one.
inline double max_modulus_error(const CVector &x)
{
    double e = 0.0;
    for (Eigen::Index k = 0; k < x.size(); ++k)
        e = std::max(e, std::abs(std::abs(x[k]) - 1.0));
    return e;
}

} // namespace risjrc
