// SPDX-License-Identifier: Apache-2.0
//
// cfmimo: unknown-interference modeling and outage-constrained rate
// adaptation for the uplink of cell-free massive MIMO networks.
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

#ifndef CFMIMO_IGSUM_TANH_SINH_HPP
#define CFMIMO_IGSUM_TANH_SINH_HPP

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace cfmimo::igsum {

template <typename T> struct QuadratureResult {
    T value{};
    double error = 0.0; ///< difference between the last two refinement levels
    double l1 = 0.0;    ///< quadrature estimate of the integral of |f|
    int levels = 0;
    bool converged = false;
};

namespace detail {

// Abscissae of the tanh-sinh rule on [-1, 1], grouped by refinement level.
// Each node stores its signed offset from the nearer endpoint (so that nodes
// crowding an endpoint keep full relative precision) and its weight.
struct TanhSinhNode {
    double offset; // 1 - |x|, carrying the sign of x
    double weight;
};

struct TanhSinhTable {
    static constexpr double t_max = 3.2; // weights fall below 1e-12 beyond this
    static constexpr double h0 = 0.5;
    static constexpr int max_level = 10;
    std::vector<std::vector<TanhSinhNode>> levels;

    TanhSinhTable()
    {
        constexpr double half_pi = std::numbers::pi / 2.0;
        auto make = [&](double t) {
            const double s = half_pi * std::sinh(t);
            const double ch = std::cosh(s);
            const double off = std::exp(-std::abs(s)) / ch;
            return TanhSinhNode{s >= 0.0 ? off : -off, half_pi * std::cosh(t) / (ch * ch)};
        };
        levels.resize(max_level + 1);
        levels[0].push_back(make(0.0));
        for (int k = 1; k * h0 <= t_max; ++k) {
            levels[0].push_back(make(k * h0));
            levels[0].push_back(make(-k * h0));
        }
        double h = h0;
        for (int level = 1; level <= max_level; ++level) {
            h *= 0.5;
            for (int k = 1; k * h <= t_max; k += 2) {
                levels[level].push_back(make(k * h));
                levels[level].push_back(make(-k * h));
            }
        }
    }

    static const TanhSinhTable &get()
    {
        static const TanhSinhTable table;
        return table;
    }
};

} // namespace detail

/// Tanh-sinh (double-exponential) quadrature of f over [a, b] (b < a allowed).
///
/// The step is halved until two successive levels differ by less than
/// sqrt(rel_tol) relative to |I| (or 1e-15 of the L1 norm when the integral
/// itself cancels). Double-exponential rules converge quadratically in the
/// number of levels, so the accepted value is accurate to about rel_tol.
/// Endpoint singularities are tolerated as long as f stays finite at the
/// abscissae actually sampled.
template <typename F>
auto tanh_sinh(F &&f, double a, double b, double rel_tol = 1e-12, int max_level = 10)
    -> QuadratureResult<decltype(f(a))>
{
    using T = decltype(f(a));
    const auto &table = detail::TanhSinhTable::get();
    const double step_tol = std::sqrt(rel_tol);
    const double c = 0.5 * (b - a);
    if (max_level > detail::TanhSinhTable::max_level)
        max_level = detail::TanhSinhTable::max_level;

    T sum{};
    double sum_abs = 0.0;
    auto add_level = [&](int level) {
        for (const auto &n : table.levels[level]) {
            const double x = n.offset >= 0.0 ? b - c * n.offset : a - c * n.offset;
            const T fx = f(x);
            sum += fx * n.weight;
            sum_abs += std::abs(fx) * n.weight;
        }
    };

    QuadratureResult<T> r;
    double h = detail::TanhSinhTable::h0;
    add_level(0);
    T prev = sum * (h * c);
    r.value = prev;
    r.l1 = sum_abs * h * std::abs(c);
    for (int level = 1; level <= max_level; ++level) {
        h *= 0.5;
        add_level(level);
        const T cur = sum * (h * c);
        r.value = cur;
        r.l1 = sum_abs * h * std::abs(c);
        r.levels = level;
        r.error = std::abs(cur - prev);
        if (level >= 2 && (r.error <= step_tol * std::abs(cur) || r.error <= 1e-15 * r.l1)) {
            r.converged = true;
            break;
        }
        prev = cur;
    }
    return r;
}

} // namespace cfmimo::igsum

#endif
