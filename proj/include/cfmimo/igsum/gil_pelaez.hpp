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

#ifndef CFMIMO_IGSUM_GIL_PELAEZ_HPP
#define CFMIMO_IGSUM_GIL_PELAEZ_HPP

#include "cfmimo/core/error.hpp"
#include "cfmimo/core/parallel.hpp"
#include "cfmimo/igsum/fft.hpp"
#include "cfmimo/igsum/inverse_gamma.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <sstream>
#include <vector>

namespace cfmimo::igsum {

/// Midpoint-Riemann discretization of the inversion integral over (0, t_max].
struct QuadratureSpec {
    std::size_t n_points = std::size_t{1} << 16;
    double t_max = 0.0;        ///< 0 selects t_max adaptively
    double decay_tol = 1e-10;  ///< adaptive rule: |phi(t_max)| / (t_max m) < decay_tol, m = mixture mean
    unsigned threads = 1;      ///< workers used to tabulate phi on the grid

    void validate() const
    {
        if (n_points < (std::size_t{1} << 10))
            throw ConfigError("QuadratureSpec: n_points must be at least 1024");
        if (t_max < 0.0 || !std::isfinite(t_max))
            throw ConfigError("QuadratureSpec: t_max must be finite and >= 0 (0 = adaptive)");
        if (!(decay_tol > 0.0))
            throw ConfigError("QuadratureSpec: decay_tol must be positive");
    }
};

struct CdfResult {
    std::vector<double> values;
    double max_adjustment = 0.0; ///< largest change made by clamping / isotonic clipping
};

struct GridDiagnostics {
    double t_max = 0.0;
    double step = 0.0;
    double decay_at_t_max = 0.0;   ///< |phi(t_max)| / (t_max m), m = mixture mean
    std::size_t decay_violations = 0; ///< nodes where |phi| increased along t
    double tail_at_alias_limit = 0.0; ///< 1 - F(pi / step)
};

/// Gil-Pelaez inversion of a mixture's characteristic function,
///
///   F(x) = 1/2 - (1/pi) int_0^inf Im(exp(-jtx) phi(t)) / t dt,
///
/// discretized by the midpoint rule at t_j = (j + 1/2) dt, j < n_points. phi is
/// tabulated once at construction; every CDF evaluation is then an O(n) sum.
/// The discrete sum is anti-periodic in x with period 2 pi / dt, so results are
/// meaningful for x < pi / dt; beyond that point the CDF is reported as 1 (the
/// tail mass left there is exposed in diagnostics()).
class CharacteristicGrid {
public:
    CharacteristicGrid(const IgMixture &mixture, const QuadratureSpec &spec = {})
        : mixture_(mixture)
    {
        mixture.validate();
        spec.validate();
        const std::size_t n = spec.n_points;
        const double t_max = spec.t_max > 0.0 ? spec.t_max : find_t_max(mixture, spec.decay_tol);
        diag_.t_max = t_max;
        diag_.step = t_max / static_cast<double>(n);
        diag_.decay_at_t_max = std::abs(mixture_char(mixture, t_max)) / (t_max * mixture.mean());

        coeff_.resize(n);
        std::vector<double> mag(n);
        const double dt = diag_.step;
        const std::size_t chunk = 4096;
        parallel_for((n + chunk - 1) / chunk, spec.threads, [&](std::size_t c) {
            const std::size_t hi = std::min(n, (c + 1) * chunk);
            for (std::size_t j = c * chunk; j < hi; ++j) {
                const double t = (static_cast<double>(j) + 0.5) * dt;
                const cplx phi = mixture_char(mixture, t);
                mag[j] = std::abs(phi);
                coeff_[j] = phi * (dt / (pi * t));
            }
        });
        for (std::size_t j = 1; j < n; ++j) {
            if (mag[j] > mag[j - 1] * (1.0 + 1e-12) + 1e-300)
                ++diag_.decay_violations;
        }
        diag_.tail_at_alias_limit = 1.0 - raw_cdf(alias_limit() * (1.0 - 1e-9));
    }

    const IgMixture &mixture() const { return mixture_; }
    const GridDiagnostics &diagnostics() const { return diag_; }
    double alias_limit() const { return pi / diag_.step; }

    /// Unclamped midpoint sum.
    double raw_cdf(double x) const
    {
        // exp(-j t_j x) by rotation, reseeded periodically to bound drift.
        const double dt = diag_.step;
        const cplx rot = std::polar(1.0, -dt * x);
        double acc = 0.0;
        const std::size_t n = coeff_.size();
        constexpr std::size_t reseed = 256;
        for (std::size_t start = 0; start < n; start += reseed) {
            cplx e = std::polar(1.0, -(static_cast<double>(start) + 0.5) * dt * x);
            const std::size_t stop = std::min(n, start + reseed);
            double part = 0.0;
            for (std::size_t j = start; j < stop; ++j) {
                part += (e * coeff_[j]).imag();
                e *= rot;
            }
            acc += part;
        }
        return 0.5 - acc;
    }

    /// F(x) clamped to [0, 1]; F = 0 for x <= 0 (positive support).
    double cdf(double x) const
    {
        if (x <= 0.0)
            return 0.0;
        if (x >= alias_limit())
            return 1.0;
        return std::clamp(raw_cdf(x), 0.0, 1.0);
    }

    /// CDF on an ascending, strictly positive grid, clamped and made non-decreasing.
    CdfResult cdf(std::span<const double> x_grid) const
    {
        check_grid(x_grid);
        std::vector<double> raw(x_grid.size());
        for (std::size_t i = 0; i < x_grid.size(); ++i)
            raw[i] = x_grid[i] >= alias_limit() ? 1.0 : raw_cdf(x_grid[i]);
        return isotonic(raw);
    }

    /// Same as cdf() on the uniform grid x_m = x0 + m dx, evaluated with one
    /// chirp-z transform instead of count separate sums.
    CdfResult cdf_uniform(double x0, double dx, std::size_t count) const
    {
        if (!(x0 > 0.0) || !(dx > 0.0))
            throw ConfigError("cdf_uniform: need x0 > 0 and dx > 0");
        const double dt = diag_.step;
        std::vector<cplx> a(coeff_.size());
        for (std::size_t j = 0; j < a.size(); ++j)
            a[j] = coeff_[j] * std::polar(1.0, -(static_cast<double>(j) + 0.5) * dt * x0);
        const std::vector<cplx> s = chirp_z(a, dt * dx, count);
        std::vector<double> raw(count);
        for (std::size_t m = 0; m < count; ++m) {
            const double x = x0 + static_cast<double>(m) * dx;
            const cplx full = s[m] * std::polar(1.0, -0.5 * dt * dx * static_cast<double>(m));
            raw[m] = x >= alias_limit() ? 1.0 : 0.5 - full.imag();
        }
        return isotonic(raw);
    }

    /// Inverse CDF by bisection. The bracket starts at [1e-6 m, m] with m the
    /// mixture mean, and the upper end doubles until F(hi) > p. Stops at a
    /// relative bracket width of 1e-6.
    double quantile(double p) const
    {
        if (!(p > 0.0 && p < 1.0))
            throw ConfigError("cdf_inverse: p must lie in (0, 1)");
        const double m = mixture_.mean();
        double lo = 1e-6 * m;
        double hi = m;
        int doublings = 0;
        while (cdf(hi) <= p) {
            hi *= 2.0;
            if (++doublings > 200 || hi >= alias_limit()) {
                std::ostringstream msg;
                msg << "cdf_inverse: failed to bracket p=" << p << " (F(" << hi << ") = " << cdf(hi) << ")";
                throw NumericalError(msg.str());
            }
        }
        if (cdf(lo) > p) {
            std::ostringstream msg;
            msg << "cdf_inverse: lower bracket F(" << lo << ") = " << cdf(lo) << " already exceeds p=" << p;
            throw NumericalError(msg.str());
        }
        while (hi - lo > 1e-6 * hi) {
            const double mid = 0.5 * (lo + hi);
            if (cdf(mid) > p)
                hi = mid;
            else
                lo = mid;
        }
        return 0.5 * (lo + hi);
    }

private:
    // Frequencies are measured in units of 1/mean so the rule does not depend
    // on the unit of power.
    static double find_t_max(const IgMixture &mixture, double tol)
    {
        const double unit = 1.0 / mixture.mean();
        double t = unit;
        for (int i = 0; i < 200; ++i) {
            const double decay = std::abs(mixture_char(mixture, t)) / (t / unit);
            if (decay < tol)
                return t;
            t *= 2.0;
        }
        std::ostringstream msg;
        msg << "gil_pelaez: characteristic function has not decayed below " << tol << " by t=" << t
            << " (|phi(t)| = " << std::abs(mixture_char(mixture, t)) << ")";
        throw NumericalError(msg.str());
    }

    static void check_grid(std::span<const double> x)
    {
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (!(x[i] > 0.0) || (i > 0 && !(x[i] > x[i - 1])))
                throw ConfigError("gil_pelaez_cdf: x grid must be strictly positive and strictly ascending");
        }
    }

    static CdfResult isotonic(const std::vector<double> &raw)
    {
        CdfResult r;
        r.values.resize(raw.size());
        double running = 0.0;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            const double v = std::max(running, std::clamp(raw[i], 0.0, 1.0));
            r.max_adjustment = std::max(r.max_adjustment, std::abs(v - raw[i]));
            r.values[i] = v;
            running = v;
        }
        return r;
    }

    IgMixture mixture_;
    GridDiagnostics diag_;
    std::vector<cplx> coeff_; ///< phi(t_j) dt / (pi t_j)
};

inline CdfResult gil_pelaez_cdf(const IgMixture &mixture, std::span<const double> x_grid, const QuadratureSpec &quad = {})
{
    return CharacteristicGrid(mixture, quad).cdf(x_grid);
}

inline double cdf_inverse(const IgMixture &mixture, double p, const QuadratureSpec &quad = {})
{
    return CharacteristicGrid(mixture, quad).quantile(p);
}

} // namespace cfmimo::igsum

#endif
