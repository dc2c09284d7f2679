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

#ifndef CFMIMO_CORE_STATS_HPP
#define CFMIMO_CORE_STATS_HPP

#include "cfmimo/core/error.hpp"
#include "cfmimo/core/summation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace cfmimo {

struct SampleMoments {
    double mean = 0.0;
    double variance = 0.0; // unbiased
    std::size_t count = 0;
};

inline SampleMoments sample_moments(std::span<const double> x)
{
    SampleMoments m;
    m.count = x.size();
    if (x.empty())
        return m;
    m.mean = pairwise_sum(x) / static_cast<double>(x.size());
    if (x.size() < 2)
        return m;
    std::vector<double> sq(x.size());
    std::transform(x.begin(), x.end(), sq.begin(), [&](double v) { return (v - m.mean) * (v - m.mean); });
    m.variance = pairwise_sum(sq) / static_cast<double>(x.size() - 1);
    return m;
}

struct ProportionEstimate {
    double value = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::size_t hits = 0;
    std::size_t trials = 0;
};

/// Wilson score interval; z = 1.96 gives the 95% interval.
inline ProportionEstimate wilson_interval(std::size_t hits, std::size_t trials, double z = 1.959963984540054)
{
    ProportionEstimate e;
    e.hits = hits;
    e.trials = trials;
    if (trials == 0)
        return e;
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(hits) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double centre = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    e.value = p;
    e.ci_lo = hits == 0 ? 0.0 : std::max(0.0, centre - half);
    e.ci_hi = hits == trials ? 1.0 : std::min(1.0, centre + half);
    return e;
}

/// One-sample Kolmogorov-Smirnov distance between the empirical CDF of
/// `samples` and a continuous CDF evaluated on the sorted samples.
/// `cdf_at_sorted[i]` must equal F(sorted_samples[i]).
inline double ks_distance_sorted(std::span<const double> cdf_at_sorted)
{
    const double n = static_cast<double>(cdf_at_sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < cdf_at_sorted.size(); ++i) {
        const double f = cdf_at_sorted[i];
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    }
    return d;
}

template <typename Cdf> double ks_distance(std::vector<double> samples, Cdf &&cdf)
{
    std::sort(samples.begin(), samples.end());
    std::vector<double> f(samples.size());
    std::transform(samples.begin(), samples.end(), f.begin(), cdf);
    return ks_distance_sorted(f);
}

/// Empirical CDF of sorted data evaluated at x (fraction of samples <= x).
inline double empirical_cdf(std::span<const double> sorted, double x)
{
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), x);
    return sorted.empty() ? 0.0 : static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
}

} // namespace cfmimo

#endif
