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

#ifndef CFMIMO_CORE_RNG_HPP
#define CFMIMO_CORE_RNG_HPP

#include "cfmimo/core/types.hpp"

#include <boost/random/normal_distribution.hpp>

#include <cstdint>
#include <random>

namespace cfmimo {

using Rng = std::mt19937_64;

/// Named substreams. Every random quantity of a run is drawn from a generator
/// keyed by (seed, stream, index), so results do not depend on thread count or
/// evaluation order.
enum class Stream : std::uint64_t {
    geometry = 1,
    known_shadowing = 2,
    stats_blocks = 3,
    fit_drops = 10,
    validation_drops = 11,
    diagnostic_drops = 12,
    oracle = 20,
};

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline Rng make_rng(std::uint64_t seed, Stream stream, std::uint64_t index = 0)
{
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ static_cast<std::uint64_t>(stream));
    h = splitmix64(h ^ index);
    return Rng(h);
}

/// Standard normal sampler (ziggurat).
class NormalSampler {
public:
    double operator()(Rng &rng) { return dist_(rng); }

    /// CN(0, 1): real and imaginary parts each with variance 1/2.
    cplx complex(Rng &rng)
    {
        const double re = dist_(rng);
        const double im = dist_(rng);
        return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
    }

    void fill_complex(Rng &rng, Eigen::Ref<CVec> out)
    {
        for (Eigen::Index i = 0; i < out.size(); ++i)
            out[i] = complex(rng);
    }

private:
    boost::random::normal_distribution<double> dist_;
};

} // namespace cfmimo

#endif
