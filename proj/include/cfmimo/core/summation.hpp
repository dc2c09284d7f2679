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

#ifndef CFMIMO_CORE_SUMMATION_HPP
#define CFMIMO_CORE_SUMMATION_HPP

#include "cfmimo/core/types.hpp"

#include <span>

namespace cfmimo {

/// Kahan-compensated running sum over scalars or fixed-shape Eigen objects.
template <typename T> class CompensatedSum {
public:
    CompensatedSum() = default;
    explicit CompensatedSum(T zero) : sum_(zero), comp_(zero) {}

    void add(const T &x)
    {
        T y = x - comp_;
        T t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = std::move(t);
    }

    void merge(const CompensatedSum &other)
    {
        add(other.sum_);
        add(-other.comp_);
    }

    const T &value() const { return sum_; }

private:
    T sum_{};
    T comp_{};
};

/// Pairwise summation; order-insensitive to within O(log n) ulps.
inline double pairwise_sum(std::span<const double> v)
{
    if (v.size() <= 16) {
        double s = 0.0;
        for (double x : v)
            s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

} // namespace cfmimo

#endif
