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

#ifndef CFMIMO_IGSUM_FFT_HPP
#define CFMIMO_IGSUM_FFT_HPP

#include "cfmimo/core/types.hpp"

#include <bit>
#include <cmath>
#include <span>
#include <vector>

namespace cfmimo::igsum {

/// In-place iterative radix-2 FFT; size must be a power of two.
/// inverse=true computes the unnormalized inverse transform.
inline void fft_inplace(std::vector<cplx> &a, bool inverse)
{
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1)
            j ^= bit;
        j ^= bit;
        if (i < j)
            std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        const std::size_t half = len / 2;
        std::vector<cplx> tw(half);
        for (std::size_t k = 0; k < half; ++k)
            tw[k] = std::polar(1.0, ang * static_cast<double>(k));
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < half; ++k) {
                const cplx u = a[i + k];
                const cplx v = a[i + k + half] * tw[k];
                a[i + k] = u + v;
                a[i + k + half] = u - v;
            }
        }
    }
}

/// Chirp-z transform X_m = sum_j a_j exp(-i theta j m), m = 0..count-1,
/// via Bluestein's convolution identity jm = (j^2 + m^2 - (m-j)^2) / 2.
inline std::vector<cplx> chirp_z(std::span<const cplx> a, double theta, std::size_t count)
{
    const std::size_t n = a.size();
    if (n == 0 || count == 0)
        return std::vector<cplx>(count);
    const std::size_t size = std::bit_ceil(n + count - 1);
    auto chirp = [&](std::size_t k) {
        const double kk = static_cast<double>(k);
        return std::polar(1.0, std::fmod(0.5 * theta * kk * kk, 2.0 * pi));
    };
    std::vector<cplx> u(size), v(size);
    for (std::size_t j = 0; j < n; ++j)
        u[j] = a[j] * std::conj(chirp(j));
    for (std::size_t k = 0; k < count; ++k)
        v[k] = chirp(k);
    for (std::size_t k = 1; k < n; ++k)
        v[size - k] = chirp(k);
    fft_inplace(u, false);
    fft_inplace(v, false);
    for (std::size_t i = 0; i < size; ++i)
        u[i] *= v[i];
    fft_inplace(u, true);
    std::vector<cplx> out(count);
    const double inv = 1.0 / static_cast<double>(size);
    for (std::size_t m = 0; m < count; ++m)
        out[m] = std::conj(chirp(m)) * u[m] * inv;
    return out;
}

} // namespace cfmimo::igsum

#endif
