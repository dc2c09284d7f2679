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

#ifndef CFMIMO_IGSUM_BESSEL_HPP
#define CFMIMO_IGSUM_BESSEL_HPP

#include "cfmimo/core/error.hpp"
#include "cfmimo/core/types.hpp"
#include "cfmimo/igsum/tanh_sinh.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cfmimo::igsum {

/// exp(log_scale) * mantissa; keeps K_nu(z) representable when it over- or
/// underflows a double.
struct ScaledComplex {
    double log_scale = 0.0;
    cplx mantissa{};

    cplx value() const { return std::exp(log_scale) * mantissa; }
    /// Principal logarithm of the represented value.
    cplx log() const { return log_scale + std::log(mantissa); }
};

/// Modified Bessel function of the second kind K_nu(z) for real nu >= 0 and
/// Re(z) > 0, in scaled form.
///
/// Evaluates K_nu(z) = int_0^inf exp(-z cosh u) cosh(nu u) du by tanh-sinh
/// quadrature. The path is deformed to run vertically from 0 to i*eta and then
/// horizontally along Im u = eta, with eta = Im asinh(nu / z), the height of
/// the saddle of -z cosh u + nu u. On that path the integrand is essentially
/// non-oscillatory around its peak, so the magnitude of the result matches the
/// L1 norm of the integrand and no precision is lost to cancellation, even
/// when |K| is astronomically large (small |z|, large nu). The horizontal leg
/// is cut where the integrand drops 50 e-folds below its peak.
inline ScaledComplex bessel_k_scaled(double nu, cplx z, double rel_tol = 1e-12)
{
    if (!(nu >= 0.0) || !std::isfinite(nu))
        throw std::domain_error("bessel_k: order must be finite and >= 0");
    if (!(z.real() > 0.0) || !std::isfinite(z.imag()) || !std::isfinite(z.real()))
        throw std::domain_error("bessel_k: argument must satisfy Re(z) > 0");

    const double psi = std::arg(z);
    const cplx saddle = nu > 0.0 ? std::asinh(nu / z) : cplx{0.0, 0.0};
    const double eta = std::clamp(saddle.imag(), std::min(0.0, -psi), std::max(0.0, -psi));
    const double w_peak = std::max(0.0, saddle.real());

    // Along Im u = eta: cosh(w + i eta) = cosh w cos eta + i sinh w sin eta.
    const double ce = std::cos(eta);
    const double se = std::sin(eta);
    auto horizontal_exponent = [&](double w) {
        const double ew = std::exp(w);
        const double ch = 0.5 * (ew + 1.0 / ew);
        const double sh = 0.5 * (ew - 1.0 / ew);
        return -z * cplx{ch * ce, sh * se} + cplx{nu * w, nu * eta};
    };

    double scale = std::max(horizontal_exponent(0.0).real(), horizontal_exponent(w_peak).real());
    double w_end = w_peak + 1.0;
    while (horizontal_exponent(w_end).real() > scale - 50.0) {
        w_end = w_peak + 2.0 * (w_end - w_peak);
        if (w_end > 800.0)
            throw NumericalError("bessel_k: integrand does not decay");
    }

    // cosh(nu u) = exp(nu u) (1 + exp(-2 nu u)) / 2 keeps large orders finite.
    const cplx back_phase = std::polar(1.0, -2.0 * nu * eta);
    auto horizontal = [&](double w) {
        const cplx e = horizontal_exponent(w) - scale;
        return std::polar(std::exp(e.real()), e.imag()) * (1.0 + std::exp(-2.0 * nu * w) * back_phase) * 0.5;
    };
    auto vertical = [&](double y) {
        // u = i y: exp(-z cos y) cos(nu y)
        const cplx e = -z * std::cos(y) - scale;
        return std::polar(std::exp(e.real()), e.imag()) * std::cos(nu * y);
    };

    cplx total{};
    double err = 0.0;
    bool ok = true;
    auto accumulate = [&](const QuadratureResult<cplx> &r, cplx factor) {
        total += factor * r.value;
        err += r.error;
        ok = ok && r.converged;
    };

    if (eta != 0.0) {
        accumulate(tanh_sinh(vertical, 0.0, eta, rel_tol), cplx{0.0, 1.0});
    }
    if (w_peak > 2.0) { // split only when the peak sits well inside the leg
        accumulate(tanh_sinh(horizontal, 0.0, w_peak, rel_tol), 1.0);
        accumulate(tanh_sinh(horizontal, w_peak, w_end, rel_tol), 1.0);
    } else {
        accumulate(tanh_sinh(horizontal, 0.0, w_end, rel_tol), 1.0);
    }

    if (!ok && err > 1e-8 * std::abs(total)) {
        std::ostringstream msg;
        msg << "bessel_k: quadrature did not converge for nu=" << nu << ", z=" << z
            << " (relative error estimate " << err / std::abs(total) << ")";
        throw NumericalError(msg.str());
    }
    return {scale, total};
}

/// K_nu(z); overflows to inf / underflows to 0 outside double range.
inline cplx bessel_k_complex(double nu, cplx z) { return bessel_k_scaled(nu, z).value(); }

/// Principal log of K_nu(z).
inline cplx log_bessel_k(double nu, cplx z) { return bessel_k_scaled(nu, z).log(); }

} // namespace cfmimo::igsum

#endif
