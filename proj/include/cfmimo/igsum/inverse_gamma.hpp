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

#ifndef CFMIMO_IGSUM_INVERSE_GAMMA_HPP
#define CFMIMO_IGSUM_INVERSE_GAMMA_HPP

#include "cfmimo/core/error.hpp"
#include "cfmimo/core/rng.hpp"
#include "cfmimo/core/types.hpp"
#include "cfmimo/igsum/bessel.hpp"

#include <cmath>
#include <random>
#include <span>
#include <sstream>
#include <vector>

namespace cfmimo::igsum {

/// One Inverse-Gamma term IG(alpha, beta) of the interference model, scaled
/// by `weight` (the squared magnitude of the AP's fusion weight).
///
/// `alpha_excess` holds alpha - 2. The moment fit produces it exactly
/// (mu^2 / v); recomputing it from `alpha` would lose all precision when the
/// data are heavy-tailed and alpha sits just above 2.
struct IgComponent {
    double alpha = 3.0;
    double beta = 1.0;
    double weight = 1.0;
    double alpha_excess = 1.0;

    static IgComponent from_shape_scale(double alpha, double beta, double weight = 1.0)
    {
        if (!(alpha > 2.0) || !(beta > 0.0) || !(weight >= 0.0))
            throw ConfigError("IgComponent: need alpha > 2, beta > 0, weight >= 0");
        return {alpha, beta, weight, alpha - 2.0};
    }

    double mean() const { return beta / (alpha_excess + 1.0); }
    double variance() const
    {
        const double am1 = alpha_excess + 1.0;
        return beta * beta / (am1 * am1 * alpha_excess);
    }
    double weighted_mean() const { return weight * mean(); }
};

/// Two-moment fit: alpha = mu^2/v + 2, beta = (mu^2/v + 1) mu. The fitted law
/// reproduces mean mu and variance v exactly.
inline IgComponent fit_inverse_gamma(double mu, double v)
{
    if (!(mu > 0.0) || !(v > 0.0) || !std::isfinite(mu) || !std::isfinite(v)) {
        std::ostringstream msg;
        msg << "fit_inverse_gamma: mean and variance must be positive (got mu=" << mu << ", v=" << v << ")";
        throw ConfigError(msg.str());
    }
    const double ratio = mu * mu / v;
    IgComponent c;
    c.alpha = ratio + 2.0;
    c.alpha_excess = ratio;
    c.beta = (ratio + 1.0) * mu;
    c.weight = 1.0;
    return c;
}

/// Characteristic function E[exp(jtX)] of X ~ IG(alpha, beta), ignoring the weight:
///
///   phi(t) = 2 (-j beta t)^(alpha/2) / Gamma(alpha) * K_alpha(2 (-j beta t)^(1/2))
///
/// on principal branches for t > 0, phi(0) = 1 and phi(-t) = conj(phi(t)).
/// Assembled in log space so that large alpha or tiny t do not overflow.
inline cplx ig_char(const IgComponent &c, double t)
{
    if (t == 0.0)
        return {1.0, 0.0};
    if (t < 0.0)
        return std::conj(ig_char(c, -t));
    const double bt = c.beta * t;
    // (-j bt)^(1/2) = sqrt(bt) e^{-j pi/4}
    const cplx z = std::polar(2.0 * std::sqrt(bt), -pi / 4.0);
    const ScaledComplex k = bessel_k_scaled(c.alpha, z);
    const double log_mag = std::log(2.0) + 0.5 * c.alpha * std::log(bt) - std::lgamma(c.alpha) + k.log_scale;
    const double phase = -pi * c.alpha / 4.0;
    return std::exp(log_mag) * std::polar(1.0, phase) * k.mantissa;
}

/// Weighted sum of independent Inverse-Gamma terms.
struct IgMixture {
    std::vector<IgComponent> components;

    void validate() const
    {
        bool any = false;
        for (const auto &c : components) {
            if (!(c.alpha > 2.0) || !(c.beta > 0.0) || !(c.weight >= 0.0))
                throw ConfigError("IgMixture: component out of range (need alpha > 2, beta > 0, weight >= 0)");
            any = any || c.weight > 0.0;
        }
        if (!any)
            throw ConfigError("IgMixture: at least one component needs a positive weight");
    }

    double mean() const
    {
        double m = 0.0;
        for (const auto &c : components)
            m += c.weighted_mean();
        return m;
    }

    double variance() const
    {
        double v = 0.0;
        for (const auto &c : components)
            v += c.weight * c.weight * c.variance();
        return v;
    }
};

/// phi(t) = prod_l phi_l(w_l t); zero-weight terms contribute a factor 1.
inline cplx mixture_char(const IgMixture &m, double t)
{
    cplx phi{1.0, 0.0};
    for (const auto &c : m.components) {
        if (c.weight > 0.0)
            phi *= ig_char(c, c.weight * t);
    }
    return phi;
}

/// X = beta / G with G ~ Gamma(alpha, 1).
inline double sample_ig(const IgComponent &c, Rng &rng)
{
    std::gamma_distribution<double> g(c.alpha, 1.0);
    return c.beta / g(rng);
}

inline double sample_ig_weighted(const IgComponent &c, Rng &rng) { return c.weight * sample_ig(c, rng); }

inline double sample_mixture(const IgMixture &m, Rng &rng)
{
    double s = 0.0;
    for (const auto &c : m.components) {
        if (c.weight > 0.0)
            s += sample_ig_weighted(c, rng);
    }
    return s;
}

} // namespace cfmimo::igsum

#endif
