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

#include "cfmimo/igsum/bessel.hpp"
#include "cfmimo/igsum/gil_pelaez.hpp"
#include "cfmimo/igsum/inverse_gamma.hpp"
#include "cfmimo/core/rng.hpp"
#include "cfmimo/core/stats.hpp"

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <gtest/gtest.h>

#include <fstream>
#include <random>

using namespace cfmimo;
using namespace cfmimo::igsum;

namespace {

double ig_cdf(double alpha, double beta, double x) { return boost::math::gamma_q(alpha, beta / x); }

// Mean of exp(j t X) over n draws and the standard error of its real and
// imaginary parts.
struct KernelMean {
    cplx mean;
    double se_re;
    double se_im;
};

template <typename Draw> KernelMean kernel_mean(double t, std::size_t n, Rng &rng, Draw &&draw)
{
    std::vector<double> re(n), im(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = draw(rng);
        re[i] = std::cos(t * x);
        im[i] = std::sin(t * x);
    }
    const auto mr = sample_moments(re);
    const auto mi = sample_moments(im);
    const double sn = std::sqrt(static_cast<double>(n));
    return {{mr.mean, mi.mean}, std::sqrt(mr.variance) / sn, std::sqrt(mi.variance) / sn};
}

} // namespace

TEST(BesselK, MatchesHighPrecisionReference)
{
    std::ifstream in(CFMIMO_TEST_DATA_DIR "/bessel_k_mpmath.txt");
    ASSERT_TRUE(in.good());
    double nu, zr, zi, lr, li;
    std::size_t n = 0;
    double worst = 0.0;
    while (in >> nu >> zr >> zi >> lr >> li) {
        const cplx d = log_bessel_k(nu, {zr, zi}) - cplx(lr, li);
        worst = std::max(worst, std::abs(std::exp(d) - 1.0));
        ++n;
    }
    EXPECT_EQ(n, 224u);
    EXPECT_LT(worst, 1e-10);
}

TEST(BesselK, HalfOrderClosedForm)
{
    for (double x : {0.5, 1.0, 5.0}) {
        const double ref = std::sqrt(pi / (2.0 * x)) * std::exp(-x);
        EXPECT_NEAR(bessel_k_complex(0.5, {x, 0.0}).real() / ref, 1.0, 1e-12);
    }
    for (cplx z : {cplx(0.3, 0.3), cplx(2.0, -1.9), cplx(0.01, 0.2)}) {
        const cplx ref = std::sqrt(pi / (2.0 * z)) * std::exp(-z);
        EXPECT_LT(std::abs(bessel_k_complex(0.5, z) / ref - 1.0), 1e-12);
    }
}

TEST(BesselK, ConjugateSymmetry)
{
    for (double nu : {0.0, 1.5, 3.0, 12.25})
        for (cplx z : {cplx(0.4, 0.9), cplx(3.0, -2.0), cplx(20.0, 19.0)}) {
            const cplx a = bessel_k_complex(nu, std::conj(z));
            const cplx b = std::conj(bessel_k_complex(nu, z));
            EXPECT_LT(std::abs(a - b), 1e-12 * std::abs(b));
        }
}

TEST(BesselK, RealArgumentAgreesWithBoost)
{
    EXPECT_NEAR(bessel_k_complex(3.0, {1.0, 0.0}).real(), 7.10126282473794450598, 7.1e-10);
    for (double nu : {0.0, 1.0, 2.75, 9.0})
        for (double x : {0.02, 0.7, 4.0, 30.0}) {
            const double ref = boost::math::cyl_bessel_k(nu, x);
            EXPECT_NEAR(bessel_k_complex(nu, {x, 0.0}).real() / ref, 1.0, 1e-11) << nu << ' ' << x;
        }
}

TEST(InverseGamma, MomentFitExamples)
{
    struct Case {
        double mu, v, alpha, beta;
    };
    for (const Case c : {Case{1, 1, 3, 2}, Case{2, 1, 6, 10}, Case{0.5, 0.25, 3, 1}}) {
        const IgComponent f = fit_inverse_gamma(c.mu, c.v);
        EXPECT_DOUBLE_EQ(f.alpha, c.alpha);
        EXPECT_DOUBLE_EQ(f.beta, c.beta);
        EXPECT_NEAR(f.mean(), c.mu, 1e-15 * c.mu);
        EXPECT_NEAR(f.variance(), c.v, 1e-15 * c.v);
    }
}

TEST(InverseGamma, MomentFitRoundTrip)
{
    Rng rng(7);
    std::uniform_real_distribution<double> e(-12.0, 6.0);
    std::uniform_real_distribution<double> r(-4.0, 4.0);
    for (int i = 0; i < 1000; ++i) {
        const double mu = std::pow(10.0, e(rng));
        const double v = mu * mu * std::pow(10.0, r(rng));
        const IgComponent c = fit_inverse_gamma(mu, v);
        EXPECT_NEAR(c.mean() / mu, 1.0, 1e-12);
        EXPECT_NEAR(c.variance() / v, 1.0, 1e-12);
    }
}

TEST(InverseGamma, FitRejectsNonPositiveMoments)
{
    EXPECT_THROW(fit_inverse_gamma(1.0, 0.0), ConfigError);
    EXPECT_THROW(fit_inverse_gamma(0.0, 1.0), ConfigError);
    EXPECT_THROW(fit_inverse_gamma(-1.0, 1.0), ConfigError);
    EXPECT_THROW(fit_inverse_gamma(1.0, std::numeric_limits<double>::infinity()), ConfigError);
}

TEST(InverseGamma, SamplerMomentsAndDistribution)
{
    const IgComponent c = IgComponent::from_shape_scale(6.0, 10.0);
    Rng rng(11);
    const std::size_t n = 1000000;
    std::vector<double> x(n);
    for (auto &xi : x)
        xi = sample_ig(c, rng);
    const auto m = sample_moments(x);
    const double sn = std::sqrt(static_cast<double>(n));
    EXPECT_NEAR(m.mean, c.mean(), 4.0 * std::sqrt(c.variance()) / sn);
    // Var of the sample variance: (mu4 - v^2) / n, with mu4 from the raw IG moments.
    const double a = c.alpha, b = c.beta;
    const double e1 = b / (a - 1), e2 = b * b / ((a - 1) * (a - 2)), e3 = e2 * b / (a - 3), e4 = e3 * b / (a - 4);
    const double mu4 = e4 - 4 * e3 * e1 + 6 * e2 * e1 * e1 - 3 * std::pow(e1, 4);
    EXPECT_NEAR(m.variance, c.variance(), 4.0 * std::sqrt(mu4 - c.variance() * c.variance()) / sn);
    EXPECT_LT(ks_distance(x, [&](double v) { return ig_cdf(a, b, v); }), 1.36 / sn);
}

TEST(InverseGamma, CharacteristicFunctionBasics)
{
    const IgComponent c = IgComponent::from_shape_scale(3.0, 2.0);
    EXPECT_EQ(ig_char(c, 0.0), cplx(1.0, 0.0));
    double prev = 1.0;
    for (double t = 0.01; t < 1e4; t *= 1.7) {
        const cplx phi = ig_char(c, t);
        EXPECT_LE(std::abs(phi), 1.0 + 1e-13);
        EXPECT_LT(std::abs(ig_char(c, -t) - std::conj(phi)), 1e-15);
        prev = std::abs(phi);
    }
    EXPECT_LT(prev, 1e-8);
    // phi'(0) = j E[X]: the sign of the imaginary part fixes the convention e^{+jtX}.
    const double t = 1e-6;
    const cplx slope = (ig_char(c, t) - 1.0) / (cplx(0.0, 1.0) * t);
    EXPECT_NEAR(slope.real(), c.mean(), 1e-4);
}

TEST(InverseGamma, CharacteristicFunctionMatchesSampling)
{
    Rng rng(3);
    for (const auto &c : {IgComponent::from_shape_scale(3.0, 2.0), IgComponent::from_shape_scale(2.2, 0.05)}) {
        for (double s : {0.1, 1.0, 10.0}) {
            const double t = s / c.beta;
            const KernelMean k = kernel_mean(t, 1000000, rng, [&](Rng &g) { return sample_ig(c, g); });
            const cplx phi = ig_char(c, t);
            EXPECT_LE(std::abs(phi.real() - k.mean.real()), 4.0 * k.se_re) << "t=" << t;
            EXPECT_LE(std::abs(phi.imag() - k.mean.imag()), 4.0 * k.se_im) << "t=" << t;
        }
    }
}

TEST(Mixture, CharacteristicFunction)
{
    const IgComponent c = IgComponent::from_shape_scale(4.0, 1.5);
    IgMixture single{{c}};
    IgComponent zero = IgComponent::from_shape_scale(2.5, 7.0, 0.0);
    IgMixture padded{{c, zero}};
    IgMixture pair{{c, c}};
    Rng rng(5);
    for (double t : {0.2, 1.0, 3.0}) {
        EXPECT_EQ(mixture_char(single, t), ig_char(c, t));
        EXPECT_EQ(mixture_char(padded, t), ig_char(c, t));
        const cplx sq = ig_char(c, t) * ig_char(c, t);
        EXPECT_LT(std::abs(mixture_char(pair, t) - sq), 1e-15);
        const KernelMean k = kernel_mean(t, 400000, rng, [&](Rng &g) { return sample_mixture(pair, g); });
        EXPECT_LE(std::abs(sq.real() - k.mean.real()), 4.0 * k.se_re);
        EXPECT_LE(std::abs(sq.imag() - k.mean.imag()), 4.0 * k.se_im);
    }
}

TEST(Mixture, MomentsAndValidation)
{
    IgMixture m{{IgComponent::from_shape_scale(3.0, 2.0, 0.5), IgComponent::from_shape_scale(5.0, 8.0, 2.0)}};
    EXPECT_DOUBLE_EQ(m.mean(), 0.5 * 1.0 + 2.0 * 2.0);
    EXPECT_DOUBLE_EQ(m.variance(), 0.25 * 1.0 + 4.0 * (64.0 / (16.0 * 3.0)));
    IgMixture none{{IgComponent::from_shape_scale(3.0, 2.0, 0.0)}};
    EXPECT_THROW(none.validate(), ConfigError);
    EXPECT_THROW(IgMixture{}.validate(), ConfigError);
    EXPECT_THROW(IgComponent::from_shape_scale(2.0, 1.0), ConfigError);
}

TEST(GilPelaez, SingleComponentMatchesIncompleteGamma)
{
    const IgMixture m{{IgComponent::from_shape_scale(3.0, 2.0)}};
    std::vector<double> x;
    for (double v = 0.05; v <= 50.0; v *= 1.05)
        x.push_back(v);
    const CdfResult F = gil_pelaez_cdf(m, x);
    for (std::size_t i = 0; i < x.size(); ++i)
        EXPECT_NEAR(F.values[i], ig_cdf(3.0, 2.0, x[i]), 1e-4) << x[i];
}

TEST(GilPelaez, HeavyAndLightTails)
{
    for (const auto &[a, b] : {std::pair{2.05, 1e-9}, std::pair{40.0, 3e3}, std::pair{2.5, 1.0}}) {
        const IgMixture m{{IgComponent::from_shape_scale(a, b)}};
        const CharacteristicGrid grid(m);
        for (double p : {0.001, 0.1, 0.5, 0.9, 0.999}) {
            const double x = b / boost::math::gamma_q_inv(a, p);
            EXPECT_NEAR(grid.cdf(x), p, 1e-4) << "alpha=" << a << " p=" << p;
        }
    }
}

TEST(GilPelaez, WeightScaling)
{
    const IgComponent c = IgComponent::from_shape_scale(3.5, 2.0);
    IgComponent w = c;
    w.weight = 0.3;
    const CharacteristicGrid g1(IgMixture{{c}}), gw(IgMixture{{w}});
    for (double x : {0.1, 0.4, 1.0, 3.0})
        EXPECT_NEAR(gw.cdf(0.3 * x), g1.cdf(x), 1e-8);
}

TEST(GilPelaez, OutputIsMonotoneProbability)
{
    const IgMixture m{{IgComponent::from_shape_scale(2.1, 1.0, 0.2), IgComponent::from_shape_scale(9.0, 3.0, 1.0),
                       IgComponent::from_shape_scale(3.0, 0.01, 5.0)}};
    std::vector<double> x;
    for (double v = 1e-3; v < 1e3; v *= 1.01)
        x.push_back(v);
    const CdfResult F = gil_pelaez_cdf(m, x);
    for (std::size_t i = 0; i < F.values.size(); ++i) {
        EXPECT_GE(F.values[i], 0.0);
        EXPECT_LE(F.values[i], 1.0);
        if (i)
            EXPECT_GE(F.values[i], F.values[i - 1]);
    }
    EXPECT_LT(F.max_adjustment, 1e-6);
    EXPECT_THROW(gil_pelaez_cdf(m, std::vector<double>{1.0, 0.5}), ConfigError);
}

TEST(GilPelaez, ChirpTransformAgreesWithDirectSum)
{
    const IgMixture m{{IgComponent::from_shape_scale(3.0, 2.0, 1.0), IgComponent::from_shape_scale(4.5, 0.7, 2.0)}};
    const CharacteristicGrid grid(m);
    const double x0 = 0.05, dx = 0.01;
    const std::size_t count = 700;
    const CdfResult fast = grid.cdf_uniform(x0, dx, count);
    std::vector<double> xs(count);
    for (std::size_t i = 0; i < count; ++i)
        xs[i] = x0 + dx * static_cast<double>(i);
    const CdfResult direct = grid.cdf(xs);
    for (std::size_t i = 0; i < count; ++i)
        EXPECT_NEAR(fast.values[i], direct.values[i], 1e-8);
}

TEST(GilPelaez, QuantileContract)
{
    const IgMixture single{{IgComponent::from_shape_scale(3.0, 2.0)}};
    const CharacteristicGrid g(single);
    const double median = 2.0 / boost::math::gamma_q_inv(3.0, 0.5);
    EXPECT_NEAR(g.quantile(0.5) / median, 1.0, 1e-4);

    const IgMixture m{{IgComponent::from_shape_scale(2.4, 1.0, 0.5), IgComponent::from_shape_scale(6.0, 5.0, 0.25)}};
    const CharacteristicGrid gm(m);
    double prev = 0.0;
    for (double p : {0.5, 0.9, 0.95, 0.99}) {
        const double q = gm.quantile(p);
        EXPECT_NEAR(gm.cdf(q), p, 2e-4);
        EXPECT_GT(q, prev);
        prev = q;
    }
    EXPECT_THROW(gm.quantile(1.0), ConfigError);
    EXPECT_THROW(gm.quantile(0.0), ConfigError);
}

TEST(GilPelaez, AdaptiveTruncationDiagnostics)
{
    const IgMixture m{{IgComponent::from_shape_scale(3.0, 2.0)}};
    QuadratureSpec q;
    const CharacteristicGrid g(m, q);
    EXPECT_LT(g.diagnostics().decay_at_t_max, q.decay_tol);
    EXPECT_LT(g.diagnostics().tail_at_alias_limit, 1e-6);
    EXPECT_DOUBLE_EQ(g.alias_limit(), pi / g.diagnostics().step);
    q.n_points = 10;
    EXPECT_THROW(CharacteristicGrid(m, q), ConfigError);
}

TEST(GilPelaez, MixtureMatchesSampling)
{
    Rng rng(21);
    const IgMixture m{{IgComponent::from_shape_scale(2.6, 1.0, 0.7), IgComponent::from_shape_scale(4.0, 3.0, 0.2),
                       IgComponent::from_shape_scale(8.0, 20.0, 0.05)}};
    const CharacteristicGrid g(m);
    std::vector<double> x(20000);
    for (auto &v : x)
        v = sample_mixture(m, rng);
    // 99% critical value.
    EXPECT_LT(ks_distance(x, [&](double v) { return g.cdf(v); }), 1.63 / std::sqrt(20000.0));
}
