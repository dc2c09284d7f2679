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

#include "cfmimo/channel.hpp"
#include "cfmimo/core/stats.hpp"

#include <gtest/gtest.h>

using namespace cfmimo;
using namespace cfmimo::channel;

namespace {

// Composite Simpson rule directly in the angle deviation delta over +-10 sd.
cplx scattering_entry(double theta, double asd, int lag)
{
    const int n = 40000;
    const double a = -10.0 * asd, h = 20.0 * asd / n;
    cplx s = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double d = a + h * i;
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        const double pdf = std::exp(-0.5 * d * d / (asd * asd)) / (std::sqrt(2.0 * pi) * asd);
        s += w * pdf * std::polar(1.0, pi * lag * std::sin(theta + d));
    }
    return s * h / 3.0;
}

ChannelStatistics single_ap_stats(std::size_t N, std::vector<CMat> R, std::vector<std::size_t> pilots, std::size_t known,
                                  std::size_t tau_p, double p = 1.0)
{
    ChannelStatistics s;
    s.N = N;
    s.num_aps = 1;
    s.num_known = known;
    s.tau_p = tau_p;
    s.R = std::move(R);
    s.pilot_of = std::move(pilots);
    s.power.assign(s.pilot_of.size(), p);
    return s;
}

} // namespace

TEST(Correlation, LocalScatteringMatchesDirectIntegration)
{
    for (const auto &[theta, asd_deg, N] : {std::tuple{0.3, 15.0, 16}, std::tuple{-1.2, 5.0, 8}, std::tuple{2.0, 30.0, 32}}) {
        const double asd = asd_deg * pi / 180.0;
        const CMat R = local_scattering_matrix(theta, asd, static_cast<std::size_t>(N));
        for (int d = 0; d < N; ++d)
            EXPECT_LT(std::abs(R(d, 0) - scattering_entry(theta, asd, d)), 1e-10) << "lag " << d;
    }
}

TEST(Correlation, StructuralProperties)
{
    const CMat R = correlation_matrix({0, 0}, {30, 40}, 2.5e-9, 16, 15.0, scenario::CorrelationModel::local_scattering);
    EXPECT_NEAR(R.trace().real() / 16.0 / 2.5e-9, 1.0, 1e-9);
    EXPECT_LT((R - R.adjoint()).cwiseAbs().maxCoeff(), 1e-24);
    const Eigen::SelfAdjointEigenSolver<CMat> es(R);
    EXPECT_GT(es.eigenvalues().minCoeff(), -1e-12 * 2.5e-9);

    const CMat I = correlation_matrix({0, 0}, {1, 1}, 2.0, 4, 15.0, scenario::CorrelationModel::uncorrelated);
    EXPECT_TRUE(I.isApprox(CMat::Identity(4, 4) * 2.0));
}

TEST(Correlation, ZeroSpreadIsRankOneSteering)
{
    const double theta = 0.7;
    const CMat R = local_scattering_matrix(theta, 0.0, 8);
    CVec a(8);
    for (int m = 0; m < 8; ++m)
        a[m] = std::polar(1.0, pi * m * std::sin(theta));
    EXPECT_LT((R - a * a.adjoint()).cwiseAbs().maxCoeff(), 1e-13);
    const CMat Rs = local_scattering_matrix(theta, 1e-5, 8);
    EXPECT_LT((Rs - a * a.adjoint()).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(Sampling, FactorAndEmpiricalCovariance)
{
    const CMat R = local_scattering_matrix(0.2, 10.0 * pi / 180.0, 4) * 3.0;
    const CMat B = psd_factor(R);
    EXPECT_LT((B * B.adjoint() - R).cwiseAbs().maxCoeff(), 1e-12);

    Rng rng(4);
    const std::size_t n = 100000;
    CMat S = CMat::Zero(4, 4);
    double norm2 = 0.0;
    std::vector<CVec> hs;
    for (std::size_t i = 0; i < n; ++i) {
        const CVec h = sample_channel(R, rng);
        S += h * h.adjoint();
        norm2 += h.squaredNorm();
    }
    S /= static_cast<double>(n);
    // Entry (a, b) of h h^H has variance R_aa R_bb; 5 standard errors.
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            EXPECT_LT(std::abs(S(a, b) - R(a, b)), 5.0 * std::sqrt(R(a, a).real() * R(b, b).real() / n));
    EXPECT_NEAR(norm2 / n, R.trace().real(), 5.0 * 3.0 * 4.0 / std::sqrt(static_cast<double>(n)));

    EXPECT_TRUE(sample_channel(CMat::Zero(4, 4), rng).isZero());
    CMat bad = CMat::Identity(3, 3);
    bad(2, 2) = -1.0;
    EXPECT_THROW(psd_factor(bad), NumericalError);
}

TEST(Pilots, OrthogonalWhenEnoughPilots)
{
    Rng rng(5);
    RMat beta = RMat::Random(10, 3).cwiseAbs();
    const std::vector<double> p(10, 1.0);
    auto pil = assign_known_pilots(beta, p, 10);
    std::sort(pil.begin(), pil.end());
    for (std::size_t i = 0; i < 10; ++i)
        EXPECT_EQ(pil[i], i);

    const auto one = assign_pilots(beta, p, 5, 1, rng);
    for (std::size_t t : one)
        EXPECT_EQ(t, 0u);
}

TEST(Pilots, EleventhUeJoinsLeastLoadedPilot)
{
    Rng rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        RMat beta(11, 3);
        for (Eigen::Index i = 0; i < beta.size(); ++i)
            beta.data()[i] = std::pow(10.0, -3.0 * u(rng));
        std::vector<double> p(11);
        for (auto &v : p)
            v = 50.0 + 100.0 * u(rng);
        const auto pil = assign_known_pilots(beta, p, 10);

        // The weakest UE (by its best AP) is the one that has to share.
        std::size_t weakest = 0;
        for (std::size_t k = 1; k < 11; ++k)
            if (beta.row(k).maxCoeff() < beta.row(weakest).maxCoeff())
                weakest = k;
        std::vector<std::size_t> count(10, 0);
        for (std::size_t t : pil)
            ++count[t];
        std::size_t shared = 10;
        for (std::size_t t = 0; t < 10; ++t)
            if (count[t] == 2)
                shared = t;
        ASSERT_LT(shared, 10u);
        EXPECT_EQ(pil[weakest], shared);

        // Exhaustive check over the tau_p choices for that UE.
        Eigen::Index l_star;
        beta.row(weakest).maxCoeff(&l_star);
        double best = std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (std::size_t t = 0; t < 10; ++t) {
            double load = 0.0;
            for (std::size_t i = 0; i < 11; ++i)
                if (i != weakest && pil[i] == t)
                    load += p[i] * beta(i, l_star);
            if (load < best) {
                best = load;
                arg = t;
            }
        }
        EXPECT_EQ(shared, arg);
    }
}

TEST(PilotSignal, NoiseOnlyAndNoiseless)
{
    Rng rng(9);
    NormalSampler normal;
    const std::vector<CVec> h{CVec::Constant(4, cplx(1.0, -2.0))};
    const std::vector<std::size_t> pil{0};
    const std::vector<double> p{3.0};
    double e = 0.0;
    for (int i = 0; i < 20000; ++i)
        e += received_pilot(1, h, pil, p, 2, 0.5, rng, normal).squaredNorm();
    EXPECT_NEAR(e / 20000.0, 4 * 0.5, 4.0 * 2.0 / std::sqrt(4.0 * 20000.0));
    const CVec y = received_pilot(0, h, pil, p, 2, 0.0, rng, normal);
    EXPECT_LT((y - std::sqrt(6.0) * h[0]).norm(), 1e-12);
}

TEST(PilotSignal, ReceivedPowerAddsUp)
{
    Rng rng(10);
    NormalSampler normal;
    const CMat R0 = local_scattering_matrix(0.1, 0.2, 4) * 2.0;
    const CMat R1 = CMat::Identity(4, 4) * 0.5;
    const std::vector<std::size_t> pil{0, 0};
    const std::vector<double> p{1.0, 4.0};
    const std::size_t tau_p = 3;
    const double sigma2 = 0.3;
    const std::size_t n = 50000;
    std::vector<double> e(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::vector<CVec> h{sample_channel(R0, rng), sample_channel(R1, rng)};
        e[i] = received_pilot(0, h, pil, p, tau_p, sigma2, rng, normal).squaredNorm();
    }
    const auto m = sample_moments(e);
    const double expected = 3.0 * (1.0 * R0.trace().real() + 4.0 * R1.trace().real()) + 4 * sigma2;
    EXPECT_NEAR(m.mean, expected, 4.0 * std::sqrt(m.variance / n));
}

TEST(Estimation, ScalarMmseVariance)
{
    const double beta = 2.0, p = 1.5, sigma2 = 0.8;
    const std::size_t tau_p = 4;
    const auto s = single_ap_stats(3, {CMat::Identity(3, 3) * beta}, {0}, 1, tau_p, p);
    Rng rng(12);
    NormalSampler normal;
    const std::size_t n = 50000;
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::vector<CVec> h{sample_channel(s.R[0], rng)};
        const CVec y = received_pilot(0, h, s.pilot_of, s.power, tau_p, sigma2, rng, normal);
        v[i] = std::norm(estimate_channel(y, 0, 0, s, sigma2)[0]);
    }
    const double tp = static_cast<double>(tau_p);
    const double expected = tp * p * beta * beta / (tp * p * beta + sigma2);
    const auto m = sample_moments(v);
    EXPECT_NEAR(m.mean, expected, 4.0 * std::sqrt(m.variance / n));
    EXPECT_TRUE(estimate_channel(CVec::Ones(3), 0, 0, single_ap_stats(3, {CMat::Zero(3, 3)}, {0}, 1, 1), 1.0).isZero());
}

TEST(Estimation, UnknownContaminationInflatesError)
{
    const std::size_t N = 4, tau_p = 1;
    const double sigma2 = 0.1;
    const CMat Rk = local_scattering_matrix(0.4, 0.25, N);
    const CMat Ru = local_scattering_matrix(-0.6, 0.25, N) * 0.5;
    const auto clean = single_ap_stats(N, {Rk}, {0}, 1, tau_p);
    const auto dirty = single_ap_stats(N, {Rk, Ru}, {0, 0}, 1, tau_p);
    const ChannelEstimator est(dirty, sigma2);
    Rng rng(13);
    NormalSampler normal;
    const std::size_t n = 40000;
    CMat e_clean = CMat::Zero(N, N), e_dirty = CMat::Zero(N, N);
    CVec mean_hat = CVec::Zero(N);
    for (std::size_t i = 0; i < n; ++i) {
        const CVec hk = sample_channel(Rk, rng), hu = sample_channel(Ru, rng);
        const std::vector<CVec> one{hk}, two{hk, hu};
        const CVec y1 = received_pilot(0, one, clean.pilot_of, clean.power, tau_p, sigma2, rng, normal);
        const CVec y2 = received_pilot(0, two, dirty.pilot_of, dirty.power, tau_p, sigma2, rng, normal);
        const CVec d1 = hk - estimate_channel(y1, 0, 0, clean, sigma2);
        const CVec hat2 = est.estimate(0, 0, y2);
        const CVec d2 = hk - hat2;
        e_clean += d1 * d1.adjoint();
        e_dirty += d2 * d2.adjoint();
        mean_hat += hat2;
    }
    e_clean /= static_cast<double>(n);
    e_dirty /= static_cast<double>(n);
    mean_hat /= static_cast<double>(n);
    EXPECT_LT(mean_hat.norm(), 5.0 * std::sqrt(Rk.trace().real() / n));
    const Eigen::SelfAdjointEigenSolver<CMat> es(e_dirty - e_clean);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-9);
    EXPECT_GT(e_dirty.trace().real(), 1.5 * e_clean.trace().real());
}

TEST(ChannelStatistics, Validation)
{
    auto s = single_ap_stats(2, {CMat::Identity(2, 2)}, {0}, 1, 1);
    EXPECT_NO_THROW(s.validate());
    EXPECT_NEAR(s.beta(0, 0), 1.0, 1e-15);
    s.pilot_of[0] = 3;
    EXPECT_THROW(s.validate(), ConfigError);
}
