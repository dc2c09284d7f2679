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

#include "cfmimo/scenario.hpp"
#include "cfmimo/core/stats.hpp"

#include <gtest/gtest.h>

using namespace cfmimo;
using namespace cfmimo::scenario;

TEST(Pathloss, ReferenceValues)
{
    EXPECT_DOUBLE_EQ(pathloss_db(1.0), -30.5);
    EXPECT_NEAR(pathloss_db(10.0), -67.2, 1e-12);
    EXPECT_NEAR(pathloss_db(100.0), -103.9, 1e-12);
    EXPECT_THROW(pathloss_db(0.0), ConfigError);
    EXPECT_THROW(pathloss_db(-3.0), ConfigError);
    double prev = pathloss_db(0.5);
    for (double d = 1.0; d < 1e4; d *= 1.3) {
        EXPECT_LT(pathloss_db(d), prev);
        prev = pathloss_db(d);
    }
}

TEST(ScenarioConfig, DefaultsAndValidation)
{
    ScenarioConfig c;
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(c.L, 21u);
    EXPECT_EQ(c.num_known(), 11u);
    EXPECT_DOUBLE_EQ(c.prelog(), 0.95);
    EXPECT_NEAR(c.noise_mw(), std::pow(10.0, -9.4), 1e-22);

    auto rejects = [](auto mutate) {
        ScenarioConfig bad;
        mutate(bad);
        EXPECT_THROW(bad.validate(), ConfigError);
    };
    rejects([](ScenarioConfig &b) { b.tau_p = b.tau_c; });
    rejects([](ScenarioConfig &b) { b.tau_p = b.K_n + 1; });
    rejects([](ScenarioConfig &b) { b.L_s = b.L + 1; });
    rejects([](ScenarioConfig &b) { b.annulus_min_m = b.serving_radius_m; });
    rejects([](ScenarioConfig &b) { b.p_mw = 0.0; });
    rejects([](ScenarioConfig &b) { b.L = 20; });
}

TEST(PlaceNetwork, ServingClusterAndNeighbourTier)
{
    ScenarioConfig c;
    Rng rng(1);
    const Geometry g = place_network(c, rng);
    ASSERT_EQ(g.ap_positions.size(), 21u);
    ASSERT_EQ(g.serving_set.size(), 3u);
    for (std::size_t l : g.serving_set)
        EXPECT_LE(norm(g.ap_positions[l]), 400.0);
    for (std::size_t l = 3; l < 21; ++l) {
        const std::size_t cl = (l - 3) / 3;
        const double a = 2.0 * pi * static_cast<double>(cl) / 6.0;
        EXPECT_LE(distance(g.ap_positions[l], {700.0 * std::cos(a), 700.0 * std::sin(a)}), 300.0);
    }
    ASSERT_EQ(g.known_ue_positions.size(), 11u);
    EXPECT_EQ(g.known_ue_positions[g.desired_ue_index], (Point2{1.0, 0.0}));
    for (const auto &p : g.known_ue_positions)
        EXPECT_LE(norm(p), 400.0);

    c.desired = DesiredPreset::edge;
    Rng rng2(1);
    EXPECT_DOUBLE_EQ(norm(place_network(c, rng2).known_ue_positions[0]), 390.0);
}

TEST(PlaceNetwork, NoNeighboursAndDeterminism)
{
    ScenarioConfig c;
    c.L = 3;
    Rng rng(4);
    EXPECT_EQ(place_network(c, rng).ap_positions.size(), 3u);

    ScenarioConfig d;
    Rng a(99), b(99);
    const Geometry g1 = place_network(d, a), g2 = place_network(d, b);
    EXPECT_EQ(g1.ap_positions, g2.ap_positions);
    EXPECT_EQ(g1.known_ue_positions, g2.known_ue_positions);
}

TEST(UnknownDrop, AnnulusIsUniformByArea)
{
    ScenarioConfig c;
    c.K_u = 0;
    Rng rng(8);
    EXPECT_TRUE(drop_unknown_ues(c, rng).empty());

    c.K_u = 100000;
    const auto pts = drop_unknown_ues(c, rng);
    std::size_t inner = 0;
    std::vector<double> r;
    for (const auto &p : pts) {
        const double rad = norm(p);
        EXPECT_GE(rad, 450.0 - 1e-9);
        EXPECT_LE(rad, 1000.0 + 1e-9);
        inner += rad <= 725.0 ? 1 : 0;
        if (r.size() < 10000)
            r.push_back(rad);
    }
    // Area fraction of the annulus inside 725 m.
    const double expected = (725.0 * 725.0 - 450.0 * 450.0) / (1000.0 * 1000.0 - 450.0 * 450.0);
    EXPECT_NEAR(static_cast<double>(inner) / 100000.0, expected, 0.005);
    const double ks = ks_distance(r, [](double x) { return (x * x - 450.0 * 450.0) / (1000.0 * 1000.0 - 450.0 * 450.0); });
    EXPECT_LT(ks, 0.02);
}

TEST(Shadowing, CovarianceModel)
{
    const ShadowingModel m;
    EXPECT_DOUBLE_EQ(shadowing_covariance(0.0, m), 16.0);
    EXPECT_DOUBLE_EQ(shadowing_covariance(9.0, m), 8.0);
    EXPECT_DOUBLE_EQ(shadowing_covariance(18.0, m), 4.0);
}

TEST(Shadowing, EmpiricalCovariance)
{
    const ShadowingModel m;
    const std::vector<Point2> ues{{0, 0}, {9, 0}, {0, 18}};
    Rng rng(12);
    const std::size_t n = 100000;
    RMat s = RMat::Zero(3, 3);
    double cross = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const RMat F = sample_shadowing(ues, 2, m, rng);
        s += F.col(0) * F.col(0).transpose();
        cross += F(0, 0) * F(0, 1);
    }
    s /= static_cast<double>(n);
    EXPECT_NEAR(s(0, 0), 16.0, 0.3);
    EXPECT_NEAR(s(0, 1), 8.0, 0.3);
    EXPECT_NEAR(s(0, 2), 4.0, 0.3);
    EXPECT_NEAR(cross / static_cast<double>(n), 0.0, 0.2);
}

TEST(Shadowing, JitterRescuesCoincidentUes)
{
    const std::vector<Point2> ues{{5, 5}, {5, 5}};
    Rng rng(2);
    const RMat F = sample_shadowing(ues, 3, ShadowingModel{}, rng);
    for (Eigen::Index l = 0; l < 3; ++l)
        EXPECT_NEAR(F(0, l), F(1, l), 1e-3);
}

TEST(Shadowing, ConditionalOnKnownRealization)
{
    // One known UE with F = 6 dB; a new UE 9 m away has conditional mean
    // rho F = 3 dB and variance 16 (1 - rho^2) = 12 dB^2.
    const ShadowingModel m;
    const std::vector<Point2> known{{0, 0}};
    const std::vector<Point2> fresh{{9, 0}};
    RMat given(1, 1);
    given(0, 0) = 6.0;
    Rng rng(31);
    std::vector<double> x(50000);
    for (auto &v : x)
        v = sample_shadowing_conditional(known, given, fresh, m, rng)(0, 0);
    const auto mom = sample_moments(x);
    EXPECT_NEAR(mom.mean, 3.0, 4.0 * std::sqrt(12.0 / 50000.0));
    EXPECT_NEAR(mom.variance, 12.0, 0.3);
}

TEST(LargeScale, GainsFromDistanceAndShadowing)
{
    ScenarioConfig c;
    c.ap_height_m = 0.0;
    const std::vector<Point2> ues{{1, 0}, {10, 0}};
    const std::vector<Point2> aps{{0, 0}};
    RMat F = RMat::Zero(2, 1);
    LargeScale ls = large_scale_gains(ues, aps, F, c);
    EXPECT_NEAR(ls.beta(0, 0), std::pow(10.0, -3.05), 1e-18);
    EXPECT_DOUBLE_EQ(ls.d(1, 0), 10.0);
    const double base = ls.beta(1, 0);
    F(1, 0) = 10.0;
    ls = large_scale_gains(ues, aps, F, c);
    EXPECT_NEAR(ls.beta(1, 0) / base, 10.0, 1e-12);
    EXPECT_NEAR(linear_to_db(ls.beta(1, 0)), pathloss_db(10.0) + 10.0, 1e-12);

    c.ap_height_m = 10.0;
    ls = large_scale_gains(ues, aps, RMat::Zero(2, 1), c);
    EXPECT_NEAR(ls.d(0, 0), std::hypot(1.0, 10.0), 1e-12);
    EXPECT_TRUE((ls.beta.array() > 0.0).all());
}
