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

#ifndef CFMIMO_SIMULATION_HPP
#define CFMIMO_SIMULATION_HPP

#include "cfmimo/channel.hpp"
#include "cfmimo/core/parallel.hpp"
#include "cfmimo/core/rng.hpp"
#include "cfmimo/receiver.hpp"
#include "cfmimo/scenario.hpp"

#include <vector>

namespace cfmimo::sim {

using scenario::ScenarioConfig;

/// The quasi-static part of a run: AP sites, known UEs, their shadowing,
/// correlation matrices and pilots. Only the unknown interferers change
/// between drops.
struct Scenario {
    ScenarioConfig config;
    scenario::Geometry geometry;
    scenario::LargeScale known_large_scale; ///< known UEs x all APs
    std::vector<std::size_t> known_pilots;
    std::vector<CMat> known_R; ///< known UE k, serving AP l at k * L_s + l
    bool unknown_share_desired_pilot = false; ///< adversarial layout: every unknown UE reuses the desired UE's pilot

    std::size_t num_serving() const { return geometry.serving_set.size(); }

    RMat known_beta_serving() const
    {
        RMat b(static_cast<Eigen::Index>(config.num_known()), static_cast<Eigen::Index>(num_serving()));
        for (std::size_t l = 0; l < num_serving(); ++l)
            b.col(static_cast<Eigen::Index>(l)) = known_large_scale.beta.col(static_cast<Eigen::Index>(geometry.serving_set[l]));
        return b;
    }

    RMat known_shadowing_serving() const
    {
        RMat f(static_cast<Eigen::Index>(config.num_known()), static_cast<Eigen::Index>(num_serving()));
        for (std::size_t l = 0; l < num_serving(); ++l)
            f.col(static_cast<Eigen::Index>(l)) = known_large_scale.F.col(static_cast<Eigen::Index>(geometry.serving_set[l]));
        return f;
    }
};

/// Builds the quasi-static part on a given site map.
inline Scenario make_scenario(const ScenarioConfig &config, scenario::Geometry geometry)
{
    config.validate();
    if (geometry.serving_set.size() != config.L_s || geometry.known_ue_positions.size() != config.num_known())
        throw ConfigError("make_scenario: geometry does not match the configuration");
    Scenario sc;
    sc.config = config;
    sc.geometry = std::move(geometry);
    Rng sh = make_rng(config.seed, Stream::known_shadowing);
    const RMat F = scenario::sample_shadowing(sc.geometry.known_ue_positions, sc.geometry.ap_positions.size(),
                                              config.shadowing, sh);
    sc.known_large_scale = scenario::large_scale_gains(sc.geometry.known_ue_positions, sc.geometry.ap_positions, F, config);
    const RMat beta = sc.known_beta_serving();
    const std::vector<double> power(config.num_known(), config.p_mw);
    sc.known_pilots = channel::assign_known_pilots(beta, power, config.tau_p);
    sc.known_R = channel::build_correlations(sc.geometry.serving_ap_positions(), sc.geometry.known_ue_positions, beta,
                                             config.N, config.asd_deg, config.correlation);
    return sc;
}

inline Scenario make_scenario(const ScenarioConfig &config)
{
    config.validate();
    Rng geo = make_rng(config.seed, Stream::geometry);
    return make_scenario(config, scenario::place_network(config, geo));
}

/// Worst case for the diagonal approximation: the serving APs sit on a 1 m
/// circle, so every unknown UE is equally strong at all of them. The circle is
/// centred opposite the desired UE (which is at the cluster edge), next to the
/// annulus of unknown UEs, and all unknown UEs reuse the desired UE's pilot.
inline Scenario make_adversarial_scenario(ScenarioConfig config)
{
    config.desired = scenario::DesiredPreset::edge;
    config.validate();
    Rng geo = make_rng(config.seed, Stream::geometry);
    scenario::Geometry g = scenario::place_network(config, geo);
    const double n = static_cast<double>(g.serving_set.size());
    for (std::size_t i = 0; i < g.serving_set.size(); ++i) {
        const double ang = 2.0 * pi * static_cast<double>(i) / n;
        g.ap_positions[g.serving_set[i]] = Point2{std::cos(ang) - config.edge_radius_m, std::sin(ang)};
    }
    Scenario sc = make_scenario(config, std::move(g));
    sc.unknown_share_desired_pilot = true;
    return sc;
}

struct Drop {
    std::vector<Point2> unknown_positions;
    scenario::LargeScale unknown_large_scale; ///< unknown UEs x serving APs
    channel::ChannelStatistics stats;
};

/// Draws the unknown interferers of one drop: positions, shadowing
/// conditioned on the known UEs' realization, pilots, correlations.
inline Drop draw_drop(const Scenario &sc, Rng &rng)
{
    const auto &cfg = sc.config;
    Drop d;
    d.unknown_positions = scenario::drop_unknown_ues(cfg, rng);
    const auto aps = sc.geometry.serving_ap_positions();
    const RMat F = scenario::sample_shadowing_conditional(sc.geometry.known_ue_positions, sc.known_shadowing_serving(),
                                                          d.unknown_positions, cfg.shadowing, rng);
    d.unknown_large_scale = scenario::large_scale_gains(d.unknown_positions, aps, F, cfg);

    auto &s = d.stats;
    s.N = cfg.N;
    s.num_aps = aps.size();
    s.num_known = cfg.num_known();
    s.tau_p = cfg.tau_p;
    s.pilot_of = sc.known_pilots;
    auto extra = channel::assign_unknown_pilots(cfg.K_u, cfg.tau_p, rng);
    if (sc.unknown_share_desired_pilot)
        extra.assign(cfg.K_u, sc.known_pilots[sc.geometry.desired_ue_index]);
    s.pilot_of.insert(s.pilot_of.end(), extra.begin(), extra.end());
    s.power.assign(s.num_known + cfg.K_u, cfg.p_mw);
    s.R = sc.known_R;
    const auto unknown_R = channel::build_correlations(aps, d.unknown_positions, d.unknown_large_scale.beta, cfg.N,
                                                       cfg.asd_deg, cfg.correlation);
    s.R.insert(s.R.end(), unknown_R.begin(), unknown_R.end());
    return d;
}

/// Statistics of drop `index` of `stream`. The same (seed, stream, index)
/// always yields the same unknown UEs, whatever the combiner.
inline receiver::DropStatistics simulate_indexed_drop(const Scenario &sc, const receiver::MonteCarloConfig &mc,
                                                      Stream stream, std::size_t index)
{
    Rng rng = make_rng(sc.config.seed, stream, index);
    const Drop d = draw_drop(sc, rng);
    return receiver::simulate_drop(d.stats, sc.config.noise_mw(), mc, rng);
}

inline std::vector<receiver::DropStatistics> simulate_drops(const Scenario &sc, const receiver::MonteCarloConfig &mc,
                                                            Stream stream, std::size_t n_drops, unsigned threads)
{
    std::vector<receiver::DropStatistics> out(n_drops);
    parallel_for(n_drops, threads, [&](std::size_t i) { out[i] = simulate_indexed_drop(sc, mc, stream, i); });
    return out;
}

} // namespace cfmimo::sim

#endif
