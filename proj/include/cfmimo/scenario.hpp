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

#ifndef CFMIMO_SCENARIO_HPP
#define CFMIMO_SCENARIO_HPP

#include "cfmimo/core/error.hpp"
#include "cfmimo/core/rng.hpp"
#include "cfmimo/core/types.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace cfmimo::scenario {

struct PathlossModel {
    double intercept_db = -30.5;
    double exponent_decades = 36.7; ///< dB per decade of distance
};

struct ShadowingModel {
    double std_db = 4.0;
    double decorrelation_m = 9.0; ///< covariance halves every decorrelation_m metres
};

/// Neighbouring clusters around the serving one. They only shape the site map;
/// unknown interferers are not associated with any of them.
struct NeighborTier {
    std::size_t clusters = 6;
    double ring_radius_m = 700.0;
    double spread_m = 300.0;
};

enum class DesiredPreset { center, edge };

enum class CorrelationModel { local_scattering, uncorrelated };

inline const char *to_string(DesiredPreset p) { return p == DesiredPreset::center ? "center" : "edge"; }
inline const char *to_string(CorrelationModel m)
{
    return m == CorrelationModel::local_scattering ? "local-scattering" : "uncorrelated";
}

struct ScenarioConfig {
    std::size_t L = 21;
    std::size_t L_s = 3;
    std::size_t N = 16;
    std::size_t K_n = 10;
    std::size_t K_u = 100;
    double p_mw = 100.0;
    double noise_dbm = -94.0;
    std::size_t tau_c = 200;
    std::size_t tau_p = 10;
    double serving_radius_m = 400.0;
    double annulus_min_m = 450.0;
    double annulus_max_m = 1000.0;
    double ap_height_m = 10.0;
    PathlossModel pathloss;
    ShadowingModel shadowing;
    NeighborTier neighbors;
    DesiredPreset desired = DesiredPreset::center;
    double center_offset_m = 1.0;
    double edge_radius_m = 390.0;
    CorrelationModel correlation = CorrelationModel::local_scattering;
    double asd_deg = 15.0;
    std::uint64_t seed = 1;

    double noise_mw() const { return std::pow(10.0, noise_dbm / 10.0); }
    double prelog() const { return static_cast<double>(tau_c - tau_p) / static_cast<double>(tau_c); }
    std::size_t num_known() const { return K_n + 1; }

    Point2 desired_position() const
    {
        return desired == DesiredPreset::center ? Point2{center_offset_m, 0.0} : Point2{edge_radius_m, 0.0};
    }

    void validate() const
    {
        auto fail = [](const std::string &what) { throw ConfigError("scenario: " + what); };
        if (N < 1)
            fail("N must be >= 1");
        if (L_s < 1 || L_s > L)
            fail("need 1 <= L_s <= L");
        if (tau_p < 1)
            fail("tau_p must be >= 1");
        if (tau_p >= tau_c)
            fail("tau_p must be smaller than tau_c");
        if (tau_p >= K_n + 1)
            fail("tau_p must be smaller than K_n + 1");
        if (!(p_mw > 0.0) || !std::isfinite(p_mw))
            fail("p must be positive");
        if (!std::isfinite(noise_dbm))
            fail("noise_power must be finite");
        if (!(serving_radius_m > 0.0))
            fail("serving_radius must be positive");
        if (!(annulus_min_m > serving_radius_m))
            fail("annulus r_min must exceed serving_radius");
        if (!(annulus_max_m > annulus_min_m) || !std::isfinite(annulus_max_m))
            fail("annulus r_max must exceed r_min");
        if (!(ap_height_m >= 0.0))
            fail("ap_height must be >= 0");
        if (!(shadowing.std_db >= 0.0) || !(shadowing.decorrelation_m > 0.0))
            fail("shadowing needs std_db >= 0 and decorrelation_m > 0");
        if (!std::isfinite(pathloss.intercept_db) || !std::isfinite(pathloss.exponent_decades))
            fail("pathloss parameters must be finite");
        if (L > L_s && neighbors.clusters == 0)
            fail("neighbor cluster count must be positive when L > L_s");
        if (neighbors.clusters > 0 && (L - L_s) % neighbors.clusters != 0)
            fail("L - L_s must be divisible by the neighbor cluster count");
        if (!(neighbors.spread_m >= 0.0) || !(neighbors.ring_radius_m >= 0.0))
            fail("neighbor geometry must be non-negative");
        if (!(asd_deg >= 0.0) || asd_deg > 90.0)
            fail("asd_deg must lie in [0, 90]");
        if (!(edge_radius_m >= 0.0) || edge_radius_m > serving_radius_m)
            fail("edge_radius must lie inside the serving disk");
        if (!(center_offset_m >= 0.0) || center_offset_m > serving_radius_m)
            fail("center_offset must lie inside the serving disk");
    }
};

/// UE ordering used throughout: known UEs first (index 0 is the desired UE),
/// then the unknown interferers of the current drop.
struct Geometry {
    std::vector<Point2> ap_positions;
    std::vector<std::size_t> serving_set;
    std::vector<Point2> known_ue_positions;
    std::vector<Point2> unknown_ue_positions;
    std::size_t desired_ue_index = 0;

    std::vector<Point2> serving_ap_positions() const
    {
        std::vector<Point2> out;
        out.reserve(serving_set.size());
        for (std::size_t l : serving_set)
            out.push_back(ap_positions[l]);
        return out;
    }

    std::vector<Point2> ue_positions() const
    {
        std::vector<Point2> out(known_ue_positions);
        out.insert(out.end(), unknown_ue_positions.begin(), unknown_ue_positions.end());
        return out;
    }
};

/// Rows are UEs, columns APs.
struct LargeScale {
    RMat beta; ///< linear gain
    RMat d;    ///< metres
    RMat F;    ///< shadowing, dB
};

inline Point2 uniform_in_disk(const Point2 &centre, double radius, Rng &rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double r = radius * std::sqrt(u(rng));
    const double a = 2.0 * pi * u(rng);
    return {centre.x + r * std::cos(a), centre.y + r * std::sin(a)};
}

inline Point2 uniform_in_annulus(double r_min, double r_max, Rng &rng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double r = std::sqrt(r_min * r_min + u(rng) * (r_max * r_max - r_min * r_min));
    const double a = 2.0 * pi * u(rng);
    return {r * std::cos(a), r * std::sin(a)};
}

/// Serving APs and known UEs in the serving disk, the neighbour tier on a ring.
/// The desired UE sits at the configured preset position.
inline Geometry place_network(const ScenarioConfig &config, Rng &rng)
{
    config.validate();
    Geometry g;
    const Point2 origin{};
    for (std::size_t l = 0; l < config.L_s; ++l) {
        g.serving_set.push_back(l);
        g.ap_positions.push_back(uniform_in_disk(origin, config.serving_radius_m, rng));
    }
    const std::size_t n_neighbors = config.L - config.L_s;
    if (n_neighbors > 0) {
        const std::size_t per_cluster = n_neighbors / config.neighbors.clusters;
        for (std::size_t c = 0; c < config.neighbors.clusters; ++c) {
            const double a = 2.0 * pi * static_cast<double>(c) / static_cast<double>(config.neighbors.clusters);
            const Point2 centre{config.neighbors.ring_radius_m * std::cos(a),
                                config.neighbors.ring_radius_m * std::sin(a)};
            for (std::size_t j = 0; j < per_cluster; ++j)
                g.ap_positions.push_back(uniform_in_disk(centre, config.neighbors.spread_m, rng));
        }
    }
    g.known_ue_positions.push_back(config.desired_position());
    for (std::size_t k = 0; k < config.K_n; ++k)
        g.known_ue_positions.push_back(uniform_in_disk(origin, config.serving_radius_m, rng));
    return g;
}

inline std::vector<Point2> drop_unknown_ues(const ScenarioConfig &config, Rng &rng)
{
    std::vector<Point2> out;
    out.reserve(config.K_u);
    for (std::size_t i = 0; i < config.K_u; ++i)
        out.push_back(uniform_in_annulus(config.annulus_min_m, config.annulus_max_m, rng));
    return out;
}

inline double pathloss_db(double d, const PathlossModel &model = {})
{
    if (!(d > 0.0) || !std::isfinite(d))
        throw ConfigError("pathloss_db: distance must be positive and finite");
    return model.intercept_db - model.exponent_decades * std::log10(d);
}

/// UE-to-AP distance including the AP antenna height.
inline double link_distance(const Point2 &ue, const Point2 &ap, double ap_height)
{
    return std::hypot(distance(ue, ap), ap_height);
}

inline double shadowing_covariance(double delta, const ShadowingModel &model)
{
    return model.std_db * model.std_db * std::exp2(-delta / model.decorrelation_m);
}

inline RMat shadowing_covariance(const std::vector<Point2> &ues, const ShadowingModel &model)
{
    const auto n = static_cast<Eigen::Index>(ues.size());
    RMat c(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j <= i; ++j)
            c(i, j) = c(j, i) = shadowing_covariance(distance(ues[i], ues[j]), model);
    return c;
}

namespace detail {

// Lower Cholesky factor; one retry with 1e-9 * sigma^2 diagonal jitter.
inline RMat shadowing_factor(const RMat &cov, double variance)
{
    Eigen::LLT<RMat> llt(cov);
    if (llt.info() == Eigen::Success)
        return llt.matrixL();
    RMat jittered = cov;
    jittered.diagonal().array() += 1e-9 * variance;
    llt.compute(jittered);
    if (llt.info() != Eigen::Success)
        throw NumericalError("shadowing covariance is not positive definite");
    return llt.matrixL();
}

} // namespace detail

/// Independent draws per AP of the UE-correlated shadowing field (dB), UEs x APs.
inline RMat sample_shadowing(const std::vector<Point2> &ues, std::size_t num_aps, const ShadowingModel &model, Rng &rng)
{
    const auto n = static_cast<Eigen::Index>(ues.size());
    RMat F = RMat::Zero(n, static_cast<Eigen::Index>(num_aps));
    if (n == 0 || model.std_db == 0.0)
        return F;
    const RMat chol = detail::shadowing_factor(shadowing_covariance(ues, model), model.std_db * model.std_db);
    NormalSampler normal;
    RVec w(n);
    for (Eigen::Index l = 0; l < F.cols(); ++l) {
        for (Eigen::Index i = 0; i < n; ++i)
            w[i] = normal(rng);
        F.col(l) = chol * w;
    }
    return F;
}

inline RMat sample_shadowing(const Geometry &geometry, const ScenarioConfig &config, Rng &rng)
{
    return sample_shadowing(geometry.ue_positions(), geometry.ap_positions.size(), config.shadowing, rng);
}

/// Shadowing of new UEs conditioned on an existing realization `given`
/// (rows: given UEs, columns: APs) of the same per-AP Gaussian field.
inline RMat sample_shadowing_conditional(const std::vector<Point2> &given_ues, const RMat &given,
                                         const std::vector<Point2> &new_ues, const ShadowingModel &model, Rng &rng)
{
    const auto n_old = static_cast<Eigen::Index>(given_ues.size());
    const auto n_new = static_cast<Eigen::Index>(new_ues.size());
    if (given.rows() != n_old)
        throw ConfigError("sample_shadowing_conditional: given realization has the wrong row count");
    RMat F = RMat::Zero(n_new, given.cols());
    if (n_new == 0 || model.std_db == 0.0)
        return F;
    if (n_old == 0) {
        return sample_shadowing(new_ues, static_cast<std::size_t>(given.cols()), model, rng);
    }
    const double var = model.std_db * model.std_db;
    const RMat c_oo = shadowing_covariance(given_ues, model);
    RMat c_no(n_new, n_old);
    for (Eigen::Index i = 0; i < n_new; ++i)
        for (Eigen::Index j = 0; j < n_old; ++j)
            c_no(i, j) = shadowing_covariance(distance(new_ues[i], given_ues[j]), model);

    const Eigen::LLT<RMat> llt_oo(c_oo + RMat::Identity(n_old, n_old) * (1e-12 * var));
    if (llt_oo.info() != Eigen::Success)
        throw NumericalError("shadowing covariance of the conditioning set is not positive definite");
    const RMat gain = llt_oo.solve(c_no.transpose()).transpose(); // C_no C_oo^-1
    RMat c_cond = shadowing_covariance(new_ues, model) - gain * c_no.transpose();
    c_cond = 0.5 * (c_cond + c_cond.transpose()).eval();
    const RMat chol = detail::shadowing_factor(c_cond, var);

    NormalSampler normal;
    RVec w(n_new);
    for (Eigen::Index l = 0; l < F.cols(); ++l) {
        for (Eigen::Index i = 0; i < n_new; ++i)
            w[i] = normal(rng);
        F.col(l) = gain * given.col(l) + chol * w;
    }
    return F;
}

inline LargeScale large_scale_gains(const std::vector<Point2> &ues, const std::vector<Point2> &aps, const RMat &F,
                                    const ScenarioConfig &config)
{
    if (F.rows() != static_cast<Eigen::Index>(ues.size()) || F.cols() != static_cast<Eigen::Index>(aps.size()))
        throw ConfigError("large_scale_gains: shadowing matrix must be UEs x APs");
    LargeScale ls;
    ls.F = F;
    ls.d.resize(F.rows(), F.cols());
    ls.beta.resize(F.rows(), F.cols());
    for (Eigen::Index k = 0; k < F.rows(); ++k) {
        for (Eigen::Index l = 0; l < F.cols(); ++l) {
            const double d = link_distance(ues[k], aps[l], config.ap_height_m);
            ls.d(k, l) = d;
            ls.beta(k, l) = db_to_linear(pathloss_db(d, config.pathloss) + F(k, l));
        }
    }
    return ls;
}

inline LargeScale large_scale_gains(const Geometry &geometry, const RMat &F, const ScenarioConfig &config)
{
    return large_scale_gains(geometry.ue_positions(), geometry.ap_positions, F, config);
}

} // namespace cfmimo::scenario

#endif
