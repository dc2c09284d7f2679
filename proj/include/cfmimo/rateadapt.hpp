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

#ifndef CFMIMO_RATEADAPT_HPP
#define CFMIMO_RATEADAPT_HPP

#include "cfmimo/core/error.hpp"
#include "cfmimo/core/stats.hpp"
#include "cfmimo/igsum/gil_pelaez.hpp"
#include "cfmimo/igsum/inverse_gamma.hpp"
#include "cfmimo/receiver.hpp"
#include "cfmimo/simulation.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <span>
#include <vector>

namespace cfmimo::rateadapt {

using receiver::SinrDecomposition;

enum class Method { proposed, fixed_margin };

inline const char *to_string(Method m) { return m == Method::proposed ? "proposed" : "fixed-margin"; }

struct OutagePolicy {
    double epsilon = 0.0;   ///< target (proposed) or 0 (baseline)
    double T = 0.0;         ///< SINR threshold, linear
    double R = 0.0;         ///< SE, bits/s/Hz
    Method method = Method::proposed;
    double margin_db = 0.0; ///< baseline only
};

/// Distribution of the unknown interference power a^H diag(IUI) a. A model
/// without components is the point mass at zero.
class InterferenceModel {
public:
    InterferenceModel() = default;

    InterferenceModel(const igsum::IgMixture &mixture, const igsum::QuadratureSpec &quad)
        : grid_(std::make_shared<const igsum::CharacteristicGrid>(mixture, quad))
    {
    }

    bool degenerate() const { return grid_ == nullptr; }
    const igsum::CharacteristicGrid *grid() const { return grid_.get(); }

    double cdf(double y) const
    {
        if (degenerate())
            return y >= 0.0 ? 1.0 : 0.0;
        return grid_->cdf(y);
    }

    double quantile(double p) const { return degenerate() ? 0.0 : grid_->quantile(p); }

private:
    std::shared_ptr<const igsum::CharacteristicGrid> grid_;
};

/// Pr[SINR <= T] = 1 - F_IUI(|DS|^2 / T - IUSI - a^H F a).
inline double outage_probability(const SinrDecomposition &d, const InterferenceModel &model, double T)
{
    if (!(T > 0.0))
        throw ConfigError("outage_probability: threshold must be positive");
    const double y = std::norm(d.DS) / T - d.IUSI - d.noise_term;
    if (!(y > 0.0))
        return 1.0;
    return 1.0 - model.cdf(y);
}

inline double outage_probability(const SinrDecomposition &d, const igsum::IgMixture &mixture, double T,
                                 const igsum::QuadratureSpec &quad = {})
{
    return outage_probability(d, InterferenceModel(mixture, quad), T);
}

inline OutagePolicy make_policy(double T, double prelog, Method method)
{
    OutagePolicy p;
    p.T = T;
    p.R = prelog * std::log2(1.0 + T);
    p.method = method;
    return p;
}

inline OutagePolicy epsilon_outage_policy(const SinrDecomposition &d, const InterferenceModel &model, double epsilon,
                                          double prelog)
{
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw ConfigError("epsilon_outage_policy: epsilon must lie in (0, 1)");
    const double T = std::norm(d.DS) / (model.quantile(1.0 - epsilon) + d.IUSI + d.noise_term);
    OutagePolicy p = make_policy(T, prelog, Method::proposed);
    p.epsilon = epsilon;
    return p;
}

inline OutagePolicy epsilon_outage_policy(const SinrDecomposition &d, const igsum::IgMixture &mixture, double epsilon,
                                          double prelog, const igsum::QuadratureSpec &quad = {})
{
    return epsilon_outage_policy(d, InterferenceModel(mixture, quad), epsilon, prelog);
}

/// Unknown-interference-free SINR divided by a fixed margin.
inline OutagePolicy baseline_margin_policy(const SinrDecomposition &d, double margin_db, double prelog)
{
    if (!(margin_db >= 0.0))
        throw ConfigError("baseline_margin_policy: margin must be >= 0 dB");
    const double m = db_to_linear(margin_db);
    OutagePolicy p = make_policy(std::norm(d.DS) / ((d.IUSI + d.noise_term) * m), prelog, Method::fixed_margin);
    p.margin_db = margin_db;
    return p;
}

struct ProcedureConfig {
    receiver::MonteCarloConfig mc;
    std::size_t n_fit_drops = 200;
    double epsilon = 0.05;
    igsum::QuadratureSpec quad;
    unsigned threads = 1;
};

struct ProcedureResult {
    receiver::CombinedChannelStats reference; ///< known-UE statistics averaged over the fitting drops
    SinrDecomposition decomposition;          ///< IUI_true left at zero: unknown to the receiver
    RMat iui_samples;                         ///< fitting drops x serving APs
    RVec mu;
    RVec variance;
    igsum::IgMixture mixture;
    InterferenceModel model;
    OutagePolicy policy;
    std::vector<double> diagonality; ///< per fitting drop, simulator-side diagnostic

    CVec a() const { return decomposition.a; }
};

/// Step 1: per-AP unknown power over the fitting drops. Step 2: moments.
/// Step 3: Inverse-Gamma fit per AP, weighted by |a_l|^2. Step 4: threshold.
inline ProcedureResult run_procedure(const sim::Scenario &sc, const ProcedureConfig &cfg)
{
    if (cfg.n_fit_drops < 2)
        throw ConfigError("run_procedure: at least two fitting drops are needed");
    const auto drops = sim::simulate_drops(sc, cfg.mc, Stream::fit_drops, cfg.n_fit_drops, cfg.threads);
    const std::size_t Ls = sc.num_serving();

    ProcedureResult res;
    std::vector<receiver::CombinedChannelStats> known;
    known.reserve(drops.size());
    res.iui_samples.resize(static_cast<Eigen::Index>(drops.size()), static_cast<Eigen::Index>(Ls));
    for (std::size_t d = 0; d < drops.size(); ++d) {
        known.push_back(drops[d].known);
        res.iui_samples.row(static_cast<Eigen::Index>(d)) = drops[d].unknown_power().transpose();
        res.diagonality.push_back(receiver::diagonality_ratio(drops[d].unknown_cov));
    }
    res.reference = receiver::average_stats(known);
    const CVec a = receiver::lsfd_weights(res.reference);
    res.decomposition = receiver::sinr_decomposition(res.reference, a, CMat());

    res.mu.resize(static_cast<Eigen::Index>(Ls));
    res.variance.resize(static_cast<Eigen::Index>(Ls));
    for (std::size_t l = 0; l < Ls; ++l) {
        const auto li = static_cast<Eigen::Index>(l);
        std::vector<double> col(res.iui_samples.rows());
        for (Eigen::Index d = 0; d < res.iui_samples.rows(); ++d)
            col[static_cast<std::size_t>(d)] = res.iui_samples(d, li);
        const SampleMoments m = sample_moments(col);
        res.mu[li] = m.mean;
        res.variance[li] = m.variance;
        if (m.mean > 0.0 && m.variance > 0.0) {
            igsum::IgComponent c = igsum::fit_inverse_gamma(m.mean, m.variance);
            c.weight = res.decomposition.weights_sq[li];
            res.mixture.components.push_back(c);
        }
    }
    bool any = false;
    for (const auto &c : res.mixture.components)
        any = any || c.weight > 0.0;
    if (any)
        res.model = InterferenceModel(res.mixture, cfg.quad);
    res.policy = epsilon_outage_policy(res.decomposition, res.model, cfg.epsilon, sc.config.prelog());
    return res;
}

/// Omniscient outcome of one validation drop under the policy's fusion
/// weights. `sinr` keeps DS, IUSI and the processed noise at the quasi-static
/// values the CPU uses and takes the drop's exact unknown interference
/// a^H U a; `sinr_per_drop` re-evaluates every term on the drop, including the
/// change in DS and IUSI caused by unknown UEs contaminating the pilots.
struct ValidationSample {
    double sinr = 0.0;
    double sinr_per_drop = 0.0;
    double sinr_diag = 0.0; ///< as `sinr` with U reduced to its diagonal
    double iui_true = 0.0;
    double iui_diag = 0.0;
    double ds2 = 0.0;  ///< per-drop |DS|^2
    double iusi = 0.0; ///< per-drop IUSI
    double noise = 0.0;
    double diagonality = 0.0;
};

inline ValidationSample evaluate_drop(const receiver::DropStatistics &d, const SinrDecomposition &reference)
{
    ValidationSample v;
    const SinrDecomposition dec = receiver::sinr_decomposition(d.known, reference.a, d.unknown_cov);
    const double ds2 = std::norm(reference.DS);
    const double base = reference.IUSI + reference.noise_term;
    v.iui_true = dec.IUI_true;
    v.iui_diag = (dec.weights_sq.array() * d.unknown_power().array()).sum();
    v.sinr = ds2 / (v.iui_true + base);
    v.sinr_diag = ds2 / (v.iui_diag + base);
    v.sinr_per_drop = dec.sinr();
    v.ds2 = std::norm(dec.DS);
    v.iusi = dec.IUSI;
    v.noise = dec.noise_term;
    v.diagonality = receiver::diagonality_ratio(d.unknown_cov);
    return v;
}

inline std::vector<ValidationSample> validation_samples(const sim::Scenario &sc, const receiver::MonteCarloConfig &mc,
                                                        const SinrDecomposition &reference, std::size_t n_drops,
                                                        unsigned threads, Stream stream = Stream::validation_drops)
{
    std::vector<ValidationSample> out(n_drops);
    parallel_for(n_drops, threads, [&](std::size_t i) {
        out[i] = evaluate_drop(sim::simulate_indexed_drop(sc, mc, stream, i), reference);
    });
    return out;
}

/// Fraction of drops whose SINR falls below T, with a Wilson 95% interval.
inline ProportionEstimate empirical_outage(double T, std::span<const ValidationSample> drops)
{
    std::size_t hits = 0;
    for (const auto &d : drops)
        hits += d.sinr < T ? 1 : 0;
    return wilson_interval(hits, drops.size());
}

inline ProportionEstimate empirical_outage(const OutagePolicy &policy, const sim::Scenario &sc,
                                           const receiver::MonteCarloConfig &mc, const SinrDecomposition &reference,
                                           std::size_t n_drops, unsigned threads)
{
    if (n_drops < 100)
        throw ConfigError("empirical_outage: at least 100 drops are needed");
    const auto drops = validation_samples(sc, mc, reference, n_drops, threads);
    return empirical_outage(policy.T, drops);
}

} // namespace cfmimo::rateadapt

#endif
