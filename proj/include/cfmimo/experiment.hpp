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

#ifndef CFMIMO_EXPERIMENT_HPP
#define CFMIMO_EXPERIMENT_HPP

#include "cfmimo/config.hpp"
#include "cfmimo/core/stats.hpp"
#include "cfmimo/rateadapt.hpp"
#include "cfmimo/simulation.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace cfmimo::experiment {

using config::ExperimentSpec;
using scenario::DesiredPreset;

// ---------------------------------------------------------------------------
// Output helpers

inline std::string provenance_line(const ExperimentSpec &spec)
{
    char buf[96];
    std::snprintf(buf, sizeof buf, "# config_hash=%016llx seed=%llu\n",
                  static_cast<unsigned long long>(config::config_hash(spec)),
                  static_cast<unsigned long long>(spec.scenario.seed));
    return buf;
}

/// Writes through a temporary file in the same directory and renames it into
/// place, so readers never observe a partial file.
inline void write_atomic(const std::filesystem::path &path, const std::string &content)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out)
            throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

/// CSV text with a provenance comment and a header row.
class Csv {
public:
    Csv(const ExperimentSpec &spec, std::initializer_list<const char *> columns)
    {
        out_ << provenance_line(spec);
        bool first = true;
        for (const char *c : columns) {
            out_ << (first ? "" : ",") << c;
            first = false;
        }
        out_ << '\n';
        out_ << std::setprecision(10);
    }

    template <typename... Ts> void row(const Ts &...values)
    {
        bool first = true;
        ((out_ << (first ? "" : ",") << values, first = false), ...);
        out_ << '\n';
    }

    std::string str() const { return out_.str(); }

private:
    std::ostringstream out_;
};

// ---------------------------------------------------------------------------
// One (K_u, desired preset, combiner) configuration: fit on fresh drops, then
// validate on a disjoint set of drops.

struct Cell {
    std::size_t k_u = 0;
    DesiredPreset preset = DesiredPreset::center;
    CombinerKind combiner = CombinerKind::rzf;
    scenario::ScenarioConfig config;
    rateadapt::ProcedureResult fit;
    std::vector<rateadapt::ValidationSample> validation;
    std::vector<double> fit_ks; ///< per serving AP: KS of the fitted IG law on its own fitting samples

    double prelog() const { return config.prelog(); }

    /// Pr[SINR <= T] predicted by the fitted model.
    double model_cdf(double T) const
    {
        if (!(T > 0.0))
            return 0.0;
        return rateadapt::outage_probability(fit.decomposition, fit.model, T);
    }
};

inline scenario::ScenarioConfig cell_config(const ExperimentSpec &spec, std::size_t k_u, DesiredPreset preset)
{
    scenario::ScenarioConfig c = spec.scenario;
    c.K_u = k_u;
    c.desired = preset;
    return c;
}

/// F(x) = Q(alpha, beta / x) for X ~ IG(alpha, beta).
inline double ig_cdf(const igsum::IgComponent &c, double x)
{
    return x > 0.0 ? boost::math::gamma_q(c.alpha, c.beta / x) : 0.0;
}

inline Cell run_cell(const ExperimentSpec &spec, std::size_t k_u, DesiredPreset preset, CombinerKind combiner,
                     unsigned threads)
{
    Cell cell;
    cell.k_u = k_u;
    cell.preset = preset;
    cell.combiner = combiner;
    cell.config = cell_config(spec, k_u, preset);
    const sim::Scenario sc = sim::make_scenario(cell.config);

    rateadapt::ProcedureConfig pc;
    pc.mc = spec.monte_carlo(combiner);
    pc.n_fit_drops = spec.simulation.n_fit_drops;
    pc.epsilon = spec.epsilon_list.front();
    pc.quad = spec.quadrature;
    pc.quad.threads = threads;
    pc.threads = threads;
    cell.fit = rateadapt::run_procedure(sc, pc);

    std::size_t comp = 0;
    for (Eigen::Index l = 0; l < cell.fit.iui_samples.cols(); ++l) {
        if (!(cell.fit.mu[l] > 0.0 && cell.fit.variance[l] > 0.0)) {
            cell.fit_ks.push_back(0.0);
            continue;
        }
        const auto &c = cell.fit.mixture.components[comp++];
        std::vector<double> col(cell.fit.iui_samples.rows());
        for (Eigen::Index d = 0; d < cell.fit.iui_samples.rows(); ++d)
            col[static_cast<std::size_t>(d)] = cell.fit.iui_samples(d, l);
        cell.fit_ks.push_back(ks_distance(col, [&](double x) { return ig_cdf(c, x); }));
    }

    cell.validation = rateadapt::validation_samples(sc, pc.mc, cell.fit.decomposition,
                                                    spec.simulation.n_validation_drops, threads);
    return cell;
}

struct CellSummary {
    double ks = 0.0;          ///< model CDF vs Monte Carlo CDF of the SINR
    double ks_diag = 0.0;     ///< same, Monte Carlo SINR with the unknown covariance reduced to its diagonal
    double ks_per_drop = 0.0; ///< same, Monte Carlo SINR with every term re-evaluated per drop
    double median_sinr_db = 0.0;
    double mean_diagonality = 0.0;
};

inline CellSummary summarize(const Cell &cell)
{
    CellSummary s;
    std::vector<double> sinr, diag, per_drop;
    double dg = 0.0;
    for (const auto &v : cell.validation) {
        sinr.push_back(v.sinr);
        diag.push_back(v.sinr_diag);
        per_drop.push_back(v.sinr_per_drop);
        dg += v.diagonality;
    }
    auto F = [&](double T) { return cell.model_cdf(T); };
    s.ks = ks_distance(sinr, F);
    s.ks_diag = ks_distance(diag, F);
    s.ks_per_drop = ks_distance(per_drop, F);
    std::sort(sinr.begin(), sinr.end());
    const std::size_t n = sinr.size();
    const double median = n % 2 ? sinr[n / 2] : 0.5 * (sinr[n / 2 - 1] + sinr[n / 2]);
    s.median_sinr_db = linear_to_db(median);
    s.mean_diagonality = dg / static_cast<double>(n);
    return s;
}

struct OutageRow {
    rateadapt::OutagePolicy policy;
    ProportionEstimate achieved;
};

/// Proposed policy at every target and fixed-margin baseline at every margin,
/// each scored on the cell's validation drops.
inline std::vector<OutageRow> outage_rows(const Cell &cell, const ExperimentSpec &spec)
{
    std::vector<OutageRow> rows;
    for (double eps : spec.epsilon_list) {
        OutageRow r;
        r.policy = rateadapt::epsilon_outage_policy(cell.fit.decomposition, cell.fit.model, eps, cell.prelog());
        r.achieved = rateadapt::empirical_outage(r.policy.T, cell.validation);
        rows.push_back(r);
    }
    for (double m : spec.margin_db_list) {
        OutageRow r;
        r.policy = rateadapt::baseline_margin_policy(cell.fit.decomposition, m, cell.prelog());
        r.achieved = rateadapt::empirical_outage(r.policy.T, cell.validation);
        rows.push_back(r);
    }
    return rows;
}

inline config::json policy_json(const Cell &cell, const std::vector<OutageRow> &rows)
{
    using config::json;
    const auto &f = cell.fit;
    json aps = json::array();
    std::size_t comp = 0;
    for (Eigen::Index l = 0; l < f.mu.size(); ++l) {
        json ap = {{"mu", f.mu[l]},
                   {"v", f.variance[l]},
                   {"weight", f.decomposition.weights_sq[l]},
                   {"lsfd_re", f.decomposition.a[l].real()},
                   {"lsfd_im", f.decomposition.a[l].imag()},
                   {"fit_ks", cell.fit_ks[static_cast<std::size_t>(l)]}};
        if (f.mu[l] > 0.0 && f.variance[l] > 0.0) {
            ap["alpha"] = f.mixture.components[comp].alpha;
            ap["beta"] = f.mixture.components[comp].beta;
            ++comp;
        } else {
            ap["alpha"] = nullptr;
            ap["beta"] = nullptr;
        }
        aps.push_back(ap);
    }
    json policies = json::array();
    for (const auto &r : rows) {
        policies.push_back({{"method", rateadapt::to_string(r.policy.method)},
                            {"epsilon", r.policy.epsilon},
                            {"margin_db", r.policy.margin_db},
                            {"T", r.policy.T},
                            {"T_db", linear_to_db(r.policy.T)},
                            {"R", r.policy.R},
                            {"achieved_outage", r.achieved.value},
                            {"ci_lo", r.achieved.ci_lo},
                            {"ci_hi", r.achieved.ci_hi}});
    }
    return {{"k_u", cell.k_u},
            {"preset", scenario::to_string(cell.preset)},
            {"combiner", to_string(cell.combiner)},
            {"prelog", cell.prelog()},
            {"ds2", std::norm(f.decomposition.DS)},
            {"iusi", f.decomposition.IUSI},
            {"noise_term", f.decomposition.noise_term},
            {"aps", aps},
            {"policies", policies}};
}

// ---------------------------------------------------------------------------
// Runners

struct RunResult {
    int exit_code = 0;
    std::vector<std::filesystem::path> files;
};

inline void write_file(RunResult &res, const ExperimentSpec &spec, const char *name, const std::string &content)
{
    const auto path = spec.output_dir / name;
    write_atomic(path, content);
    res.files.push_back(path);
}

inline RunResult run_sinr_cdf(const ExperimentSpec &spec, unsigned threads, std::ostream &log)
{
    Csv curve(spec, {"k_u", "preset", "combiner", "sinr_db", "cdf_analytic", "cdf_montecarlo", "cdf_montecarlo_per_drop"});
    Csv summary(spec, {"k_u", "preset", "combiner", "drops", "ks", "ks_diag", "ks_per_drop", "median_sinr_db",
                       "mean_diagonality"});
    for (std::size_t k_u : spec.k_u_list)
        for (DesiredPreset preset : spec.presets)
            for (CombinerKind comb : {CombinerKind::mr, CombinerKind::rzf}) {
                const Cell cell = run_cell(spec, k_u, preset, comb, threads);
                std::vector<double> qs, pd;
                for (const auto &v : cell.validation) {
                    qs.push_back(linear_to_db(v.sinr));
                    pd.push_back(linear_to_db(v.sinr_per_drop));
                }
                std::sort(qs.begin(), qs.end());
                std::sort(pd.begin(), pd.end());
                const double lo = std::floor(std::min(qs.front(), pd.front())) - 2.0;
                const double hi = std::ceil(std::max(qs.back(), pd.back())) + 1.0;
                const std::size_t n = spec.simulation.cdf_points;
                for (std::size_t i = 0; i < n; ++i) {
                    const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
                    curve.row(k_u, scenario::to_string(preset), to_string(comb), x, cell.model_cdf(db_to_linear(x)),
                              empirical_cdf(qs, x), empirical_cdf(pd, x));
                }
                const CellSummary s = summarize(cell);
                summary.row(k_u, scenario::to_string(preset), to_string(comb), cell.validation.size(), s.ks, s.ks_diag,
                            s.ks_per_drop, s.median_sinr_db, s.mean_diagonality);
                log << "sinr-cdf K_u=" << k_u << ' ' << scenario::to_string(preset) << ' ' << to_string(comb)
                    << ": KS=" << s.ks << " median=" << s.median_sinr_db << " dB\n";
            }
    RunResult res;
    write_file(res, spec, "sinr_cdf.csv", curve.str());
    write_file(res, spec, "sinr_cdf_summary.csv", summary.str());
    return res;
}

inline RunResult run_outage_curve(const ExperimentSpec &spec, unsigned threads, std::ostream &log)
{
    Csv csv(spec, {"k_u", "preset", "combiner", "method", "epsilon", "margin_db", "threshold_db", "se",
                   "achieved_outage", "ci_lo", "ci_hi", "drops"});
    config::json policies = config::json::array();
    for (std::size_t k_u : spec.k_u_list)
        for (DesiredPreset preset : spec.presets) {
            const Cell cell = run_cell(spec, k_u, preset, spec.combiner, threads);
            const auto rows = outage_rows(cell, spec);
            for (const auto &r : rows) {
                csv.row(k_u, scenario::to_string(preset), to_string(spec.combiner), rateadapt::to_string(r.policy.method),
                        r.policy.epsilon, r.policy.margin_db, linear_to_db(r.policy.T), r.policy.R, r.achieved.value,
                        r.achieved.ci_lo, r.achieved.ci_hi, r.achieved.trials);
                log << "outage-curve K_u=" << k_u << ' ' << scenario::to_string(preset) << ' '
                    << rateadapt::to_string(r.policy.method) << ' '
                    << (r.policy.method == rateadapt::Method::proposed ? r.policy.epsilon : r.policy.margin_db)
                    << ": SE=" << r.policy.R << " achieved=" << r.achieved.value << '\n';
            }
            policies.push_back(policy_json(cell, rows));
        }
    RunResult res;
    write_file(res, spec, "outage_curve.csv", csv.str());
    std::ostringstream hash;
    hash << std::hex << std::setw(16) << std::setfill('0') << config::config_hash(spec);
    const config::json doc = {{"config_hash", hash.str()}, {"seed", spec.scenario.seed}, {"cells", policies}};
    write_file(res, spec, "policy.json", doc.dump(2) + "\n");
    return res;
}

struct OracleOutcome {
    double max_abs_diff = 0.0;
    bool passed = false;
};

/// Single weighted component: Gil-Pelaez CDF against Q(alpha, w beta / x) on
/// x-points spanning the 0.001..0.999 quantiles.
inline OracleOutcome oracle_check(const ExperimentSpec &spec, unsigned threads, std::string *csv_out = nullptr)
{
    const auto &o = spec.oracle;
    igsum::IgComponent c = igsum::IgComponent::from_shape_scale(o.alpha, o.beta, o.weight);
    igsum::IgMixture m{{c}};
    igsum::QuadratureSpec quad = spec.quadrature;
    quad.threads = threads;
    const igsum::CharacteristicGrid grid(m, quad);
    std::vector<double> x(o.points);
    for (std::size_t i = 0; i < o.points; ++i) {
        const double p = 0.001 + 0.998 * static_cast<double>(i) / static_cast<double>(o.points - 1);
        x[i] = o.weight * o.beta / boost::math::gamma_q_inv(o.alpha, p);
    }
    const igsum::CdfResult F = grid.cdf(x);
    Csv csv(spec, {"x", "F_gilpelaez", "F_oracle", "abs_diff"});
    OracleOutcome out;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double ref = boost::math::gamma_q(o.alpha, o.weight * o.beta / x[i]);
        const double d = std::abs(F.values[i] - ref);
        out.max_abs_diff = std::max(out.max_abs_diff, d);
        csv.row(x[i], F.values[i], ref, d);
    }
    out.passed = out.max_abs_diff <= o.tolerance;
    if (csv_out)
        *csv_out = csv.str();
    return out;
}

inline RunResult run_oracle_check(const ExperimentSpec &spec, unsigned threads, std::ostream &log)
{
    std::string csv;
    const OracleOutcome o = oracle_check(spec, threads, &csv);
    RunResult res;
    write_file(res, spec, "oracle_check.csv", csv);
    log << "oracle-check: max |F_gilpelaez - F_oracle| = " << o.max_abs_diff << " (tolerance " << spec.oracle.tolerance
        << ") " << (o.passed ? "PASS" : "FAIL") << '\n';
    res.exit_code = o.passed ? 0 : 4;
    return res;
}

/// Site map plus the unknown UEs of the first validation drop.
inline RunResult run_scenario_dump(const ExperimentSpec &spec, unsigned, std::ostream &log)
{
    const sim::Scenario sc = sim::make_scenario(spec.scenario);
    Rng rng = make_rng(spec.scenario.seed, Stream::validation_drops, 0);
    const sim::Drop drop = sim::draw_drop(sc, rng);
    const auto &g = sc.geometry;
    Csv csv(spec, {"entity", "id", "x", "y", "role"});
    std::vector<bool> serving(g.ap_positions.size(), false);
    for (std::size_t l : g.serving_set)
        serving[l] = true;
    for (std::size_t l = 0; l < g.ap_positions.size(); ++l)
        csv.row("ap", l, g.ap_positions[l].x, g.ap_positions[l].y, serving[l] ? "serving" : "neighbor");
    std::size_t id = 0;
    for (std::size_t k = 0; k < g.known_ue_positions.size(); ++k, ++id)
        csv.row("ue", id, g.known_ue_positions[k].x, g.known_ue_positions[k].y,
                k == g.desired_ue_index ? "desired" : "known");
    for (const auto &p : drop.unknown_positions)
        csv.row("ue", id++, p.x, p.y, "unknown");
    RunResult res;
    write_file(res, spec, "geometry.csv", csv.str());
    log << "scenario-dump: " << g.ap_positions.size() << " APs, " << id << " UEs\n";
    return res;
}

struct DiagSummary {
    std::string layout;
    std::size_t k_u = 0;
    DesiredPreset preset = DesiredPreset::center;
    double mean_ratio = 0.0;
    double mean_coherence = 0.0;
};

/// Off-diagonal structure of the unknown-interference covariance over
/// `n_diag_drops` drops, for the regular layout and the adversarial one.
inline std::vector<DiagSummary> diag_covariance(const ExperimentSpec &spec, unsigned threads, Csv *csv = nullptr)
{
    const receiver::MonteCarloConfig mc = spec.monte_carlo(spec.combiner);
    const std::size_t n = spec.simulation.n_diag_drops;
    std::vector<DiagSummary> out;
    auto evaluate = [&](const sim::Scenario &sc, const std::string &layout) {
        const auto drops = sim::simulate_drops(sc, mc, Stream::diagnostic_drops, n, threads);
        DiagSummary s;
        s.layout = layout;
        s.k_u = sc.config.K_u;
        s.preset = sc.config.desired;
        for (std::size_t d = 0; d < drops.size(); ++d) {
            const CMat &U = drops[d].unknown_cov;
            const double ratio = receiver::diagonality_ratio(U);
            const double coh = receiver::cross_coherence(U);
            s.mean_ratio += ratio / static_cast<double>(n);
            s.mean_coherence += coh / static_cast<double>(n);
            if (csv) {
                double off = 0.0;
                for (Eigen::Index l = 0; l < U.rows(); ++l)
                    for (Eigen::Index m = 0; m < U.cols(); ++m)
                        if (l != m)
                            off = std::max(off, std::abs(U(l, m)));
                csv->row(layout, s.k_u, scenario::to_string(s.preset), to_string(spec.combiner), d, ratio, coh,
                         U.diagonal().real().minCoeff(), off);
            }
        }
        out.push_back(s);
    };
    for (std::size_t k_u : spec.k_u_list) {
        for (DesiredPreset preset : spec.presets)
            evaluate(sim::make_scenario(cell_config(spec, k_u, preset)), "default");
        evaluate(sim::make_adversarial_scenario(cell_config(spec, k_u, DesiredPreset::edge)), "adversarial");
    }
    return out;
}

inline RunResult run_diag_covariance(const ExperimentSpec &spec, unsigned threads, std::ostream &log)
{
    Csv csv(spec, {"layout", "k_u", "preset", "combiner", "drop", "diagonality_ratio", "cross_coherence", "min_diag",
                   "max_offdiag"});
    for (const auto &s : diag_covariance(spec, threads, &csv))
        log << "diag-covariance " << s.layout << " K_u=" << s.k_u << ' ' << scenario::to_string(s.preset)
            << ": mean ratio=" << s.mean_ratio << " mean coherence=" << s.mean_coherence << '\n';
    RunResult res;
    write_file(res, spec, "diag_covariance.csv", csv.str());
    return res;
}

/// Runs the configured experiment and writes its files (plus the resolved
/// configuration) into spec.output_dir.
inline RunResult run(const ExperimentSpec &spec, unsigned threads, std::ostream &log)
{
    spec.validate();
    RunResult res;
    switch (spec.experiment) {
    case config::Experiment::sinr_cdf: res = run_sinr_cdf(spec, threads, log); break;
    case config::Experiment::outage_curve: res = run_outage_curve(spec, threads, log); break;
    case config::Experiment::oracle_check: res = run_oracle_check(spec, threads, log); break;
    case config::Experiment::scenario_dump: res = run_scenario_dump(spec, threads, log); break;
    case config::Experiment::diag_covariance: res = run_diag_covariance(spec, threads, log); break;
    }
    write_file(res, spec, "config.json", config::to_json(spec).dump(2) + "\n");
    return res;
}

} // namespace cfmimo::experiment

#endif
