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

#ifndef CFMIMO_CONFIG_HPP
#define CFMIMO_CONFIG_HPP

#include "cfmimo/core/error.hpp"
#include "cfmimo/igsum/gil_pelaez.hpp"
#include "cfmimo/receiver.hpp"
#include "cfmimo/scenario.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace cfmimo::config {

using json = nlohmann::json;
using scenario::DesiredPreset;
using scenario::ScenarioConfig;

enum class Experiment { sinr_cdf, outage_curve, oracle_check, scenario_dump, diag_covariance };

inline const char *to_string(Experiment e)
{
    switch (e) {
    case Experiment::sinr_cdf: return "sinr-cdf";
    case Experiment::outage_curve: return "outage-curve";
    case Experiment::oracle_check: return "oracle-check";
    case Experiment::scenario_dump: return "scenario-dump";
    case Experiment::diag_covariance: return "diag-covariance";
    }
    return "?";
}

inline Experiment parse_experiment(const std::string &name)
{
    for (Experiment e : {Experiment::sinr_cdf, Experiment::outage_curve, Experiment::oracle_check,
                         Experiment::scenario_dump, Experiment::diag_covariance})
        if (name == to_string(e))
            return e;
    throw ConfigError("unknown experiment '" + name +
                      "' (expected sinr-cdf, outage-curve, oracle-check, scenario-dump or diag-covariance)");
}

struct SimulationSettings {
    std::size_t n_mc = 200;
    receiver::SamplingMode sampling = receiver::SamplingMode::conditional;
    receiver::EstimationMode estimation = receiver::EstimationMode::mmse;
    std::size_t n_fit_drops = 200;
    std::size_t n_validation_drops = 2000;
    std::size_t n_diag_drops = 50;
    std::size_t cdf_points = 201;
};

/// Single-component Inverse-Gamma case checked against the incomplete gamma function.
struct OracleSettings {
    double alpha = 3.0;
    double beta = 2.0;
    double weight = 1.0;
    std::size_t points = 200;
    double tolerance = 1e-4;
};

struct ExperimentSpec {
    ScenarioConfig scenario;
    CombinerKind combiner = CombinerKind::rzf;
    Experiment experiment = Experiment::sinr_cdf;
    std::vector<std::size_t> k_u_list{50, 100};
    std::vector<double> epsilon_list{0.01, 0.05, 0.1};
    std::vector<double> margin_db_list{3.0, 6.0, 10.0, 13.0};
    std::vector<DesiredPreset> presets{DesiredPreset::center, DesiredPreset::edge};
    std::filesystem::path output_dir = "out";
    SimulationSettings simulation;
    igsum::QuadratureSpec quadrature;
    OracleSettings oracle;

    void validate() const
    {
        scenario.validate();
        quadrature.validate();
        if (k_u_list.empty() || epsilon_list.empty() || margin_db_list.empty() || presets.empty())
            throw ConfigError("k_u_list, epsilon_list, margin_db_list and presets must be non-empty");
        for (double e : epsilon_list)
            if (!(e > 0.0 && e < 1.0))
                throw ConfigError("epsilon_list: every target must lie in (0, 1)");
        for (double m : margin_db_list)
            if (!(m >= 0.0) || !std::isfinite(m))
                throw ConfigError("margin_db_list: margins must be finite and >= 0 dB");
        if (simulation.n_mc < 1)
            throw ConfigError("simulation.n_mc must be >= 1");
        if (simulation.n_fit_drops < 2)
            throw ConfigError("simulation.n_fit_drops must be >= 2");
        if (simulation.n_validation_drops < 100)
            throw ConfigError("simulation.n_validation_drops must be >= 100");
        if (simulation.n_diag_drops < 1)
            throw ConfigError("simulation.n_diag_drops must be >= 1");
        if (simulation.cdf_points < 2)
            throw ConfigError("simulation.cdf_points must be >= 2");
        if (!(oracle.alpha > 2.0) || !(oracle.beta > 0.0) || !(oracle.weight > 0.0))
            throw ConfigError("oracle: need alpha > 2, beta > 0, weight > 0");
        if (oracle.points < 2 || !(oracle.tolerance > 0.0))
            throw ConfigError("oracle: need points >= 2 and a positive tolerance");
    }

    receiver::MonteCarloConfig monte_carlo(CombinerKind kind) const
    {
        receiver::MonteCarloConfig mc;
        mc.combiner = kind;
        mc.n_mc = simulation.n_mc;
        mc.sampling = simulation.sampling;
        mc.estimation = simulation.estimation;
        return mc;
    }
};

namespace detail {

/// Walks one JSON object, remembering which keys were consumed so that
/// leftovers can be reported with their full path.
class ObjectReader {
public:
    ObjectReader(const json &j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object())
            throw ConfigError(where("") + ": expected an object");
    }

    bool has(const char *key) const { return j_.contains(key); }

    template <typename T> void read(const char *key, T &out)
    {
        if (!j_.contains(key))
            return;
        seen_.insert(key);
        const json &v = j_.at(key);
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean())
                throw ConfigError(where(key) + ": expected a boolean");
        } else if constexpr (std::is_unsigned_v<T>) {
            if (!v.is_number_unsigned())
                throw ConfigError(where(key) + ": expected a non-negative integer");
        } else if constexpr (std::is_arithmetic_v<T>) {
            if (!v.is_number())
                throw ConfigError(where(key) + ": expected a number");
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string())
                throw ConfigError(where(key) + ": expected a string");
        }
        out = v.get<T>();
    }

    template <typename T> void read_list(const char *key, std::vector<T> &out)
    {
        if (!j_.contains(key))
            return;
        seen_.insert(key);
        const json &v = j_.at(key);
        if (!v.is_array())
            throw ConfigError(where(key) + ": expected an array");
        std::vector<T> tmp;
        for (std::size_t i = 0; i < v.size(); ++i) {
            const std::string item = where(key) + "[" + std::to_string(i) + "]";
            if constexpr (std::is_unsigned_v<T>) {
                if (!v[i].is_number_unsigned())
                    throw ConfigError(item + ": expected a non-negative integer");
            } else if constexpr (std::is_arithmetic_v<T>) {
                if (!v[i].is_number())
                    throw ConfigError(item + ": expected a number");
            } else {
                if (!v[i].is_string())
                    throw ConfigError(item + ": expected a string");
            }
            tmp.push_back(v[i].get<T>());
        }
        out = std::move(tmp);
    }

    ObjectReader child(const char *key)
    {
        seen_.insert(key);
        return ObjectReader(j_.at(key), where(key));
    }

    void finish() const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key()))
                throw ConfigError("unknown key '" + where(it.key()) + "'");
    }

    std::string where(const std::string &key) const
    {
        if (key.empty())
            return path_.empty() ? "<root>" : path_;
        return path_.empty() ? key : path_ + "." + key;
    }

private:
    const json &j_;
    std::string path_;
    std::set<std::string> seen_;
};

inline DesiredPreset parse_preset(const std::string &s, const std::string &path)
{
    if (s == "center")
        return DesiredPreset::center;
    if (s == "edge")
        return DesiredPreset::edge;
    throw ConfigError(path + ": expected \"center\" or \"edge\", got \"" + s + "\"");
}

inline CombinerKind parse_combiner(const std::string &s, const std::string &path)
{
    if (s == "MR" || s == "mr")
        return CombinerKind::mr;
    if (s == "RZF" || s == "rzf")
        return CombinerKind::rzf;
    throw ConfigError(path + ": expected \"MR\" or \"RZF\", got \"" + s + "\"");
}

inline void read_scenario(ObjectReader r, ScenarioConfig &c)
{
    r.read("L", c.L);
    r.read("L_s", c.L_s);
    r.read("N", c.N);
    r.read("K_n", c.K_n);
    r.read("K_u", c.K_u);
    r.read("p_mw", c.p_mw);
    r.read("noise_power_dbm", c.noise_dbm);
    r.read("tau_c", c.tau_c);
    r.read("tau_p", c.tau_p);
    r.read("serving_radius_m", c.serving_radius_m);
    if (r.has("annulus_m")) {
        std::vector<double> a;
        r.read_list("annulus_m", a);
        if (a.size() != 2)
            throw ConfigError(r.where("annulus_m") + ": expected [r_min, r_max]");
        c.annulus_min_m = a[0];
        c.annulus_max_m = a[1];
    }
    r.read("ap_height_m", c.ap_height_m);
    if (r.has("pathloss")) {
        ObjectReader p = r.child("pathloss");
        p.read("intercept_db", c.pathloss.intercept_db);
        p.read("exponent_decades", c.pathloss.exponent_decades);
        p.finish();
    }
    if (r.has("shadowing")) {
        ObjectReader s = r.child("shadowing");
        s.read("std_db", c.shadowing.std_db);
        s.read("decorrelation_m", c.shadowing.decorrelation_m);
        s.finish();
    }
    if (r.has("neighbors")) {
        ObjectReader n = r.child("neighbors");
        n.read("clusters", c.neighbors.clusters);
        n.read("ring_radius_m", c.neighbors.ring_radius_m);
        n.read("spread_m", c.neighbors.spread_m);
        n.finish();
    }
    if (r.has("desired")) {
        std::string s;
        r.read("desired", s);
        c.desired = parse_preset(s, r.where("desired"));
    }
    r.read("center_offset_m", c.center_offset_m);
    r.read("edge_radius_m", c.edge_radius_m);
    if (r.has("correlation")) {
        ObjectReader k = r.child("correlation");
        if (k.has("model")) {
            std::string s;
            k.read("model", s);
            if (s == "local-scattering")
                c.correlation = scenario::CorrelationModel::local_scattering;
            else if (s == "uncorrelated")
                c.correlation = scenario::CorrelationModel::uncorrelated;
            else
                throw ConfigError(k.where("model") + ": expected \"local-scattering\" or \"uncorrelated\"");
        }
        k.read("asd_deg", c.asd_deg);
        k.finish();
    }
    r.read("seed", c.seed);
    r.finish();
}

} // namespace detail

/// Builds a spec from a parsed document. Omitted fields keep their defaults
/// (the network parameters of the reference setup); unknown keys and type
/// mismatches are rejected with their path.
inline ExperimentSpec spec_from_json(const json &doc)
{
    ExperimentSpec spec;
    if (doc.is_null()) {
        spec.validate();
        return spec;
    }
    detail::ObjectReader r(doc, "");
    if (r.has("experiment")) {
        std::string s;
        r.read("experiment", s);
        spec.experiment = parse_experiment(s);
    }
    if (r.has("combiner")) {
        std::string s;
        r.read("combiner", s);
        spec.combiner = detail::parse_combiner(s, "combiner");
    }
    r.read_list("k_u_list", spec.k_u_list);
    r.read_list("epsilon_list", spec.epsilon_list);
    r.read_list("margin_db_list", spec.margin_db_list);
    if (r.has("presets")) {
        std::vector<std::string> names;
        r.read_list("presets", names);
        spec.presets.clear();
        for (std::size_t i = 0; i < names.size(); ++i)
            spec.presets.push_back(detail::parse_preset(names[i], "presets[" + std::to_string(i) + "]"));
    }
    if (r.has("output_dir")) {
        std::string s;
        r.read("output_dir", s);
        spec.output_dir = s;
    }
    if (r.has("scenario"))
        detail::read_scenario(r.child("scenario"), spec.scenario);
    if (r.has("simulation")) {
        detail::ObjectReader s = r.child("simulation");
        auto &sim = spec.simulation;
        s.read("n_mc", sim.n_mc);
        if (s.has("sampling")) {
            std::string v;
            s.read("sampling", v);
            if (v == "conditional")
                sim.sampling = receiver::SamplingMode::conditional;
            else if (v == "full")
                sim.sampling = receiver::SamplingMode::full;
            else
                throw ConfigError("simulation.sampling: expected \"conditional\" or \"full\"");
        }
        if (s.has("estimation")) {
            std::string v;
            s.read("estimation", v);
            if (v == "mmse")
                sim.estimation = receiver::EstimationMode::mmse;
            else if (v == "perfect")
                sim.estimation = receiver::EstimationMode::perfect;
            else
                throw ConfigError("simulation.estimation: expected \"mmse\" or \"perfect\"");
        }
        s.read("n_fit_drops", sim.n_fit_drops);
        s.read("n_validation_drops", sim.n_validation_drops);
        s.read("n_diag_drops", sim.n_diag_drops);
        s.read("cdf_points", sim.cdf_points);
        s.finish();
    }
    if (r.has("quadrature")) {
        detail::ObjectReader q = r.child("quadrature");
        q.read("n_points", spec.quadrature.n_points);
        q.read("t_max", spec.quadrature.t_max);
        q.read("decay_tol", spec.quadrature.decay_tol);
        q.finish();
    }
    if (r.has("oracle")) {
        detail::ObjectReader o = r.child("oracle");
        o.read("alpha", spec.oracle.alpha);
        o.read("beta", spec.oracle.beta);
        o.read("weight", spec.oracle.weight);
        o.read("points", spec.oracle.points);
        o.read("tolerance", spec.oracle.tolerance);
        o.finish();
    }
    r.finish();
    spec.validate();
    return spec;
}

inline ExperimentSpec parse_config_text(const std::string &text)
{
    if (text.find_first_not_of(" \t\r\n") == std::string::npos)
        return spec_from_json(json());
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error &e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return spec_from_json(doc);
}

inline ExperimentSpec parse_config(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot open config file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

/// Fully resolved spec; feeding it back to spec_from_json gives the same spec.
inline json to_json(const ExperimentSpec &spec)
{
    const auto &c = spec.scenario;
    json sc = {
        {"L", c.L},
        {"L_s", c.L_s},
        {"N", c.N},
        {"K_n", c.K_n},
        {"K_u", c.K_u},
        {"p_mw", c.p_mw},
        {"noise_power_dbm", c.noise_dbm},
        {"tau_c", c.tau_c},
        {"tau_p", c.tau_p},
        {"serving_radius_m", c.serving_radius_m},
        {"annulus_m", {c.annulus_min_m, c.annulus_max_m}},
        {"ap_height_m", c.ap_height_m},
        {"pathloss", {{"intercept_db", c.pathloss.intercept_db}, {"exponent_decades", c.pathloss.exponent_decades}}},
        {"shadowing", {{"std_db", c.shadowing.std_db}, {"decorrelation_m", c.shadowing.decorrelation_m}}},
        {"neighbors",
         {{"clusters", c.neighbors.clusters},
          {"ring_radius_m", c.neighbors.ring_radius_m},
          {"spread_m", c.neighbors.spread_m}}},
        {"desired", scenario::to_string(c.desired)},
        {"center_offset_m", c.center_offset_m},
        {"edge_radius_m", c.edge_radius_m},
        {"correlation", {{"model", scenario::to_string(c.correlation)}, {"asd_deg", c.asd_deg}}},
        {"seed", c.seed},
    };
    json presets = json::array();
    for (auto p : spec.presets)
        presets.push_back(scenario::to_string(p));
    const auto &s = spec.simulation;
    return {
        {"experiment", to_string(spec.experiment)},
        {"combiner", to_string(spec.combiner)},
        {"k_u_list", spec.k_u_list},
        {"epsilon_list", spec.epsilon_list},
        {"margin_db_list", spec.margin_db_list},
        {"presets", presets},
        {"output_dir", spec.output_dir.string()},
        {"scenario", sc},
        {"simulation",
         {{"n_mc", s.n_mc},
          {"sampling", s.sampling == receiver::SamplingMode::conditional ? "conditional" : "full"},
          {"estimation", s.estimation == receiver::EstimationMode::mmse ? "mmse" : "perfect"},
          {"n_fit_drops", s.n_fit_drops},
          {"n_validation_drops", s.n_validation_drops},
          {"n_diag_drops", s.n_diag_drops},
          {"cdf_points", s.cdf_points}}},
        {"quadrature",
         {{"n_points", spec.quadrature.n_points},
          {"t_max", spec.quadrature.t_max},
          {"decay_tol", spec.quadrature.decay_tol}}},
        {"oracle",
         {{"alpha", spec.oracle.alpha},
          {"beta", spec.oracle.beta},
          {"weight", spec.oracle.weight},
          {"points", spec.oracle.points},
          {"tolerance", spec.oracle.tolerance}}},
    };
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string &s)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return h;
}

/// Hash of everything that influences results (the output directory does not).
inline std::uint64_t config_hash(const ExperimentSpec &spec)
{
    json j = to_json(spec);
    j.erase("output_dir");
    return fnv1a(j.dump());
}

} // namespace cfmimo::config

#endif
