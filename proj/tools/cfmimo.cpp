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

// Command-line experiment runner.
//
//   cfmimo --config run.json --experiment outage-curve --out results --threads 8

#include "cfmimo/config.hpp"
#include "cfmimo/core/parallel.hpp"
#include "cfmimo/experiment.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

namespace {

enum ExitCode { ok = 0, config_error = 2, numerical_error = 3, check_failed = 4, io_error = 1 };

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Cell-free massive MIMO unknown-interference modeling and outage-constrained rate adaptation"};
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string experiment;
    std::string out_dir;
    unsigned threads = cfmimo::default_thread_count();
    app.add_option("--config", config_path, "JSON experiment file (omitted fields take their defaults)");
    app.add_option("--seed", seed, "RNG seed (overrides scenario.seed)");
    app.add_option("--experiment", experiment,
                   "sinr-cdf | outage-curve | oracle-check | scenario-dump | diag-covariance");
    app.add_option("--out", out_dir, "output directory (overrides output_dir)");
    app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? ok : config_error;
    }

    try {
        cfmimo::config::ExperimentSpec spec =
            config_path.empty() ? cfmimo::config::parse_config_text("") : cfmimo::config::parse_config(config_path);
        if (seed)
            spec.scenario.seed = *seed;
        if (!experiment.empty())
            spec.experiment = cfmimo::config::parse_experiment(experiment);
        if (!out_dir.empty())
            spec.output_dir = out_dir;
        spec.validate();

        const auto res = cfmimo::experiment::run(spec, threads, std::cerr);
        for (const auto &f : res.files)
            std::cout << f.string() << '\n';
        return res.exit_code;
    } catch (const cfmimo::ConfigError &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const cfmimo::NumericalError &e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return numerical_error;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return io_error;
    }
}
