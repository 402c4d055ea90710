// risce - RIS-aided mmWave MIMO channel estimation and simulation library
// Copyright (C) 2026 The risce authors
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

#include "risce/experiments.hpp"

#include "CLI11.hpp"

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

int main(int argc, char **argv)
{
    CLI::App app{"risce: RIS-aided mmWave MIMO channel estimation simulator"};
    app.require_subcommand(1);

    // ---- run ------------------------------------------------------------
    CLI::App *run = app.add_subcommand("run", "Run a Monte Carlo experiment from a JSON spec");
    std::string spec_path;
    std::uint64_t seed = 0;
    long realizations = 0;
    std::string output_dir;
    std::string config_id;
    std::vector<double> snr_grid;
    std::vector<std::string> schemes;
    bool trace = false;
    bool quiet = false;
    run->add_option("spec", spec_path, "Experiment spec (JSON file)")
        ->required()
        ->check(CLI::ExistingFile);
    run->add_option("--seed", seed, "Override the spec's seed");
    run->add_option("--realizations", realizations, "Override the spec's realization count")
        ->check(CLI::PositiveNumber);
    run->add_option("--output-dir", output_dir, "Override the spec's output directory");
    run->add_option("--config-id", config_id, "Override the spec's config id");
    run->add_option("--snr", snr_grid, "Override the SNR grid (dB, repeatable)");
    run->add_option("--schemes", schemes, "Override the scheme list (repeatable)");
    run->add_flag("--trace", trace, "Enable solver iteration traces on stderr");
    run->add_flag("--quiet", quiet, "Suppress progress output");
    run->callback([&] {
        risce::ExperimentSpec spec = risce::load_spec(spec_path);
        if (run->count("--seed"))
            spec.seed = seed;
        if (run->count("--realizations"))
            spec.realizations = realizations;
        if (run->count("--output-dir"))
            spec.output_dir = output_dir;
        if (run->count("--config-id"))
            spec.config_id = config_id;
        if (run->count("--snr"))
            spec.snr_grid_db = snr_grid;
        if (run->count("--schemes"))
            spec.schemes = schemes;
        if (trace)
            spec.solver.trace = true;
        const risce::ExperimentResult result =
            risce::run_experiment(spec, quiet ? nullptr : &std::cerr);
        for (const auto &[scheme, path] : result.csv_paths)
            std::cout << scheme << " -> " << path << "\n";
    });

    // ---- oracle ---------------------------------------------------------
    CLI::App *oracle =
        app.add_subcommand("oracle", "Re-verify the frozen derived-value fixtures");
    std::string fixture_path;
    oracle->add_option("fixture", fixture_path, "Fixture file (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    oracle->callback([&] {
        const int failures = risce::run_oracle_fixtures(fixture_path, std::cout);
        if (failures > 0)
            throw CLI::RuntimeError("oracle", 1);
        std::cout << "all fixtures verified\n";
    });

    // ---- overhead -------------------------------------------------------
    CLI::App *overhead =
        app.add_subcommand("overhead", "Print the training overhead of a sounding configuration");
    long n0 = 10, m0 = 10, t_blocks = 10, n_rf = 8, l_br = 2, l_rm = 2;
    overhead->add_option("--n0", n0, "Stage-1 pilot count")->check(CLI::PositiveNumber);
    overhead->add_option("--m0", m0, "Stage-1 combiner count")->check(CLI::PositiveNumber);
    overhead->add_option("--t", t_blocks, "Stage-2 block count")->check(CLI::PositiveNumber);
    overhead->add_option("--n-rf", n_rf, "Receive RF chains")->check(CLI::PositiveNumber);
    overhead->add_option("--l-br", l_br, "BS-RIS path count")->check(CLI::PositiveNumber);
    overhead->add_option("--l-rm", l_rm, "RIS-MS path count")->check(CLI::PositiveNumber);
    overhead->callback([&] {
        risce::SoundingConfig<double> cfg{n0, m0, t_blocks, n_rf, 1.0, 0};
        std::cout << risce::training_overhead(cfg, l_br, l_rm) << "\n";
    });

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        return app.exit(e);
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
