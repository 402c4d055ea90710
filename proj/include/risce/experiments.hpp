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

#ifndef RISCE_EXPERIMENTS_HPP
#define RISCE_EXPERIMENTS_HPP

#include "risce/channel.hpp"
#include "risce/estimator.hpp"
#include "risce/metrics.hpp"
#include "risce/omp_baseline.hpp"
#include "risce/ris_control.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace risce
{

// Full description of one Monte Carlo sweep. Mirrors the JSON document
// layout; see README for the schema.
struct ExperimentSpec
{
    Index n_bs = 16;
    Index n_ms = 16;
    Index n_ris = 64;
    Index n_rf = 8;
    Index l_br = 2;
    Index l_rm = 2;
    Index n0 = 10;
    Index m0 = 10;
    Index t_blocks = 10;
    std::vector<double> snr_grid_db = {0.0};
    GainProfile profile = GainProfile::homogeneous;
    std::vector<std::string> schemes = {"proposed", "omp", "perfect_csi"};
    Index realizations = 1;
    Index t_coherence = 500;
    std::uint64_t seed = 1;
    SolveOptions<double> solver{};
    std::string config_id = "default";
    std::string output_dir = ".";

    void validate() const; // throws std::invalid_argument naming the field
};

// Schemes understood by run_scheme, in canonical order
const std::vector<std::string> &known_schemes();

ExperimentSpec parse_spec(const std::string &json_text);
ExperimentSpec load_spec(const std::string &path);

// Everything measured on one realization under one scheme. Estimation MSE
// fields are NaN for the genie schemes, which do not estimate anything.
struct SchemeRealization
{
    double mse_theta = 0;
    double mse_phi = 0;
    double mse_delta = 0;
    double mse_rho = 0;
    bool partial = false;
    Index t_train = 0;
    double gain = 0;
    double asd_f = 0;
    double asd_w = 0;
    BeamformerPair<double> pair;
    SeSample<double> se;
};

// One CSV row: the aggregated report plus standard errors of the mean
struct SchemeAggregate
{
    std::string scheme;
    MetricReport<double> report;
    Index t_train = 0;
    double mse_theta_se = 0;
    double mse_phi_se = 0;
    double mse_delta_se = 0;
    double mse_rho_se = 0;
    double asd_f_se = 0;
    double asd_w_se = 0;
    double ris_gain_se = 0;
};

struct ExperimentResult
{
    std::vector<SchemeAggregate> rows;            // grouped by scheme, snr ascending
    std::map<std::string, std::string> csv_paths; // scheme -> written file
};

// Genie baselines; `truth` must come from angle_difference_set(realization)
SchemeRealization scheme_perfect_csi(const ExperimentSpec &spec,
                                     const ChannelRealization<double> &realization,
                                     const AngleDifferenceSet<double> &truth);
SchemeRealization scheme_los_only(const ExperimentSpec &spec,
                                  const ChannelRealization<double> &realization,
                                  const AngleDifferenceSet<double> &truth,
                                  const BeamformerPair<double> &optimal);

// One scheme on one realization. Estimation schemes derive all sounding
// randomness from `sounding_seed`, so schemes sharing a seed see identical
// wide-beam frames. `optimal` is the full-CSI beamformer pair used by the
// ASD metric.
SchemeRealization run_scheme(const std::string &scheme, const ExperimentSpec &spec,
                             const ChannelRealization<double> &realization,
                             const AngleDifferenceSet<double> &truth, double noise_var,
                             std::uint64_t sounding_seed, const BeamformerPair<double> &optimal,
                             const KroneckerDictionary<double> *omp_s1 = nullptr,
                             const GridDictionary<double> *omp_s2 = nullptr);

std::string csv_header();
std::string csv_row(const SchemeAggregate &row, const std::string &config_id);

// Full sweep: per SNR point, `realizations` channels paired across schemes,
// one CSV per scheme under spec.output_dir. Deterministic for a fixed seed.
ExperimentResult run_experiment(const ExperimentSpec &spec, std::ostream *progress = nullptr);

// Re-verifies the frozen derived-value fixtures; prints one line per check,
// returns the number of failures
int run_oracle_fixtures(const std::string &path, std::ostream &out);

} // namespace risce

#endif
