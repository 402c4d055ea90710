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

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace risce
{
namespace
{

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

using nlohmann::json;

[[noreturn]] void fail_field(const std::string &path, const std::string &what)
{
    throw std::invalid_argument("experiment spec: field '" + path + "' " + what);
}

std::string join_path(const std::string &path, const char *key)
{
    return path.empty() ? std::string(key) : path + "." + key;
}

const json &expect_object(const json &j, const std::string &path)
{
    if (!j.is_object())
        fail_field(path.empty() ? "<root>" : path, "must be a JSON object");
    return j;
}

void reject_unknown(const json &j, const std::string &path,
                    std::initializer_list<const char *> allowed)
{
    for (const auto &item : j.items())
    {
        bool known = false;
        for (const char *k : allowed)
            if (item.key() == k)
            {
                known = true;
                break;
            }
        if (!known)
            fail_field(join_path(path, item.key().c_str()), "is not a recognized field");
    }
}

Index get_index(const json &j, const std::string &path, const char *key, Index fallback)
{
    if (!j.contains(key))
        return fallback;
    const json &v = j.at(key);
    if (!v.is_number_integer())
        fail_field(join_path(path, key), "must be an integer");
    return v.get<Index>();
}

std::uint64_t get_u64(const json &j, const std::string &path, const char *key,
                      std::uint64_t fallback)
{
    if (!j.contains(key))
        return fallback;
    const json &v = j.at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && v.get<double>() < 0))
        fail_field(join_path(path, key), "must be a nonnegative integer");
    return v.get<std::uint64_t>();
}

double get_real(const json &j, const std::string &path, const char *key, double fallback)
{
    if (!j.contains(key))
        return fallback;
    const json &v = j.at(key);
    if (!v.is_number())
        fail_field(join_path(path, key), "must be a number");
    return v.get<double>();
}

bool get_bool(const json &j, const std::string &path, const char *key, bool fallback)
{
    if (!j.contains(key))
        return fallback;
    const json &v = j.at(key);
    if (!v.is_boolean())
        fail_field(join_path(path, key), "must be a boolean");
    return v.get<bool>();
}

std::string get_string(const json &j, const std::string &path, const char *key,
                       const std::string &fallback)
{
    if (!j.contains(key))
        return fallback;
    const json &v = j.at(key);
    if (!v.is_string())
        fail_field(join_path(path, key), "must be a string");
    return v.get<std::string>();
}

std::string fmt_g(double v)
{
    if (std::isnan(v))
        return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

struct MeanSe
{
    double mean = kNan;
    double se = kNan;
};

MeanSe mean_se(const std::vector<double> &xs)
{
    const std::size_t n = xs.size();
    if (n == 0)
        return {};
    double sum = 0;
    for (double x : xs)
        sum += x;
    const double mean = sum / double(n);
    if (n < 2)
        return {mean, 0.0};
    double ss = 0;
    for (double x : xs)
        ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / double(n - 1) / double(n))};
}

// Uniform-phase unit vectors used when the reconstructed channel is
// identically zero and an SVD direction is undefined
BeamformerPair<double> safe_beamformers(const CMat<double> &h)
{
    if (h.cwiseAbs().maxCoeff() > 0.0)
        return design_beamformers(h);
    BeamformerPair<double> p;
    p.f = CVec<double>::Constant(h.cols(),
                                 std::complex<double>(1.0 / std::sqrt(double(h.cols())), 0.0));
    p.w = CVec<double>::Constant(h.rows(),
                                 std::complex<double>(1.0 / std::sqrt(double(h.rows())), 0.0));
    return p;
}

void mark_genie(SchemeRealization &rec)
{
    rec.mse_theta = kNan;
    rec.mse_phi = kNan;
    rec.mse_delta = kNan;
    rec.mse_rho = kNan;
    rec.partial = false;
    rec.t_train = 0;
}

SchemeAggregate aggregate_scheme(const std::string &scheme, double snr_db, double noise_var,
                                 const ExperimentSpec &spec,
                                 const std::vector<SchemeRealization> &records)
{
    if (records.empty())
        throw std::logic_error("aggregate_scheme: empty record set");
    const std::size_t n = records.size();
    auto stat = [&](double SchemeRealization::*field) {
        std::vector<double> xs;
        xs.reserve(n);
        for (const SchemeRealization &r : records)
            xs.push_back(r.*field);
        return mean_se(xs);
    };

    SchemeAggregate row;
    row.scheme = scheme;
    row.t_train = records.front().t_train;

    const MeanSe th = stat(&SchemeRealization::mse_theta);
    const MeanSe ph = stat(&SchemeRealization::mse_phi);
    const MeanSe de = stat(&SchemeRealization::mse_delta);
    const MeanSe rh = stat(&SchemeRealization::mse_rho);
    const MeanSe af = stat(&SchemeRealization::asd_f);
    const MeanSe aw = stat(&SchemeRealization::asd_w);
    const MeanSe ga = stat(&SchemeRealization::gain);

    row.report.mse_sin_theta_br = th.mean;
    row.report.mse_sin_phi_rm = ph.mean;
    row.report.mse_sin_delta = de.mean;
    row.report.mse_rho = rh.mean;
    row.report.asd_f = af.mean;
    row.report.asd_w = aw.mean;
    row.report.ris_gain_mean = ga.mean;
    row.report.n_realizations = Index(n);
    row.report.snr_db = snr_db;
    row.mse_theta_se = th.se;
    row.mse_phi_se = ph.se;
    row.mse_delta_se = de.se;
    row.mse_rho_se = rh.se;
    row.asd_f_se = af.se;
    row.asd_w_se = aw.se;
    row.ris_gain_se = ga.se;

    if (n >= 2)
    {
        std::vector<SeSample<double>> ensemble;
        ensemble.reserve(n);
        for (const SchemeRealization &r : records)
            ensemble.push_back(r.se);
        row.report.se_bound =
            effective_se_bound(ensemble, noise_var, row.t_train, spec.t_coherence);
    }
    else
    {
        // Single sample: the error-variance term degenerates to zero
        const SeSample<double> &s = records.front().se;
        const double signal = std::norm((s.w.adjoint() * s.h_hat * s.f)(0));
        const double prefactor =
            double(spec.t_coherence - row.t_train) / double(spec.t_coherence);
        row.report.se_bound = prefactor * std::log2(1.0 + signal / noise_var);
    }
    return row;
}

} // namespace

const std::vector<std::string> &known_schemes()
{
    static const std::vector<std::string> names = {"proposed", "proposed_partial", "omp",
                                                   "perfect_csi", "los_only"};
    return names;
}

void ExperimentSpec::validate() const
{
    auto need = [](bool ok, const char *field, const char *what) {
        if (!ok)
            fail_field(field, what);
    };
    need(n_bs >= 2, "geometry.n_bs", "must be >= 2");
    need(n_ms >= 2, "geometry.n_ms", "must be >= 2");
    need(n_ris >= 2, "geometry.n_ris", "must be >= 2");
    need(n_rf >= 1, "geometry.n_rf", "must be >= 1");
    need(n_rf <= n_ms, "geometry.n_rf", "must not exceed geometry.n_ms");
    need(l_br >= 1, "paths.l_br", "must be >= 1");
    need(l_rm >= 1, "paths.l_rm", "must be >= 1");
    need(2 * l_br <= n_bs && 2 * l_br <= n_ris, "paths.l_br",
         "is too large for the array sizes (angular separation is infeasible)");
    need(2 * l_rm <= n_ms && 2 * l_rm <= n_ris, "paths.l_rm",
         "is too large for the array sizes (angular separation is infeasible)");
    need(l_br * l_rm <= detail::kMaxAlignPaths, "paths",
         "l_br*l_rm exceeds the supported cascaded-path count (8)");
    need(n0 >= 1, "sounding.n0", "must be >= 1");
    need(m0 >= 1, "sounding.m0", "must be >= 1");
    need(t_blocks >= 1, "sounding.t", "must be >= 1");
    need(!snr_grid_db.empty(), "snr_grid_db", "must be nonempty");
    for (double s : snr_grid_db)
        need(std::isfinite(s), "snr_grid_db", "must contain only finite values");
    need(!schemes.empty(), "schemes", "must be nonempty");
    const std::vector<std::string> &known = known_schemes();
    for (std::size_t i = 0; i < schemes.size(); ++i)
    {
        if (std::find(known.begin(), known.end(), schemes[i]) == known.end())
            fail_field("schemes", "contains unknown scheme '" + schemes[i] + "'");
        for (std::size_t k = i + 1; k < schemes.size(); ++k)
            need(schemes[i] != schemes[k], "schemes", "must not contain duplicates");
    }
    if (std::find(schemes.begin(), schemes.end(), "proposed_partial") != schemes.end())
        need(t_blocks >= l_br * l_rm, "sounding.t",
             "must be >= l_br*l_rm for the partial-estimation scheme");
    need(realizations >= 1, "realizations", "must be >= 1");
    need(t_coherence >= 1, "t_coherence", "must be >= 1");
    {
        SoundingConfig<double> cfg{n0, m0, t_blocks, n_rf, 1.0, 0};
        need(training_overhead(cfg, l_br, l_rm) <= t_coherence, "t_coherence",
             "must be at least the training overhead of the sounding configuration");
    }
    need(solver.max_iter >= 1, "solver.max_iter", "must be >= 1");
    need(solver.eps_abs > 0, "solver.eps_abs", "must be > 0");
    need(solver.eps_rel > 0, "solver.eps_rel", "must be > 0");
    need(solver.step > 0, "solver.step", "must be > 0");
    need(!config_id.empty(), "config_id", "must be nonempty");
    for (char c : config_id)
        need((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                 c == '_' || c == '-',
             "config_id", "may contain only letters, digits, '_' and '-'");
    need(!output_dir.empty(), "output_dir", "must be nonempty");
}

ExperimentSpec parse_spec(const std::string &json_text)
{
    json j;
    try
    {
        j = json::parse(json_text);
    }
    catch (const json::parse_error &e)
    {
        throw std::invalid_argument(std::string("experiment spec: not valid JSON: ") + e.what());
    }
    expect_object(j, "");
    reject_unknown(j, "",
                   {"config_id", "output_dir", "seed", "realizations", "t_coherence",
                    "snr_grid_db", "schemes", "geometry", "paths", "sounding", "solver"});

    ExperimentSpec s;
    s.config_id = get_string(j, "", "config_id", s.config_id);
    s.output_dir = get_string(j, "", "output_dir", s.output_dir);
    s.seed = get_u64(j, "", "seed", s.seed);
    s.realizations = get_index(j, "", "realizations", s.realizations);
    s.t_coherence = get_index(j, "", "t_coherence", s.t_coherence);

    if (j.contains("snr_grid_db"))
    {
        const json &arr = j.at("snr_grid_db");
        if (!arr.is_array() || arr.empty())
            fail_field("snr_grid_db", "must be a nonempty array of numbers");
        s.snr_grid_db.clear();
        for (const json &v : arr)
        {
            if (!v.is_number())
                fail_field("snr_grid_db", "must contain only numbers");
            s.snr_grid_db.push_back(v.get<double>());
        }
    }
    if (j.contains("schemes"))
    {
        const json &arr = j.at("schemes");
        if (!arr.is_array() || arr.empty())
            fail_field("schemes", "must be a nonempty array of strings");
        s.schemes.clear();
        for (const json &v : arr)
        {
            if (!v.is_string())
                fail_field("schemes", "must contain only strings");
            s.schemes.push_back(v.get<std::string>());
        }
    }
    if (j.contains("geometry"))
    {
        const json &g = expect_object(j.at("geometry"), "geometry");
        reject_unknown(g, "geometry", {"n_bs", "n_ms", "n_ris", "n_rf"});
        s.n_bs = get_index(g, "geometry", "n_bs", s.n_bs);
        s.n_ms = get_index(g, "geometry", "n_ms", s.n_ms);
        s.n_ris = get_index(g, "geometry", "n_ris", s.n_ris);
        s.n_rf = get_index(g, "geometry", "n_rf", s.n_rf);
    }
    if (j.contains("paths"))
    {
        const json &p = expect_object(j.at("paths"), "paths");
        reject_unknown(p, "paths", {"l_br", "l_rm", "profile"});
        s.l_br = get_index(p, "paths", "l_br", s.l_br);
        s.l_rm = get_index(p, "paths", "l_rm", s.l_rm);
        const std::string profile = get_string(p, "paths", "profile", "homogeneous");
        if (profile == "homogeneous")
            s.profile = GainProfile::homogeneous;
        else if (profile == "inhomogeneous")
            s.profile = GainProfile::inhomogeneous;
        else
            fail_field("paths.profile", "must be 'homogeneous' or 'inhomogeneous'");
    }
    if (j.contains("sounding"))
    {
        const json &snd = expect_object(j.at("sounding"), "sounding");
        reject_unknown(snd, "sounding", {"n0", "m0", "t"});
        s.n0 = get_index(snd, "sounding", "n0", s.n0);
        s.m0 = get_index(snd, "sounding", "m0", s.m0);
        s.t_blocks = get_index(snd, "sounding", "t", s.t_blocks);
    }
    if (j.contains("solver"))
    {
        const json &sol = expect_object(j.at("solver"), "solver");
        reject_unknown(sol, "solver", {"max_iter", "eps_abs", "eps_rel", "step", "trace"});
        const Index iters = get_index(sol, "solver", "max_iter", Index(s.solver.max_iter));
        if (iters < 1 || iters > Index(std::numeric_limits<int>::max()))
            fail_field("solver.max_iter", "is out of range");
        s.solver.max_iter = int(iters);
        s.solver.eps_abs = get_real(sol, "solver", "eps_abs", s.solver.eps_abs);
        s.solver.eps_rel = get_real(sol, "solver", "eps_rel", s.solver.eps_rel);
        s.solver.step = get_real(sol, "solver", "step", s.solver.step);
        s.solver.trace = get_bool(sol, "solver", "trace", s.solver.trace);
    }

    s.validate();
    return s;
}

ExperimentSpec load_spec(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open experiment spec " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_spec(buf.str());
}

SchemeRealization scheme_perfect_csi(const ExperimentSpec &,
                                     const ChannelRealization<double> &realization,
                                     const AngleDifferenceSet<double> &truth)
{
    SchemeRealization rec;
    mark_genie(rec);
    const OmegaDesign<double> design =
        design_omega(truth.gains, truth.freq_diffs, realization.geom_ris);
    CMat<double> h = composite_channel(realization, design.omega);
    rec.pair = safe_beamformers(h);
    rec.gain = ris_gain(realization, design.omega);
    rec.asd_f = 0.0;
    rec.asd_w = 0.0;
    rec.se = SeSample<double>{h, h, rec.pair.f, rec.pair.w};
    return rec;
}

SchemeRealization scheme_los_only(const ExperimentSpec &,
                                  const ChannelRealization<double> &realization,
                                  const AngleDifferenceSet<double> &truth,
                                  const BeamformerPair<double> &optimal)
{
    SchemeRealization rec;
    mark_genie(rec);

    // Strongest cascaded pair; with the inhomogeneous profile this is the
    // leading pair by construction
    Index best = 0;
    for (Index i = 1; i < truth.gains.size(); ++i)
        if (std::abs(truth.gains[i]) > std::abs(truth.gains[best]))
            best = i;
    const Index m = truth.index_map[std::size_t(best)].first;
    const Index n = truth.index_map[std::size_t(best)].second;

    EstimateBundle<double> los;
    los.theta_br_hat = RVec<double>::Constant(1, realization.br.aod[n]);
    los.phi_rm_hat = RVec<double>::Constant(1, realization.rm.aoa[m]);
    los.freq_diff_hat = RVec<double>::Constant(1, truth.freq_diffs[best]);
    los.rho_hat = CVec<double>::Constant(1, truth.gains[best]);
    los.index_map = {{Index(0), Index(0)}};

    const OmegaDesign<double> design =
        design_omega(los.rho_hat, los.freq_diff_hat, realization.geom_ris);
    CMat<double> h_true = composite_channel(realization, design.omega);
    CMat<double> h_hat = reconstruct_composite(los, design.omega, realization.geom_bs,
                                               realization.geom_ris, realization.geom_ms);

    const double nb = double(realization.geom_bs.element_count);
    const double nm = double(realization.geom_ms.element_count);
    rec.pair.f = steering_vector(realization.geom_bs, realization.br.aod[n]) / std::sqrt(nb);
    rec.pair.w = steering_vector(realization.geom_ms, realization.rm.aoa[m]) / std::sqrt(nm);
    rec.gain = ris_gain(realization, design.omega);
    const std::pair<double, double> d = asd(rec.pair, optimal);
    rec.asd_f = d.first;
    rec.asd_w = d.second;
    rec.se = SeSample<double>{std::move(h_true), std::move(h_hat), rec.pair.f, rec.pair.w};
    return rec;
}

SchemeRealization run_scheme(const std::string &scheme, const ExperimentSpec &spec,
                             const ChannelRealization<double> &realization,
                             const AngleDifferenceSet<double> &truth, double noise_var,
                             std::uint64_t sounding_seed, const BeamformerPair<double> &optimal,
                             const KroneckerDictionary<double> *omp_s1,
                             const GridDictionary<double> *omp_s2)
{
    if (scheme == "perfect_csi")
    {
        SchemeRealization rec = scheme_perfect_csi(spec, realization, truth);
        const std::pair<double, double> d = asd(rec.pair, optimal);
        rec.asd_f = d.first;
        rec.asd_w = d.second;
        return rec;
    }
    if (scheme == "los_only")
        return scheme_los_only(spec, realization, truth, optimal);

    SoundingConfig<double> cfg{spec.n0, spec.m0, spec.t_blocks,
                               spec.n_rf, noise_var, sounding_seed};
    Rng sounding_rng(sounding_seed);
    EstimateBundle<double> bundle;
    if (scheme == "proposed")
        bundle = run_full_pipeline(cfg, realization, sounding_rng, spec.solver);
    else if (scheme == "proposed_partial")
        bundle = run_partial_pipeline(cfg, realization, sounding_rng, spec.solver);
    else if (scheme == "omp")
        bundle = run_omp_pipeline(cfg, realization, sounding_rng, omp_s1, omp_s2);
    else
        throw std::invalid_argument("run_scheme: unknown scheme '" + scheme + "'");

    SchemeRealization rec;
    rec.mse_theta = aligned_mse_sines(realization.br.aod, bundle.theta_br_hat);
    rec.mse_phi = aligned_mse_sines(realization.rm.aoa, bundle.phi_rm_hat);
    const DeltaRhoMse<double> dr = aligned_mse_delta_and_rho(bundle, truth);
    rec.mse_delta = dr.mse_sin_delta;
    rec.mse_rho = dr.mse_rho;
    rec.partial = dr.partial;

    const OmegaDesign<double> design =
        design_omega(bundle.rho_hat, bundle.freq_diff_hat, realization.geom_ris);
    CMat<double> h_hat = reconstruct_composite(bundle, design.omega, realization.geom_bs,
                                               realization.geom_ris, realization.geom_ms);
    rec.pair = safe_beamformers(h_hat);
    rec.gain = ris_gain(realization, design.omega);
    const std::pair<double, double> d = asd(rec.pair, optimal);
    rec.asd_f = d.first;
    rec.asd_w = d.second;
    rec.t_train = bundle.overhead;
    rec.se = SeSample<double>{composite_channel(realization, design.omega), std::move(h_hat),
                              rec.pair.f, rec.pair.w};
    return rec;
}

std::string csv_header()
{
    return "scheme,snr_db,config_id,realizations,t_train,se_bound,"
           "mse_sin_theta_br,mse_sin_theta_br_se,mse_sin_phi_rm,mse_sin_phi_rm_se,"
           "mse_sin_delta,mse_sin_delta_se,mse_rho,mse_rho_se,"
           "asd_f,asd_f_se,asd_w,asd_w_se,ris_gain,ris_gain_se";
}

std::string csv_row(const SchemeAggregate &row, const std::string &config_id)
{
    std::string out = row.scheme;
    out += ',';
    out += fmt_g(row.report.snr_db);
    out += ',';
    out += config_id;
    out += ',';
    out += std::to_string(row.report.n_realizations);
    out += ',';
    out += std::to_string(row.t_train);
    for (double v : {row.report.se_bound, row.report.mse_sin_theta_br, row.mse_theta_se,
                     row.report.mse_sin_phi_rm, row.mse_phi_se, row.report.mse_sin_delta,
                     row.mse_delta_se, row.report.mse_rho, row.mse_rho_se, row.report.asd_f,
                     row.asd_f_se, row.report.asd_w, row.asd_w_se, row.report.ris_gain_mean,
                     row.ris_gain_se})
    {
        out += ',';
        out += fmt_g(v);
    }
    return out;
}

ExperimentResult run_experiment(const ExperimentSpec &spec, std::ostream *progress)
{
    spec.validate();
    const ArrayGeometry<double> geom_bs{spec.n_bs, 0.5};
    const ArrayGeometry<double> geom_ris{spec.n_ris, 0.5};
    const ArrayGeometry<double> geom_ms{spec.n_ms, 0.5};

    const bool want_omp =
        std::find(spec.schemes.begin(), spec.schemes.end(), "omp") != spec.schemes.end();
    KroneckerDictionary<double> s1dict;
    GridDictionary<double> s2dict;
    if (want_omp)
    {
        s1dict = build_stage1_dictionary(geom_bs, geom_ms);
        s2dict = build_axis_dictionary(geom_ris);
    }

    const Rng master(spec.seed);
    std::vector<SchemeAggregate> rows;
    rows.reserve(spec.snr_grid_db.size() * spec.schemes.size());

    for (std::size_t si = 0; si < spec.snr_grid_db.size(); ++si)
    {
        const double snr_db = spec.snr_grid_db[si];
        const double noise_var = std::pow(10.0, -snr_db / 10.0);
        std::vector<std::vector<SchemeRealization>> records(spec.schemes.size());
        for (auto &v : records)
            v.reserve(std::size_t(spec.realizations));

        for (Index ri = 0; ri < spec.realizations; ++ri)
        {
            // One channel per (snr index, realization index); all schemes share
            // it and share the sounding seed, so their wide-beam frames match
            const Rng real_rng = master.child(std::uint64_t(si)).child(std::uint64_t(ri));
            Rng channel_rng = real_rng.child(0);
            const std::uint64_t sounding_seed = real_rng.child(1).seed();
            const ChannelRealization<double> realization = sample_realization(
                channel_rng, spec.l_br, spec.l_rm, geom_bs, geom_ris, geom_ms, spec.profile);
            const AngleDifferenceSet<double> truth = angle_difference_set(realization);
            const SchemeRealization perfect = scheme_perfect_csi(spec, realization, truth);

            for (std::size_t k = 0; k < spec.schemes.size(); ++k)
            {
                const std::string &scheme = spec.schemes[k];
                try
                {
                    records[k].push_back(
                        scheme == "perfect_csi"
                            ? perfect
                            : run_scheme(scheme, spec, realization, truth, noise_var,
                                         sounding_seed, perfect.pair,
                                         want_omp ? &s1dict : nullptr,
                                         want_omp ? &s2dict : nullptr));
                }
                catch (const std::exception &e)
                {
                    std::ostringstream oss;
                    oss << "scheme '" << scheme << "' at snr " << snr_db << " dB, realization "
                        << ri << ": " << e.what();
                    throw std::runtime_error(oss.str());
                }
            }
        }

        for (std::size_t k = 0; k < spec.schemes.size(); ++k)
            rows.push_back(
                aggregate_scheme(spec.schemes[k], snr_db, noise_var, spec, records[k]));
        if (progress)
            *progress << "[risce] snr " << snr_db << " dB: " << spec.realizations
                      << " realization(s) x " << spec.schemes.size() << " scheme(s) done"
                      << std::endl;
    }

    std::stable_sort(rows.begin(), rows.end(),
                     [](const SchemeAggregate &a, const SchemeAggregate &b) {
                         return a.report.snr_db < b.report.snr_db;
                     });

    ExperimentResult result;
    namespace fs = std::filesystem;
    fs::create_directories(spec.output_dir);
    for (const std::string &scheme : spec.schemes)
    {
        const fs::path path = fs::path(spec.output_dir) / (spec.config_id + "_" + scheme + ".csv");
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot open output file " + path.string());
        out << csv_header() << "\n";
        for (const SchemeAggregate &row : rows)
            if (row.scheme == scheme)
            {
                out << csv_row(row, spec.config_id) << "\n";
                result.rows.push_back(row);
            }
        out.flush();
        if (!out)
            throw std::runtime_error("failed while writing " + path.string());
        result.csv_paths[scheme] = path.string();
    }
    return result;
}

int run_oracle_fixtures(const std::string &path, std::ostream &out)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open fixture file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    json j;
    try
    {
        j = json::parse(buf.str());
    }
    catch (const json::parse_error &e)
    {
        throw std::runtime_error(std::string("fixture file is not valid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("checks") || !j.at("checks").is_array())
        throw std::runtime_error("fixture file must contain a 'checks' array");

    int failures = 0;
    int idx = 0;
    for (const json &c : j.at("checks"))
    {
        ++idx;
        std::string label = "check " + std::to_string(idx);
        bool pass = false;
        std::string detail;
        try
        {
            const std::string kind = c.at("kind").get<std::string>();
            label = c.value("label", kind + " " + std::to_string(idx));
            if (kind == "overhead")
            {
                SoundingConfig<double> cfg{c.at("n0").get<Index>(), c.at("m0").get<Index>(),
                                           c.at("t").get<Index>(), c.at("n_rf").get<Index>(),
                                           1.0, 0};
                const Index got = training_overhead(cfg, c.at("l_br").get<Index>(),
                                                    c.at("l_rm").get<Index>());
                const Index want = c.at("expect").get<Index>();
                pass = (got == want);
                detail = "got " + std::to_string(got) + " want " + std::to_string(want);
            }
            else if (kind == "reg_weight")
            {
                RegConstants<double> consts;
                consts.stage2 = c.value("constant", 1.0);
                const double got =
                    regularization_weight(RegKind::stage2, c.at("sigma2").get<double>(),
                                          c.at("dim").get<Index>(), consts);
                const double want = c.at("expect").get<double>();
                const double tol = c.value("tol", 1e-12);
                pass = std::abs(got - want) <= tol;
                detail = "got " + fmt_g(got) + " want " + fmt_g(want);
            }
            else if (kind == "dirichlet")
            {
                const Index n = c.at("n").get<Index>();
                const CVec<double> a = harmonic_atom(n, c.at("f1").get<double>());
                const CVec<double> b = harmonic_atom(n, c.at("f2").get<double>());
                const double got = std::abs((a.adjoint() * b)(0));
                const double want = c.at("expect").get<double>();
                const double tol = c.value("tol", 1e-12);
                pass = std::abs(got - want) <= tol;
                detail = "got " + fmt_g(got) + " want " + fmt_g(want);
            }
            else if (kind == "wrap_gap")
            {
                const double got = detail::wrap_sine_gap(c.at("x").get<double>());
                const double want = c.at("expect").get<double>();
                const double tol = c.value("tol", 1e-12);
                pass = std::abs(got - want) <= tol;
                detail = "got " + fmt_g(got) + " want " + fmt_g(want);
            }
            else if (kind == "steering_entry")
            {
                const ArrayGeometry<double> geom{c.at("n").get<Index>(),
                                                 c.at("spacing").get<double>()};
                const CVec<double> a = steering_vector(geom, c.at("angle").get<double>());
                const Index k = c.at("k").get<Index>();
                if (k < 0 || k >= a.size())
                    throw std::runtime_error("element index out of range");
                const double tol = c.value("tol", 1e-12);
                const double re = c.at("re").get<double>();
                const double im = c.at("im").get<double>();
                pass = std::abs(a[k].real() - re) <= tol && std::abs(a[k].imag() - im) <= tol;
                detail = "got (" + fmt_g(a[k].real()) + ", " + fmt_g(a[k].imag()) + ") want (" +
                         fmt_g(re) + ", " + fmt_g(im) + ")";
            }
            else if (kind == "index_flat")
            {
                const auto map = detail::full_index_map<double>(c.at("l_rm").get<Index>(),
                                                                c.at("l_br").get<Index>());
                const Index flat = c.at("flat").get<Index>();
                const Index m = c.at("m").get<Index>();
                const Index n = c.at("n").get<Index>();
                pass = flat >= 0 && flat < Index(map.size()) &&
                       map[std::size_t(flat)].first == m && map[std::size_t(flat)].second == n;
                if (flat >= 0 && flat < Index(map.size()))
                    detail = "got (" + std::to_string(map[std::size_t(flat)].first) + ", " +
                             std::to_string(map[std::size_t(flat)].second) + ") want (" +
                             std::to_string(m) + ", " + std::to_string(n) + ")";
                else
                    detail = "flat index out of range";
            }
            else
            {
                detail = "unknown check kind '" + kind + "'";
            }
        }
        catch (const std::exception &e)
        {
            pass = false;
            detail = std::string("malformed check: ") + e.what();
        }
        if (pass)
        {
            out << "[PASS] " << label << "\n";
        }
        else
        {
            out << "[FAIL] " << label << ": " << detail << "\n";
            ++failures;
        }
    }
    return failures;
}

} // namespace risce
