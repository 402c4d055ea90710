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

#ifndef RISCE_ESTIMATOR_HPP
#define RISCE_ESTIMATOR_HPP

#include "risce/anm.hpp"
#include "risce/sounding.hpp"
#include "risce/spectral.hpp"
#include "risce/toeplitz.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace risce
{

// Compact per-solve convergence record
template <typename S = double>
struct SolveDiagnostics
{
    int iterations = 0;
    S primal_residual = S(0);
    S dual_residual = S(0);
    bool converged = false;
};

template <typename S = double>
struct Stage1Estimate
{
    RVec<S> theta_br_hat;                       // BS-side departure angles, ascending
    RVec<S> phi_rm_hat;                         // MS-side arrival angles, ascending
    std::vector<SolveDiagnostics<S>> diagnostics; // MS-side solve, then BS-side solve
};

template <typename S = double>
struct Stage2Estimate
{
    RVec<S> freq_diff_hat; // directional-sine differences wrapped to [-1, 1)
    CVec<S> rho_hat;       // cascaded gain products
    std::vector<SolveDiagnostics<S>> diagnostics;
};

// Everything downstream phase design and metrics need from one estimation run
template <typename S = double>
struct EstimateBundle
{
    RVec<S> theta_br_hat;
    RVec<S> phi_rm_hat;
    RVec<S> freq_diff_hat;
    CVec<S> rho_hat;
    std::vector<std::pair<Index, Index>> index_map; // flat index -> (m, n)
    std::vector<SolveDiagnostics<S>> diagnostics;
    Index overhead = 0;
};

namespace detail
{

template <typename S>
SolveDiagnostics<S> diag_of(const ToeplitzSdpSolution<S> &sol)
{
    return SolveDiagnostics<S>{sol.iterations, sol.primal_residual, sol.dual_residual,
                               sol.converged};
}

// Directional sine of an extracted normalized frequency, clamped to the
// physical range (clamping can only engage for spacing below one half)
template <typename S>
S freq_to_sine(S freq, S spacing)
{
    if (!(spacing > S(0)))
        throw std::invalid_argument("freq_to_sine: spacing must be > 0");
    return std::clamp(freq / spacing, S(-1), S(1));
}

// Frequencies from the recovered Toeplitz factor, polished against the raw
// frame data (the convex solve identifies the support set; the polish removes
// its numerical floor), then mapped to ascending physical angles
template <typename S>
RVec<S> angles_from_solution(const CVec<S> &u1, Index order, S spacing,
                             const CMat<S> &observations, const CMat<S> &measurement)
{
    RVec<S> freqs = extract_frequencies(toeplitz_from_row(u1), order);
    freqs = refine_frequencies(freqs, observations, measurement);
    std::sort(freqs.begin(), freqs.end());
    RVec<S> angles(order);
    for (Index l = 0; l < order; ++l)
        angles[l] = std::asin(freq_to_sine(freqs[l], spacing));
    return angles;
}

// Coarse projection scan: the frequency whose effective atom captures the
// most energy of one measurement row (used to re-seed rows the convex stage
// failed to explain)
template <typename S>
S best_grid_frequency(const CVec<S> &y, const CMat<S> &omega_bar)
{
    const Index n_r = omega_bar.cols();
    const Index grid = 8 * n_r;
    S best_f = S(0), best_gain = S(-1);
    for (Index g = 0; g < grid; ++g)
    {
        const S f = S(-0.5) + S(g) / S(grid);
        CVec<S> e = omega_bar * harmonic_atom<S>(n_r, f);
        const S ee = e.squaredNorm();
        if (!(ee > S(0)))
            continue;
        const S gain = std::norm((e.adjoint() * y)(0)) / ee;
        if (gain > best_gain)
        {
            best_gain = gain;
            best_f = f;
        }
    }
    return best_f;
}

} // namespace detail

// Stage 1: two decoupled MMV recoveries on the wide-beam frame. The received
// block (sensed by the combiner) localizes the MS-side arrival sines; its
// adjoint (sensed by the conjugate pilots) localizes the BS-side departure
// sines. Outputs are sorted ascending.
template <typename S>
Stage1Estimate<S> stage1_estimate(const SoundingFrame<S> &frame0, const SoundingConfig<S> &cfg,
                                  Index l_br, Index l_rm, const ArrayGeometry<S> &geom_bs,
                                  const ArrayGeometry<S> &geom_ms,
                                  const SolveOptions<S> &opts = {},
                                  const RegConstants<S> &consts = {})
{
    cfg.validate();
    if (l_br < 1 || l_rm < 1)
        throw std::invalid_argument("stage1_estimate: path counts must be >= 1");
    const Index n_b = geom_bs.element_count;
    const Index n_m = geom_ms.element_count;
    if (frame0.pilots.rows() != n_b || frame0.combiner.rows() != n_m)
        throw std::invalid_argument("stage1_estimate: frame does not match the geometries");

    Stage1Estimate<S> out;

    ToeplitzSdpProblem<S> ms;
    ms.Y = frame0.received;
    ms.A = frame0.combiner.adjoint();
    ms.amb_dim = n_m;
    ms.reg = regularization_weight(RegKind::stage1_ms, cfg.noise_var, n_m, consts);
    ToeplitzSdpSolution<S> ms_sol = solve(ms, opts);
    out.phi_rm_hat =
        detail::angles_from_solution(ms_sol.u1, l_rm, geom_ms.spacing_ratio, ms.Y, ms.A);
    out.diagnostics.push_back(detail::diag_of(ms_sol));

    ToeplitzSdpProblem<S> bs;
    bs.Y = frame0.received.adjoint();
    bs.A = frame0.pilots.adjoint();
    bs.amb_dim = n_b;
    bs.reg = regularization_weight(RegKind::stage1_bs, cfg.noise_var, n_b, consts);
    ToeplitzSdpSolution<S> bs_sol = solve(bs, opts);
    out.theta_br_hat =
        detail::angles_from_solution(bs_sol.u1, l_br, geom_bs.spacing_ratio, bs.Y, bs.A);
    out.diagnostics.push_back(detail::diag_of(bs_sol));

    return out;
}

// Stage 2: one SMV recovery per cascaded path row; frequency from the
// Toeplitz factor polished against the raw row. Gain products come from a
// per-row least-squares fit of the polished atom to that row, with the other
// rows' well-separated atoms as nuisance columns so cross-beam leakage does
// not bias the fit.
template <typename S>
Stage2Estimate<S> stage2_estimate(const CMat<S> &y_rows, const CMat<S> &omega_bar,
                                  const SoundingConfig<S> &cfg, S scale, S ris_spacing,
                                  const SolveOptions<S> &opts = {},
                                  const RegConstants<S> &consts = {})
{
    cfg.validate();
    if (y_rows.cols() != omega_bar.rows())
        throw std::invalid_argument("stage2_estimate: row length must match measurement count");
    if (!(ris_spacing > S(0)))
        throw std::invalid_argument("stage2_estimate: ris_spacing must be > 0");
    const Index n_r = omega_bar.cols();
    const Index count = y_rows.rows();

    Stage2Estimate<S> out;
    out.freq_diff_hat.resize(count);
    out.rho_hat.resize(count);
    const Index t_meas = omega_bar.rows();
    const S reg = regularization_weight(RegKind::stage2, cfg.noise_var, n_r, consts);
    RVec<S> freqs_hat(count);     // per-row frequencies, pre-wrap
    std::vector<CVec<S>> latents; // denoised latents, kept for the degenerate fallback
    latents.reserve(std::size_t(count));
    std::vector<Index> live; // rows whose recovered factor carries signal
    for (Index i = 0; i < count; ++i)
    {
        ToeplitzSdpProblem<S> problem;
        problem.Y = y_rows.row(i).transpose();
        problem.A = omega_bar;
        problem.amb_dim = n_r;
        problem.scale = scale;
        problem.reg = reg;
        ToeplitzSdpSolution<S> sol = solve(problem, opts);
        out.diagnostics.push_back(detail::diag_of(sol));

        const S data_floor = S(1e-13) * std::max(S(1), problem.Y.cwiseAbs().maxCoeff());
        freqs_hat[i] = S(0);
        if (sol.u1.cwiseAbs().maxCoeff() > data_floor)
        {
            freqs_hat[i] = extract_frequencies(toeplitz_from_row(sol.u1), 1)[0];
            live.push_back(i);
        }
        latents.push_back(sol.U_hat.col(0));
    }

    // Joint polish over the live rows: every row carries the same tone set
    // (each through its own beam pair), so the refinement is one multi-snapshot
    // fit. Running it in frequency-sorted canonical order keeps the result
    // invariant to row permutations.
    auto joint_polish = [&]() {
        if (live.empty())
            return;
        std::vector<Index> order = live;
        std::stable_sort(order.begin(), order.end(),
                         [&](Index a, Index b) { return freqs_hat[a] < freqs_hat[b]; });
        RVec<S> init(Index(order.size()));
        CMat<S> obs(t_meas, Index(order.size()));
        for (Index c = 0; c < Index(order.size()); ++c)
        {
            init[c] = freqs_hat[order[std::size_t(c)]];
            obs.col(c) = y_rows.row(order[std::size_t(c)]).transpose();
        }
        RVec<S> polished = refine_frequencies(init, obs, omega_bar);
        for (Index c = 0; c < Index(order.size()); ++c)
            freqs_hat[order[std::size_t(c)]] = polished[c];
    };
    joint_polish();

    // A nearly flat convex stage (vanishing regularization with few
    // measurements) can stall on a data-consistent point whose Toeplitz factor
    // is uninformative; the polish cannot travel far from such a seed. Any row
    // whose own atom still fails to explain it is re-seeded from a coarse
    // projection scan and the joint polish repeated.
    bool reseeded = false;
    for (Index idx : live)
    {
        const CVec<S> y = y_rows.row(idx).transpose();
        const S y_norm = y.norm();
        if (!(y_norm > S(0)))
            continue;
        auto misfit = [&](S f) {
            CVec<S> e = omega_bar * harmonic_atom<S>(n_r, f);
            const S ee = e.squaredNorm();
            if (!(ee > S(0)))
                return y_norm;
            return (y - e * ((e.adjoint() * y)(0) / ee)).norm();
        };
        if (misfit(freqs_hat[idx]) <= S(0.35) * y_norm)
            continue;
        RVec<S> seed(1);
        seed << detail::best_grid_frequency(y, omega_bar);
        const S cand = refine_frequencies(seed, CMat<S>(y), omega_bar)[0];
        if (misfit(cand) < misfit(freqs_hat[idx]))
        {
            freqs_hat[idx] = cand;
            reseeded = true;
        }
    }
    if (reseeded)
        joint_polish();

    for (Index i = 0; i < count; ++i)
        out.freq_diff_hat[i] = S(2) * wrap_half(freqs_hat[i] / ris_spacing / S(2));
    for (Index i = 0; i < count; ++i)
    {
        std::vector<S> support;
        support.push_back(freqs_hat[i]);
        for (Index j = 0; j < count; ++j)
        {
            if (j == i || Index(support.size()) >= std::min(t_meas, n_r))
                continue;
            bool separated = true;
            for (S f : support)
                if (std::abs(wrap_half(freqs_hat[j] - f)) <= S(1) / S(n_r))
                    separated = false;
            if (separated)
                support.push_back(freqs_hat[j]);
        }
        CMat<S> stack(t_meas, Index(support.size()));
        for (Index c = 0; c < Index(support.size()); ++c)
            stack.col(c) = omega_bar * harmonic_atom<S>(n_r, support[std::size_t(c)]);
        if (stack.col(0).squaredNorm() > S(0))
        {
            Eigen::CompleteOrthogonalDecomposition<CMat<S>> cod(stack);
            CVec<S> coef = cod.solve(y_rows.row(i).transpose());
            out.rho_hat[i] = coef[0] / scale;
        }
        else
        {
            CVec<S> atom = harmonic_atom<S>(n_r, freqs_hat[i]);
            out.rho_hat[i] = (atom.adjoint() * latents[std::size_t(i)])(0) / S(n_r);
        }
    }
    return out;
}

namespace detail
{

template <typename S>
std::vector<std::pair<Index, Index>> full_index_map(Index l_rm, Index l_br)
{
    std::vector<std::pair<Index, Index>> map;
    map.reserve(std::size_t(l_rm * l_br));
    for (Index n = 0; n < l_br; ++n)
        for (Index m = 0; m < l_rm; ++m)
            map.emplace_back(m, n);
    return map;
}

} // namespace detail

// Full two-stage pipeline: wide-beam frame, stage-1 recovery, aligned
// stage-2 blocks over every estimated direction pair, per-row recovery.
template <typename S>
EstimateBundle<S> run_full_pipeline(const SoundingConfig<S> &cfg,
                                    const ChannelRealization<S> &realization, Rng &rng,
                                    const SolveOptions<S> &opts = {},
                                    const RegConstants<S> &consts = {})
{
    const Index l_br = realization.br.count();
    const Index l_rm = realization.rm.count();
    SoundingFrame<S> frame0 = gen_stage1_frame(cfg, realization, rng);
    Stage1Estimate<S> s1 = stage1_estimate(frame0, cfg, l_br, l_rm, realization.geom_bs,
                                           realization.geom_ms, opts, consts);

    std::vector<SoundingFrame<S>> frames =
        gen_stage2_frames(cfg, realization, s1.theta_br_hat, s1.phi_rm_hat, rng);
    StackedStage2<S> stacked = stack_stage2_rows(frames);
    const S scale = std::sqrt(S(realization.geom_bs.element_count) *
                              S(realization.geom_ms.element_count));
    Stage2Estimate<S> s2 = stage2_estimate(stacked.rows, stacked.measurement, cfg, scale,
                                           realization.geom_ris.spacing_ratio, opts, consts);

    EstimateBundle<S> bundle;
    bundle.theta_br_hat = std::move(s1.theta_br_hat);
    bundle.phi_rm_hat = std::move(s1.phi_rm_hat);
    bundle.freq_diff_hat = std::move(s2.freq_diff_hat);
    bundle.rho_hat = std::move(s2.rho_hat);
    bundle.index_map = detail::full_index_map<S>(l_rm, l_br);
    bundle.diagnostics = std::move(s1.diagnostics);
    bundle.diagnostics.insert(bundle.diagnostics.end(), s2.diagnostics.begin(),
                              s2.diagnostics.end());
    bundle.overhead = training_overhead(cfg, l_br, l_rm);
    return bundle;
}

// Partial pipeline: after stage 1, each candidate direction pair is probed
// with a few single-beam blocks (round-robin over candidates); the remaining
// blocks are dedicated to the pair with the largest probe energy. Stage 2
// then recovers only that pair from its probes plus the dedicated blocks.
// Multiple probe rounds protect the selection against per-block phase fading.
template <typename S>
EstimateBundle<S> run_partial_pipeline(const SoundingConfig<S> &cfg,
                                       const ChannelRealization<S> &realization, Rng &rng,
                                       const SolveOptions<S> &opts = {},
                                       const RegConstants<S> &consts = {})
{
    const Index l_br = realization.br.count();
    const Index l_rm = realization.rm.count();
    const Index pairs = l_br * l_rm;
    if (cfg.t_blocks < pairs)
        throw std::invalid_argument("run_partial_pipeline: need at least one block per pair");

    SoundingFrame<S> frame0 = gen_stage1_frame(cfg, realization, rng);
    Stage1Estimate<S> s1 = stage1_estimate(frame0, cfg, l_br, l_rm, realization.geom_bs,
                                           realization.geom_ms, opts, consts);

    const Index rounds = std::max(Index(1), std::min(Index(3), (cfg.t_blocks - 1) / pairs));
    SoundingConfig<S> one = cfg;
    one.t_blocks = 1;
    std::vector<std::vector<SoundingFrame<S>>> probes;
    probes.resize(std::size_t(pairs));
    for (Index r = 0; r < rounds; ++r)
        for (Index n = 0; n < l_br; ++n)
            for (Index m = 0; m < l_rm; ++m)
            {
                RVec<S> th(1), ph(1);
                th << s1.theta_br_hat[n];
                ph << s1.phi_rm_hat[m];
                probes[std::size_t(n * l_rm + m)].push_back(
                    gen_stage2_frames(one, realization, th, ph, rng).front());
            }

    Index winner = 0;
    S best = S(-1);
    for (Index i = 0; i < pairs; ++i)
    {
        S energy = S(0);
        for (const SoundingFrame<S> &frame : probes[std::size_t(i)])
            energy += frame.received.squaredNorm();
        if (energy > best)
        {
            best = energy;
            winner = i;
        }
    }
    const Index win_m = winner % l_rm;
    const Index win_n = winner / l_rm;

    std::vector<SoundingFrame<S>> selected = std::move(probes[std::size_t(winner)]);
    if (cfg.t_blocks > rounds * pairs)
    {
        SoundingConfig<S> rest = cfg;
        rest.t_blocks = cfg.t_blocks - rounds * pairs;
        RVec<S> th(1), ph(1);
        th << s1.theta_br_hat[win_n];
        ph << s1.phi_rm_hat[win_m];
        std::vector<SoundingFrame<S>> dedicated =
            gen_stage2_frames(rest, realization, th, ph, rng);
        selected.insert(selected.end(), dedicated.begin(), dedicated.end());
    }

    StackedStage2<S> stacked = stack_stage2_rows(selected);
    const S scale = std::sqrt(S(realization.geom_bs.element_count) *
                              S(realization.geom_ms.element_count));
    Stage2Estimate<S> s2 = stage2_estimate(stacked.rows, stacked.measurement, cfg, scale,
                                           realization.geom_ris.spacing_ratio, opts, consts);

    EstimateBundle<S> bundle;
    bundle.theta_br_hat = std::move(s1.theta_br_hat);
    bundle.phi_rm_hat = std::move(s1.phi_rm_hat);
    bundle.freq_diff_hat = std::move(s2.freq_diff_hat);
    bundle.rho_hat = std::move(s2.rho_hat);
    bundle.index_map = {{win_m, win_n}};
    bundle.diagnostics = std::move(s1.diagnostics);
    bundle.diagnostics.insert(bundle.diagnostics.end(), s2.diagnostics.begin(),
                              s2.diagnostics.end());
    bundle.overhead = training_overhead(cfg, Index(1), Index(1));
    return bundle;
}

} // namespace risce

#endif
