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

#ifndef RISCE_SOUNDING_HPP
#define RISCE_SOUNDING_HPP

#include "risce/channel.hpp"
#include "risce/rng.hpp"
#include "risce/types.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace risce
{

// Two-stage sounding protocol parameters
template <typename S = double>
struct SoundingConfig
{
    Index n0 = 1;       // stage-1 pilot count (columns of X0)
    Index m0 = 1;       // stage-1 combiner count (columns of W0)
    Index t_blocks = 1; // stage-2 block count
    Index n_rf = 1;     // receive RF chains at the MS
    S noise_var = S(1); // per-measurement noise variance, linear
    std::uint64_t seed = 0; // stream label used by the experiment layer

    void validate() const
    {
        if (n0 < 1 || m0 < 1 || t_blocks < 1)
            throw std::invalid_argument("SoundingConfig: n0, m0, t_blocks must be >= 1");
        if (n_rf < 1)
            throw std::invalid_argument("SoundingConfig: n_rf must be >= 1");
        if (!(noise_var > S(0)))
            throw std::invalid_argument("SoundingConfig: noise_var must be > 0");
    }
};

// One sounding block: pilots, combiner, RIS phase vector, and the received block
template <typename S = double>
struct SoundingFrame
{
    Index block_index = 0;
    CMat<S> pilots;     // N_B x pilot count
    CMat<S> combiner;   // N_M x combiner count
    CVec<S> ris_phases; // N_R, unit modulus
    CMat<S> received;   // combiner count x pilot count
};

namespace detail
{

template <typename S>
CMat<S> random_phase_matrix(Rng &rng, Index rows, Index cols, S scale)
{
    CMat<S> m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i)
            m(i, j) = scale * std::complex<S>(rng.unit_phase());
    return m;
}

template <typename S>
CVec<S> random_phase_vector(Rng &rng, Index n)
{
    CVec<S> v(n);
    for (Index i = 0; i < n; ++i)
        v[i] = std::complex<S>(rng.unit_phase());
    return v;
}

template <typename S>
CMat<S> noise_matrix(Rng &rng, Index rows, Index cols, S var)
{
    CMat<S> z(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i)
            z(i, j) = std::complex<S>(rng.cgaussian(double(var)));
    return z;
}

// Y = W^H (H(omega) X + Z), the single-block observation model
template <typename S>
CMat<S> receive_block(const ChannelRealization<S> &realization, const CMat<S> &pilots,
                      const CMat<S> &combiner, const CVec<S> &omega, const CMat<S> &noise)
{
    CMat<S> h = composite_channel(realization, omega);
    return combiner.adjoint() * (h * pilots + noise);
}

} // namespace detail

// Stage-1 wide-beam frame: random unit-modulus pilots and combiners with
// unit-norm columns, random RIS phases. Draw order is pilots, combiner,
// RIS phases, noise, each column-major, so streams replay deterministically.
template <typename S>
SoundingFrame<S> gen_stage1_frame(const SoundingConfig<S> &cfg,
                                  const ChannelRealization<S> &realization, Rng &rng)
{
    cfg.validate();
    const Index n_b = realization.geom_bs.element_count;
    const Index n_m = realization.geom_ms.element_count;
    const Index n_r = realization.geom_ris.element_count;

    SoundingFrame<S> frame;
    frame.block_index = 0;
    frame.pilots =
        detail::random_phase_matrix<S>(rng, n_b, cfg.n0, S(1) / std::sqrt(S(n_b)));
    frame.combiner =
        detail::random_phase_matrix<S>(rng, n_m, cfg.m0, S(1) / std::sqrt(S(n_m)));
    frame.ris_phases = detail::random_phase_vector<S>(rng, n_r);
    CMat<S> noise = detail::noise_matrix<S>(rng, n_m, cfg.n0, cfg.noise_var);
    frame.received =
        detail::receive_block(realization, frame.pilots, frame.combiner, frame.ris_phases, noise);
    return frame;
}

// Stage-2 frames: pilots and combiners aligned on the stage-1 direction
// estimates and held fixed across blocks; RIS phases and noise are fresh
// per block (draw order per block: RIS phases, then noise).
template <typename S>
std::vector<SoundingFrame<S>> gen_stage2_frames(const SoundingConfig<S> &cfg,
                                                const ChannelRealization<S> &realization,
                                                const RVec<S> &theta_hat_br,
                                                const RVec<S> &phi_hat_rm, Rng &rng)
{
    cfg.validate();
    if (theta_hat_br.size() < 1 || phi_hat_rm.size() < 1)
        throw std::invalid_argument("gen_stage2_frames: estimate lists must be nonempty");

    const Index n_b = realization.geom_bs.element_count;
    const Index n_m = realization.geom_ms.element_count;
    const Index n_r = realization.geom_ris.element_count;

    CMat<S> pilots = steering_matrix(realization.geom_bs, theta_hat_br) / std::sqrt(S(n_b));
    CMat<S> combiner = steering_matrix(realization.geom_ms, phi_hat_rm) / std::sqrt(S(n_m));

    std::vector<SoundingFrame<S>> frames;
    frames.reserve(std::size_t(cfg.t_blocks));
    for (Index t = 1; t <= cfg.t_blocks; ++t)
    {
        SoundingFrame<S> frame;
        frame.block_index = t;
        frame.pilots = pilots;
        frame.combiner = combiner;
        frame.ris_phases = detail::random_phase_vector<S>(rng, n_r);
        CMat<S> noise =
            detail::noise_matrix<S>(rng, n_m, theta_hat_br.size(), cfg.noise_var);
        frame.received = detail::receive_block(realization, frame.pilots, frame.combiner,
                                               frame.ris_phases, noise);
        frames.push_back(std::move(frame));
    }
    return frames;
}

// Total training overhead in symbol slots:
//   T_t = N0 * ceil(M0 / n_rf) + T * L_br * ceil(L_rm / n_rf).
// t_blocks = 0 is allowed here so stage-1-only budgets can be quoted.
template <typename S>
Index training_overhead(const SoundingConfig<S> &cfg, Index l_br, Index l_rm)
{
    if (cfg.n0 < 1 || cfg.m0 < 1 || cfg.n_rf < 1)
        throw std::invalid_argument("training_overhead: n0, m0, n_rf must be >= 1");
    if (cfg.t_blocks < 0 || l_br < 1 || l_rm < 1)
        throw std::invalid_argument("training_overhead: path counts must be >= 1");
    const Index stage1 = cfg.n0 * ((cfg.m0 + cfg.n_rf - 1) / cfg.n_rf);
    const Index stage2 = cfg.t_blocks * l_br * ((l_rm + cfg.n_rf - 1) / cfg.n_rf);
    return stage1 + stage2;
}

// Stage-2 blocks rearranged for per-cascaded-path line-spectrum estimation:
// rows.col(t) = vec(Y_t) and measurement.row(t) = ris_phases_t^T.
template <typename S = double>
struct StackedStage2
{
    CMat<S> rows;        // (L_br * L_rm) x T, one cascaded path per row
    CMat<S> measurement; // T x N_R
};

template <typename S>
StackedStage2<S> stack_stage2_rows(const std::vector<SoundingFrame<S>> &frames)
{
    if (frames.empty())
        throw std::invalid_argument("stack_stage2_rows: no frames");
    const Index rows_per_block = frames.front().received.rows();
    const Index cols_per_block = frames.front().received.cols();
    const Index n_r = frames.front().ris_phases.size();
    const Index t_blocks = Index(frames.size());

    StackedStage2<S> out;
    out.rows.resize(rows_per_block * cols_per_block, t_blocks);
    out.measurement.resize(t_blocks, n_r);
    for (Index t = 0; t < t_blocks; ++t)
    {
        const SoundingFrame<S> &frame = frames[std::size_t(t)];
        if (frame.received.rows() != rows_per_block || frame.received.cols() != cols_per_block ||
            frame.ris_phases.size() != n_r)
            throw std::invalid_argument("stack_stage2_rows: inconsistent frame shapes");
        out.rows.col(t) = frame.received.reshaped();
        out.measurement.row(t) = frame.ris_phases.transpose();
    }
    return out;
}

} // namespace risce

#endif
