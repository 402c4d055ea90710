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

#ifndef RISCE_CHANNEL_HPP
#define RISCE_CHANNEL_HPP

#include <cmath>
#include <numbers>
#include <utility>

#include "risce/rng.hpp"
#include "risce/types.hpp"

namespace risce
{

// Raised when rejection sampling cannot satisfy a separation constraint
class SamplingError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

enum class GainProfile
{
    homogeneous,  // all gains CN(0, 1)
    inhomogeneous // first gain CN(0, 1), remaining gains CN(0, 0.01)
};

/// ULA steering vector for a physical angle, element k = exp(j*2*pi*(d/lambda)*k*sin(angle))
template <typename S>
CVec<S> steering_vector(const ArrayGeometry<S> &geom, S angle)
{
    geom.validate();
    if (std::abs(angle) > S(std::numbers::pi / 2) + S(1e-12))
        throw std::invalid_argument("steering_vector: angle outside [-pi/2, pi/2]");
    CVec<S> a(geom.element_count);
    const S step = S(2) * std::numbers::pi_v<S> * geom.spacing_ratio * std::sin(angle);
    for (Index k = 0; k < geom.element_count; ++k)
        a[k] = std::polar(S(1), step * S(k));
    return a;
}

/// Steering vector for a directional-sine value (or sine difference), which may
/// fall outside [-1, 1]; the array response is 2-periodic in this argument.
template <typename S>
CVec<S> steering_vector_from_freq(const ArrayGeometry<S> &geom, S freq)
{
    geom.validate();
    CVec<S> a(geom.element_count);
    const S step = S(2) * std::numbers::pi_v<S> * geom.spacing_ratio * freq;
    for (Index k = 0; k < geom.element_count; ++k)
        a[k] = std::polar(S(1), step * S(k));
    return a;
}

/// Steering matrix with one column per angle
template <typename S>
CMat<S> steering_matrix(const ArrayGeometry<S> &geom, const RVec<S> &angles)
{
    CMat<S> a(geom.element_count, angles.size());
    for (Index l = 0; l < angles.size(); ++l)
        a.col(l) = steering_vector(geom, angles[l]);
    return a;
}

namespace detail
{

// Draw count angles uniform on (-pi/2, pi/2) whose directional sines are pairwise
// separated by more than min_sep; each failed tuple counts one attempt
template <typename S>
RVec<S> sample_separated_angles(Rng &rng, Index count, S min_sep, int &budget)
{
    RVec<S> angles(count);
    while (budget > 0)
    {
        --budget;
        for (Index l = 0; l < count; ++l)
            angles[l] = S(rng.uniform(-std::numbers::pi / 2, std::numbers::pi / 2));
        bool ok = true;
        for (Index i = 0; i < count && ok; ++i)
            for (Index j = i + 1; j < count && ok; ++j)
                if (std::abs(std::sin(angles[i]) - std::sin(angles[j])) <= min_sep)
                    ok = false;
        if (ok)
            return angles;
    }
    throw SamplingError("sample_separated_angles: rejection budget exhausted");
}

template <typename S>
CVec<S> sample_gains(Rng &rng, Index count, GainProfile profile)
{
    CVec<S> g(count);
    for (Index l = 0; l < count; ++l)
    {
        double var = (profile == GainProfile::inhomogeneous && l > 0) ? 0.01 : 1.0;
        g[l] = std::complex<S>(rng.cgaussian(var));
    }
    return g;
}

} // namespace detail

/// Draw one hop's paths with a common separation constraint on both angle lists.
/// min_sep <= 0 selects the default 4 / element_count directional-sine separation.
template <typename S>
PathSet<S> sample_paths(Rng &rng, Index paths, const ArrayGeometry<S> &geom, S min_sep,
                        GainProfile profile = GainProfile::homogeneous)
{
    geom.validate();
    if (paths < 1)
        throw std::invalid_argument("sample_paths: need at least one path");
    if (min_sep <= S(0))
        min_sep = S(4) / S(geom.element_count);
    if (S(paths) * min_sep >= S(2))
        throw std::invalid_argument("sample_paths: L * min_sep exceeds the directional-sine span");
    int budget = 10000;
    PathSet<S> ps;
    ps.aod = detail::sample_separated_angles<S>(rng, paths, min_sep, budget);
    ps.aoa = detail::sample_separated_angles<S>(rng, paths, min_sep, budget);
    ps.gains = detail::sample_gains<S>(rng, paths, profile);
    return ps;
}

/// Draw one hop's paths with each angle list separated by 4/N of its own array
template <typename S>
PathSet<S> sample_hop(Rng &rng, Index paths, const ArrayGeometry<S> &geom_tx,
                      const ArrayGeometry<S> &geom_rx, GainProfile profile = GainProfile::homogeneous)
{
    geom_tx.validate();
    geom_rx.validate();
    if (paths < 1)
        throw std::invalid_argument("sample_hop: need at least one path");
    const S sep_tx = S(4) / S(geom_tx.element_count);
    const S sep_rx = S(4) / S(geom_rx.element_count);
    if (S(paths) * sep_tx >= S(2) || S(paths) * sep_rx >= S(2))
        throw std::invalid_argument("sample_hop: L * min_sep exceeds the directional-sine span");
    int budget = 10000;
    PathSet<S> ps;
    ps.aod = detail::sample_separated_angles<S>(rng, paths, sep_tx, budget);
    ps.aoa = detail::sample_separated_angles<S>(rng, paths, sep_rx, budget);
    ps.gains = detail::sample_gains<S>(rng, paths, profile);
    return ps;
}

/// Hop matrix A_rx(aoa) diag(gains) A_tx(aod)^H, sized N_rx x N_tx
template <typename S>
CMat<S> hop_matrix(const PathSet<S> &paths, const ArrayGeometry<S> &rx_geom,
                   const ArrayGeometry<S> &tx_geom)
{
    paths.validate();
    CMat<S> a_rx = steering_matrix(rx_geom, paths.aoa);
    CMat<S> a_tx = steering_matrix(tx_geom, paths.aod);
    return a_rx * paths.gains.asDiagonal() * a_tx.adjoint();
}

/// Assemble a realization and cache its hop matrices
template <typename S>
ChannelRealization<S> make_realization(PathSet<S> br, PathSet<S> rm, ArrayGeometry<S> geom_bs,
                                       ArrayGeometry<S> geom_ris, ArrayGeometry<S> geom_ms)
{
    ChannelRealization<S> r;
    r.br = std::move(br);
    r.rm = std::move(rm);
    r.geom_bs = geom_bs;
    r.geom_ris = geom_ris;
    r.geom_ms = geom_ms;
    r.h_br = hop_matrix(r.br, r.geom_ris, r.geom_bs);
    r.h_rm = hop_matrix(r.rm, r.geom_ms, r.geom_ris);
    return r;
}

/// Draw both hops (BR first, then RM) with per-array separation defaults
template <typename S>
ChannelRealization<S> sample_realization(Rng &rng, Index paths_br, Index paths_rm,
                                         const ArrayGeometry<S> &geom_bs,
                                         const ArrayGeometry<S> &geom_ris,
                                         const ArrayGeometry<S> &geom_ms,
                                         GainProfile profile = GainProfile::homogeneous)
{
    PathSet<S> br = sample_hop(rng, paths_br, geom_bs, geom_ris, profile);
    PathSet<S> rm = sample_hop(rng, paths_rm, geom_ris, geom_ms, profile);
    return make_realization(std::move(br), std::move(rm), geom_bs, geom_ris, geom_ms);
}

namespace detail
{
template <typename S>
void check_ris_phases(const ChannelRealization<S> &realization, const CVec<S> &omega)
{
    if (omega.size() != realization.geom_ris.element_count)
        throw std::invalid_argument("RIS phase vector length does not match the RIS array");
    for (Index k = 0; k < omega.size(); ++k)
        if (std::abs(std::abs(omega[k]) - S(1)) > S(1e-9))
            throw std::invalid_argument("RIS phase vector must be unit-modulus");
}
} // namespace detail

/// Cascaded path-domain channel diag(rho_rm) A^H(theta_rm) diag(omega) A(phi_br) diag(rho_br),
/// sized L_rm x L_br
template <typename S>
CMat<S> effective_channel(const ChannelRealization<S> &realization, const CVec<S> &omega)
{
    detail::check_ris_phases(realization, omega);
    CMat<S> a_rm = steering_matrix(realization.geom_ris, realization.rm.aod);
    CMat<S> a_br = steering_matrix(realization.geom_ris, realization.br.aoa);
    return realization.rm.gains.asDiagonal() * (a_rm.adjoint() * omega.asDiagonal() * a_br) *
           realization.br.gains.asDiagonal();
}

/// End-to-end channel H_rm diag(omega) H_br, sized N_M x N_B
template <typename S>
CMat<S> composite_channel(const ChannelRealization<S> &realization, const CVec<S> &omega)
{
    detail::check_ris_phases(realization, omega);
    return realization.h_rm * omega.asDiagonal() * realization.h_br;
}

/// RIS-side sine differences sin(phi_br[n]) - sin(theta_rm[m]) and gain products,
/// flattened column-major over (m, n) so that entry i matches vec of the
/// effective channel: m = i % L_rm, n = i / L_rm
template <typename S>
AngleDifferenceSet<S> angle_difference_set(const ChannelRealization<S> &realization)
{
    const Index l_rm = realization.rm.count();
    const Index l_br = realization.br.count();
    AngleDifferenceSet<S> d;
    d.freq_diffs.resize(l_rm * l_br);
    d.gains.resize(l_rm * l_br);
    d.index_map.reserve(static_cast<std::size_t>(l_rm * l_br));
    for (Index n = 0; n < l_br; ++n)
        for (Index m = 0; m < l_rm; ++m)
        {
            const Index i = n * l_rm + m;
            d.freq_diffs[i] = std::sin(realization.br.aoa[n]) - std::sin(realization.rm.aod[m]);
            d.gains[i] = realization.rm.gains[m] * realization.br.gains[n];
            d.index_map.emplace_back(m, n);
        }
    return d;
}

} // namespace risce

#endif
