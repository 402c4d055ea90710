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

#ifndef RISCE_RIS_CONTROL_HPP
#define RISCE_RIS_CONTROL_HPP

#include "risce/channel.hpp"
#include "risce/estimator.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <complex>
#include <stdexcept>

namespace risce
{

template <typename S = double>
struct OmegaDesign
{
    CVec<S> omega;           // unit-modulus phase profile, length N_R
    bool degenerate = false; // true when estimates were all zero and ones were used
};

template <typename S = double>
struct BeamformerPair
{
    CVec<S> f; // unit-norm transmit beamformer, length N_B
    CVec<S> w; // unit-norm receive combiner, length N_M
};

namespace detail
{

// Entrywise unit-modulus projection exp(-j phase(v)); zeros map to 1
template <typename S>
CVec<S> conj_phase_profile(const CVec<S> &v)
{
    CVec<S> out(v.size());
    for (Index k = 0; k < v.size(); ++k)
    {
        S mag = std::abs(v[k]);
        out[k] = mag > S(0) ? std::complex<S>(std::conj(v[k]) / mag) : std::complex<S>(1, 0);
    }
    return out;
}

// Rotate so the first non-negligible entry is real positive
template <typename S>
void canonicalize_phase(CVec<S> &v)
{
    const S floor = S(1e-12) * v.norm();
    for (Index k = 0; k < v.size(); ++k)
        if (std::abs(v[k]) > floor)
        {
            std::complex<S> rot = std::conj(v[k]) / std::abs(v[k]);
            v *= rot;
            return;
        }
}

} // namespace detail

// Phase profile maximizing the effective-channel power sum_i |rho_i w^T a(f_i)|^2:
// top eigenvector of E E^H, conjugated and projected to unit modulus
template <typename S>
OmegaDesign<S> design_omega(const CVec<S> &rho_hat, const RVec<S> &freq_diff_hat,
                            const ArrayGeometry<S> &geom_ris)
{
    if (rho_hat.size() == 0 || rho_hat.size() != freq_diff_hat.size())
        throw std::invalid_argument("design_omega: estimate lists empty or mismatched");
    geom_ris.validate();

    OmegaDesign<S> out;
    const Index n_r = geom_ris.element_count;
    if (rho_hat.cwiseAbs().maxCoeff() == S(0))
    {
        out.omega = CVec<S>::Ones(n_r);
        out.degenerate = true;
        return out;
    }

    CMat<S> e(n_r, rho_hat.size());
    for (Index i = 0; i < rho_hat.size(); ++i)
        e.col(i) = rho_hat[i] * steering_vector_from_freq(geom_ris, freq_diff_hat[i]);

    Eigen::SelfAdjointEigenSolver<CMat<S>> eig(e * e.adjoint());
    if (eig.info() != Eigen::Success)
        throw std::runtime_error("design_omega: eigendecomposition failed");
    out.omega = detail::conj_phase_profile(CVec<S>(eig.eigenvectors().col(n_r - 1)));
    return out;
}

// Composite-channel rebuild from the estimate bundle under a fixed phase
// profile; index_map places each cascaded product into the coupling matrix
template <typename S>
CMat<S> reconstruct_composite(const EstimateBundle<S> &bundle, const CVec<S> &omega_star,
                              const ArrayGeometry<S> &geom_bs, const ArrayGeometry<S> &geom_ris,
                              const ArrayGeometry<S> &geom_ms)
{
    const Index l_br = bundle.theta_br_hat.size();
    const Index l_rm = bundle.phi_rm_hat.size();
    if (l_br == 0 || l_rm == 0)
        throw std::invalid_argument("reconstruct_composite: empty angle estimates");
    if (bundle.rho_hat.size() != Index(bundle.index_map.size()) ||
        bundle.freq_diff_hat.size() != Index(bundle.index_map.size()))
        throw std::invalid_argument("reconstruct_composite: bundle sizes disagree");
    if (omega_star.size() != geom_ris.element_count)
        throw std::invalid_argument("reconstruct_composite: phase profile length mismatch");

    CMat<S> g = CMat<S>::Zero(l_rm, l_br);
    for (std::size_t i = 0; i < bundle.index_map.size(); ++i)
    {
        auto [m, n] = bundle.index_map[i];
        if (m < 0 || m >= l_rm || n < 0 || n >= l_br)
            throw std::invalid_argument("reconstruct_composite: index map out of range");
        CVec<S> atom = steering_vector_from_freq(geom_ris, bundle.freq_diff_hat[Index(i)]);
        g(m, n) = bundle.rho_hat[Index(i)] * (omega_star.transpose() * atom)(0);
    }

    CMat<S> a_bs = steering_matrix(geom_bs, bundle.theta_br_hat);
    CMat<S> a_ms = steering_matrix(geom_ms, bundle.phi_rm_hat);
    return a_ms * g * a_bs.adjoint();
}

// Dominant singular pair of the reconstructed channel, phase-canonicalized
template <typename S>
BeamformerPair<S> design_beamformers(const CMat<S> &h_hat)
{
    if (h_hat.rows() == 0 || h_hat.cols() == 0 || h_hat.cwiseAbs().maxCoeff() == S(0))
        throw std::invalid_argument("design_beamformers: channel estimate is zero");

    Eigen::JacobiSVD<CMat<S>> svd(h_hat, Eigen::ComputeThinU | Eigen::ComputeThinV);
    BeamformerPair<S> pair;
    pair.w = svd.matrixU().col(0);
    pair.f = svd.matrixV().col(0);
    detail::canonicalize_phase(pair.f);
    detail::canonicalize_phase(pair.w);
    return pair;
}

// Realized coherence of a phase profile against the true RIS-side geometry,
// |A^H(rm aod) diag(omega) A(br aoa)|_F^2 / N_R^2; reaches 1 for a single
// perfectly aligned path pair
template <typename S>
S ris_gain(const ChannelRealization<S> &realization, const CVec<S> &omega)
{
    const Index n_r = realization.geom_ris.element_count;
    if (omega.size() != n_r)
        throw std::invalid_argument("ris_gain: phase profile length mismatch");
    for (Index k = 0; k < n_r; ++k)
        if (std::abs(std::abs(omega[k]) - S(1)) > S(1e-9))
            throw std::invalid_argument("ris_gain: phase profile must be unit-modulus");

    CMat<S> a_rm = steering_matrix(realization.geom_ris, realization.rm.aod);
    CMat<S> a_br = steering_matrix(realization.geom_ris, realization.br.aoa);
    CMat<S> coupled = a_rm.adjoint() * omega.asDiagonal() * a_br;
    return coupled.squaredNorm() / (S(n_r) * S(n_r));
}

} // namespace risce

#endif
