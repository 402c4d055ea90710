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

#ifndef RISCE_TYPES_HPP
#define RISCE_TYPES_HPP

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <vector>

namespace risce
{

using Index = Eigen::Index;

template <typename S>
using CVec = Eigen::Vector<std::complex<S>, Eigen::Dynamic>;

template <typename S>
using CMat = Eigen::Matrix<std::complex<S>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename S>
using RVec = Eigen::Vector<S, Eigen::Dynamic>;

template <typename S>
using RMat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

// Uniform linear array, element positions (k-1) * spacing_ratio wavelengths
template <typename S = double>
struct ArrayGeometry
{
    Index element_count = 1;
    S spacing_ratio = S(0.5); // element spacing d / lambda

    void validate() const
    {
        if (element_count < 1)
            throw std::invalid_argument("ArrayGeometry: element_count must be >= 1");
        if (!(spacing_ratio > S(0)))
            throw std::invalid_argument("ArrayGeometry: spacing_ratio must be > 0");
    }
};

// One propagation hop: per-path departure/arrival angles (radians) and complex gains
template <typename S = double>
struct PathSet
{
    RVec<S> aod;   // angles of departure at the transmit side
    RVec<S> aoa;   // angles of arrival at the receive side
    CVec<S> gains; // complex path gains

    Index count() const { return gains.size(); }

    void validate() const
    {
        if (aod.size() != aoa.size() || aod.size() != gains.size())
            throw std::invalid_argument("PathSet: aod, aoa, gains must have equal length");
        if (gains.size() < 1)
            throw std::invalid_argument("PathSet: at least one path required");
    }
};

// Two-hop channel state: base station -> RIS -> mobile station
template <typename S = double>
struct ChannelRealization
{
    PathSet<S> br; // BS -> RIS hop (aod at BS, aoa at RIS)
    PathSet<S> rm; // RIS -> MS hop (aod at RIS, aoa at MS)
    ArrayGeometry<S> geom_bs;
    ArrayGeometry<S> geom_ris;
    ArrayGeometry<S> geom_ms;
    CMat<S> h_br; // cached hop matrix, N_R x N_B
    CMat<S> h_rm; // cached hop matrix, N_M x N_R
};

// Cascaded-path frequency differences seen at the RIS, with their path-pair map.
// freq_diffs are directional-sine differences sin(phi_br) - sin(theta_rm), in [-2, 2].
template <typename S = double>
struct AngleDifferenceSet
{
    RVec<S> freq_diffs;
    CVec<S> gains;                               // products rho_rm[m] * rho_br[n]
    std::vector<std::pair<Index, Index>> index_map; // flat index i -> (m, n), zero-based
};

} // namespace risce

#endif
