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

#ifndef RISCE_TOEPLITZ_HPP
#define RISCE_TOEPLITZ_HPP

#include <Eigen/Eigenvalues>

#include "risce/types.hpp"

namespace risce
{

/// Hermitian Toeplitz matrix with u1 as its first row; the imaginary part of
/// u1[0] is dropped so the diagonal is real
template <typename S>
CMat<S> toeplitz_from_row(const CVec<S> &u1)
{
    const Index n = u1.size();
    CMat<S> t(n, n);
    for (Index p = 0; p < n; ++p)
    {
        t(p, p) = u1[0].real();
        for (Index q = p + 1; q < n; ++q)
        {
            t(p, q) = u1[q - p];
            t(q, p) = std::conj(u1[q - p]);
        }
    }
    return t;
}

/// Adjoint of toeplitz_from_row for the real inner product <A,B> = Re tr(A^H B):
/// <Toep(u), M> = Re(u^H adjoint_toeplitz(M)) for every u. Entry 0 is Re tr(M)
/// (the map realifies u[0], so its adjoint realifies the trace); entry k sums
/// the k-th superdiagonal plus the conjugated k-th subdiagonal.
template <typename S>
CVec<S> adjoint_toeplitz(const CMat<S> &m)
{
    if (m.rows() != m.cols())
        throw std::invalid_argument("adjoint_toeplitz: matrix must be square");
    const Index n = m.rows();
    CVec<S> a = CVec<S>::Zero(n);
    a[0] = m.diagonal().real().sum();
    for (Index k = 1; k < n; ++k)
        for (Index p = 0; p + k < n; ++p)
            a[k] += m(p, p + k) + std::conj(m(p + k, p));
    return a;
}

/// Nearest (Frobenius) positive semidefinite matrix: eigenvalue clipping
template <typename S>
CMat<S> psd_project(const CMat<S> &m)
{
    if (m.rows() != m.cols())
        throw std::invalid_argument("psd_project: matrix must be square");
    const S tol = S(1e-10) * std::max(S(1), m.cwiseAbs().maxCoeff());
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > tol)
        throw std::invalid_argument("psd_project: matrix is not Hermitian");
    CMat<S> h = (m + m.adjoint()) / S(2);
    Eigen::SelfAdjointEigenSolver<CMat<S>> es(h);
    RVec<S> d = es.eigenvalues().cwiseMax(S(0));
    return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
}

} // namespace risce

#endif
