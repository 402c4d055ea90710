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

#ifndef RISCE_ANM_HPP
#define RISCE_ANM_HPP

#include <array>
#include <cmath>
#include <vector>

#include "risce/toeplitz.hpp"
#include "risce/types.hpp"

namespace risce
{

// Regularized atomic-norm denoising in SDP form:
//   min  reg/(2*cols)*tr(Z) + reg/(2*amb_dim)*tr(Toep(u1)) + 1/2*||Y - scale*A*U||_F^2
//   s.t. [[Toep(u1), U], [U^H, Z]] >= 0
// covering both the multiple-snapshot (cols > 1) and single-snapshot forms.
template <typename S = double>
struct ToeplitzSdpProblem
{
    CMat<S> Y;       // observations, rows x cols
    CMat<S> A;       // sensing matrix, rows x amb_dim
    S reg = S(1);    // regularization weight
    Index amb_dim = 0;
    S scale = S(1);  // multiplier on A

    void validate() const
    {
        if (amb_dim < 1 || A.cols() != amb_dim)
            throw std::invalid_argument("ToeplitzSdpProblem: A must have amb_dim columns");
        if (A.rows() != Y.rows())
            throw std::invalid_argument("ToeplitzSdpProblem: A and Y row counts differ");
        if (Y.cols() < 1)
            throw std::invalid_argument("ToeplitzSdpProblem: Y needs at least one column");
        if (!(reg > S(0)))
            throw std::invalid_argument("ToeplitzSdpProblem: reg must be > 0");
        if (!(scale > S(0)))
            throw std::invalid_argument("ToeplitzSdpProblem: scale must be > 0");
        if (!Y.allFinite() || !A.allFinite())
            throw std::invalid_argument("ToeplitzSdpProblem: non-finite input");
    }
};

template <typename S = double>
struct SolveOptions
{
    int max_iter = 2000;
    S eps_abs = S(1e-6);
    S eps_rel = S(1e-6);
    S step = S(1); // initial splitting penalty, adapted by residual balancing
    bool trace = false;
};

template <typename S = double>
struct ToeplitzSdpSolution
{
    CVec<S> u1;
    CMat<S> U_hat;
    CMat<S> Z_hat;
    S objective = S(0);
    int iterations = 0;
    S primal_residual = S(0);
    S dual_residual = S(0);
    bool converged = false;
    std::vector<std::array<S, 3>> trace; // (objective, primal, dual) per iteration
};

enum class RegKind
{
    stage1_ms,
    stage1_bs,
    stage2
};

template <typename S = double>
struct RegConstants
{
    S stage1_ms = S(1);
    S stage1_bs = S(1);
    S stage2 = S(1);

    S at(RegKind kind) const
    {
        switch (kind)
        {
        case RegKind::stage1_ms: return stage1_ms;
        case RegKind::stage1_bs: return stage1_bs;
        default: return stage2;
        }
    }
};

/// Noise-scaled weight c * sqrt(sigma2 * dim * log(dim))
template <typename S>
S regularization_weight(RegKind kind, S sigma2, Index dim, const RegConstants<S> &c = {})
{
    if (!(sigma2 > S(0)))
        throw std::invalid_argument("regularization_weight: sigma2 must be > 0");
    if (dim < 2)
        throw std::invalid_argument("regularization_weight: dim must be >= 2");
    return c.at(kind) * std::sqrt(sigma2 * S(dim) * std::log(S(dim)));
}

/// Operator-splitting solve: alternate an exact prox step in (u1, U, Z) with a
/// PSD projection of the stacked block through a scaled dual variable.
template <typename S>
ToeplitzSdpSolution<S> solve(const ToeplitzSdpProblem<S> &problem, const SolveOptions<S> &opts = {})
{
    problem.validate();
    const Index n = problem.amb_dim;
    const Index m = problem.Y.cols();
    const Index d = n + m;

    const CMat<S> at = problem.scale * problem.A;
    const CMat<S> aty = at.adjoint() * problem.Y;

    // eigenbasis of A^H A diagonalizes every U-update system regardless of rho
    Eigen::SelfAdjointEigenSolver<CMat<S>> gram_es(CMat<S>(at.adjoint() * at));
    const CMat<S> v = gram_es.eigenvectors();
    const RVec<S> gram_d = gram_es.eigenvalues().cwiseMax(S(0));
    const CMat<S> vh_aty = v.adjoint() * aty;

    S rho = opts.step;
    CMat<S> q = CMat<S>::Zero(d, d);
    CMat<S> lam = CMat<S>::Zero(d, d);
    CMat<S> s = CMat<S>::Zero(d, d);

    CVec<S> u1 = CVec<S>::Zero(n);
    CMat<S> u = CMat<S>::Zero(n, m);
    CMat<S> z = CMat<S>::Zero(m, m);

    Eigen::SelfAdjointEigenSolver<CMat<S>> proj_es;

    auto objective_at = [&](const CVec<S> &u1v, const CMat<S> &uv, const CMat<S> &zv) -> S {
        S fit = (problem.Y - at * uv).squaredNorm() / S(2);
        S tr_z = zv.diagonal().real().sum();
        return problem.reg / (S(2) * S(m)) * tr_z + problem.reg / S(2) * u1v[0].real() + fit;
    };

    ToeplitzSdpSolution<S> sol;
    if (opts.trace)
        sol.trace.reserve(static_cast<std::size_t>(opts.max_iter));

    S r_norm = S(0), s_norm = S(0);
    int it = 0;
    for (it = 1; it <= opts.max_iter; ++it)
    {
        // prox step in (u1, U, Z) given B = Q - Lambda
        CMat<S> b = q - lam;
        const auto b11 = b.topLeftCorner(n, n);
        const auto b12 = b.topRightCorner(n, m);
        const auto b22 = b.bottomRightCorner(m, m);

        CVec<S> adj = adjoint_toeplitz<S>(b11);
        u1[0] = std::complex<S>((adj[0].real() - problem.reg / (S(2) * rho)) / S(n), S(0));
        for (Index k = 1; k < n; ++k)
            u1[k] = adj[k] / (S(2) * S(n - k));

        z = b22 - (problem.reg / (S(2) * S(m) * rho)) * CMat<S>::Identity(m, m);
        z = ((z + z.adjoint()) / S(2)).eval();

        CMat<S> w = v.adjoint() * (S(2) * rho * b12);
        w += vh_aty;
        w.array().colwise() /= (gram_d.array() + S(2) * rho);
        u.noalias() = v * w;

        s.topLeftCorner(n, n) = toeplitz_from_row<S>(u1);
        s.topRightCorner(n, m) = u;
        s.bottomLeftCorner(m, n) = u.adjoint();
        s.bottomRightCorner(m, m) = z;

        // PSD projection of S + Lambda, then scaled dual ascent
        CMat<S> q_prev = q;
        CMat<S> arg = s + lam;
        arg = ((arg + arg.adjoint()) / S(2)).eval();
        proj_es.compute(arg);
        q.noalias() = proj_es.eigenvectors() *
                      proj_es.eigenvalues().cwiseMax(S(0)).asDiagonal() *
                      proj_es.eigenvectors().adjoint();
        q = ((q + q.adjoint()) / S(2)).eval();
        lam += s - q;

        r_norm = (s - q).norm();
        s_norm = rho * (q - q_prev).norm();
        const S eps_pri = S(d) * opts.eps_abs + opts.eps_rel * std::max(s.norm(), q.norm());
        const S eps_dua = S(d) * opts.eps_abs + opts.eps_rel * rho * lam.norm();

        if (opts.trace)
            sol.trace.push_back({objective_at(u1, u, z), r_norm, s_norm});

        if (r_norm <= eps_pri && s_norm <= eps_dua)
        {
            sol.converged = true;
            break;
        }

        if (it % 50 == 0)
        {
            if (r_norm > S(10) * s_norm)
            {
                rho *= S(2);
                lam /= S(2);
            }
            else if (s_norm > S(10) * r_norm)
            {
                rho /= S(2);
                lam *= S(2);
            }
        }
    }

    // exact PSD feasibility: lift the diagonal by any residual negative curvature,
    // which preserves the Toeplitz structure of the top-left block
    proj_es.compute(s, Eigen::EigenvaluesOnly);
    const S min_eig = proj_es.eigenvalues().minCoeff();
    if (min_eig < S(0))
    {
        u1[0] += -min_eig;
        z += -min_eig * CMat<S>::Identity(m, m);
    }

    sol.u1 = u1;
    sol.U_hat = u;
    sol.Z_hat = z;
    sol.iterations = std::min(it, opts.max_iter);
    sol.primal_residual = r_norm;
    sol.dual_residual = s_norm;
    sol.objective = objective_at(u1, u, z);
    return sol;
}

} // namespace risce

#endif
