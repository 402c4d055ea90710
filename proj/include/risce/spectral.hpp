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

#ifndef RISCE_SPECTRAL_HPP
#define RISCE_SPECTRAL_HPP

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

#include "risce/types.hpp"

namespace risce
{

// Raised when a spectral input carries no signal at all (exactly zero matrix)
class EmptySignalError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

// Frequencies in [-1/2, 1/2) (cycles per element) with fitted complex amplitudes
template <typename S = double>
struct FrequencyEstimate
{
    RVec<S> freqs; // sorted ascending
    CVec<S> amplitudes;
    Index order = 0;
};

/// Unit-modulus harmonic atom, element k = exp(j*2*pi*freq*k)
template <typename S>
CVec<S> harmonic_atom(Index n, S freq)
{
    CVec<S> a(n);
    for (Index k = 0; k < n; ++k)
        a[k] = std::polar(S(1), S(2) * std::numbers::pi_v<S> * freq * S(k));
    return a;
}

/// Wrap to the principal interval [-1/2, 1/2)
template <typename S>
S wrap_half(S f)
{
    S w = f - std::round(f);
    if (w >= S(0.5))
        w -= S(1);
    return w;
}

namespace detail
{

template <typename S>
std::vector<std::complex<S>> polynomial_roots(const CVec<S> &coeffs)
{
    // trim negligible leading/trailing coefficients before forming the companion
    const S maxc = coeffs.cwiseAbs().maxCoeff();
    if (maxc <= S(0))
        return {};
    Index lo = 0, hi = coeffs.size() - 1;
    const S cut = S(1e-14) * maxc;
    while (hi > lo && std::abs(coeffs[hi]) <= cut)
        --hi;
    while (lo < hi && std::abs(coeffs[lo]) <= cut)
        ++lo;
    const Index deg = hi - lo;
    if (deg < 1)
        return {};
    CMat<S> comp = CMat<S>::Zero(deg, deg);
    for (Index i = 0; i + 1 < deg; ++i)
        comp(i + 1, i) = S(1);
    for (Index i = 0; i < deg; ++i)
        comp(i, deg - 1) = -coeffs[lo + i] / coeffs[hi];
    Eigen::ComplexEigenSolver<CMat<S>> es(comp, false);
    std::vector<std::complex<S>> roots(static_cast<std::size_t>(deg));
    for (Index i = 0; i < deg; ++i)
        roots[static_cast<std::size_t>(i)] = es.eigenvalues()[i];
    return roots;
}

} // namespace detail

/// Root-MUSIC frequency extraction from a Hermitian (nominally PSD) Toeplitz
/// matrix: eigendecompose, build the noise-subspace polynomial from the N-L
/// smallest eigenvectors, root it, and keep the L in-circle roots nearest the
/// unit circle (ties broken by the larger MUSIC pseudo-spectrum value)
template <typename S>
RVec<S> extract_frequencies(const CMat<S> &toeplitz, Index order)
{
    if (toeplitz.rows() != toeplitz.cols())
        throw std::invalid_argument("extract_frequencies: matrix must be square");
    const Index n = toeplitz.rows();
    if (order < 1 || order >= n)
        throw std::invalid_argument("extract_frequencies: need 1 <= L < N");
    if (toeplitz.cwiseAbs().maxCoeff() <= S(0))
        throw EmptySignalError("extract_frequencies: all-zero matrix carries no frequencies");

    CMat<S> h = (toeplitz + toeplitz.adjoint()) / S(2);
    Eigen::SelfAdjointEigenSolver<CMat<S>> es(h);
    const auto noise = es.eigenvectors().leftCols(n - order); // ascending eigenvalues
    CMat<S> c = noise * noise.adjoint();

    // D(z) = sum_{p,q} C[p,q] z^{q-p}, expanded as a degree-2(N-1) polynomial
    CVec<S> coeffs = CVec<S>::Zero(2 * n - 1);
    for (Index k = 0; k < n; ++k)
    {
        std::complex<S> gk = 0;
        for (Index p = 0; p + k < n; ++p)
            gk += c(p, p + k);
        coeffs[(n - 1) + k] = gk;
        if (k > 0)
            coeffs[(n - 1) - k] = std::conj(gk);
    }

    auto pseudo_power = [&](std::complex<S> z) {
        // a(z)^H C a(z) on the unit circle; small means strong spectrum
        CVec<S> a = harmonic_atom<S>(n, S(std::arg(z) / (2 * std::numbers::pi_v<S>)));
        return (a.adjoint() * c * a)(0).real();
    };

    std::vector<std::complex<S>> roots = detail::polynomial_roots<S>(coeffs);
    std::vector<std::complex<S>> inside;
    for (auto z : roots)
        if (std::abs(z) <= S(1) + S(1e-9))
            inside.push_back(z);

    // merge numerically identical roots (split double roots on the circle)
    std::vector<std::complex<S>> candidates;
    for (auto z : inside)
    {
        bool dup = false;
        for (auto &w : candidates)
            if (std::abs(z - w) < S(1e-6))
            {
                if (std::abs(S(1) - std::abs(z)) < std::abs(S(1) - std::abs(w)))
                    w = z;
                dup = true;
                break;
            }
        if (!dup)
            candidates.push_back(z);
    }

    std::sort(candidates.begin(), candidates.end(), [&](std::complex<S> a, std::complex<S> b) {
        S pa = std::abs(S(1) - std::abs(a)), pb = std::abs(S(1) - std::abs(b));
        if (pa != pb)
            return pa < pb;
        return pseudo_power(a) < pseudo_power(b);
    });

    RVec<S> freqs(order);
    Index have = 0;
    for (std::size_t i = 0; i < candidates.size() && have < order; ++i)
        freqs[have++] = wrap_half(S(std::arg(candidates[i]) / (2 * std::numbers::pi_v<S>)));

    // degenerate spectra can yield fewer roots than L; fall back to coarse
    // pseudo-spectrum peaks for the remainder
    if (have < order)
    {
        const Index grid = 8 * n;
        std::vector<std::pair<S, S>> peaks; // (power, freq)
        for (Index gidx = 0; gidx < grid; ++gidx)
        {
            S f = S(-0.5) + S(gidx) / S(grid);
            CVec<S> a = harmonic_atom<S>(n, f);
            peaks.emplace_back((a.adjoint() * c * a)(0).real(), f);
        }
        std::sort(peaks.begin(), peaks.end());
        for (auto &[pw, f] : peaks)
        {
            if (have >= order)
                break;
            bool dup = false;
            for (Index i = 0; i < have; ++i)
                if (std::abs(wrap_half(S(freqs[i] - f))) < S(0.5) / S(n))
                    dup = true;
            if (!dup)
                freqs[have++] = f;
        }
        while (have < order)
            freqs[have++] = S(0);
    }

    std::sort(freqs.begin(), freqs.end());
    return freqs;
}

/// Maximum-likelihood polish of an extracted frequency set against the raw
/// linear model  obs ~ measurement * [atom(f_1) ... atom(f_K)] * G  with the
/// mixing G unknown: variable-projection Gauss-Newton with the mixing
/// eliminated in closed form each step. Moves are trust-limited to the main
/// lobe around the initial point, so the convex-stage identification is kept
/// and only its numerical floor is removed. Order-preserving over the input
/// set; returns the best iterate seen (the initial set included) wrapped to
/// [-1/2, 1/2). Inputs it cannot improve on (empty set, too few measurement
/// rows, all-zero observations) are returned unchanged.
template <typename S>
RVec<S> refine_frequencies(const RVec<S> &freqs, const CMat<S> &observations,
                           const CMat<S> &measurement)
{
    if (measurement.rows() != observations.rows())
        throw std::invalid_argument(
            "refine_frequencies: measurement rows must match observations");
    const Index k = freqs.size();
    RVec<S> best = freqs;
    for (Index j = 0; j < k; ++j)
        best[j] = wrap_half(best[j]);
    const Index amb = measurement.cols();
    const Index rows = measurement.rows();
    if (k < 1 || amb < 2 || k >= rows || k >= amb ||
        observations.size() < 1 || observations.cwiseAbs().maxCoeff() <= S(0))
        return best;

    const S two_pi = S(2) * std::numbers::pi_v<S>;
    auto model = [&](const RVec<S> &f) {
        CMat<S> m(rows, k);
        for (Index j = 0; j < k; ++j)
            m.col(j) = measurement * harmonic_atom<S>(amb, f[j]);
        return m;
    };
    auto residual_norm = [&](const RVec<S> &f) {
        CMat<S> m = model(f);
        Eigen::CompleteOrthogonalDecomposition<CMat<S>> cod(m);
        return (observations - m * cod.solve(observations)).norm();
    };

    const RVec<S> init = best;
    RVec<S> cur = best;
    S best_norm = residual_norm(best);
    S cur_norm = best_norm;
    const S lobe = S(1) / S(amb);      // main-lobe width in cycles
    const S step_cap = lobe / S(4);    // largest per-iteration move
    const S radius = S(1.5) * lobe;    // total travel allowed from the init

    for (int iter = 0; iter < 60; ++iter)
    {
        CMat<S> m = model(cur);
        Eigen::CompleteOrthogonalDecomposition<CMat<S>> cod(m);
        CMat<S> coef = cod.solve(observations);
        CMat<S> resid = observations - m * coef;

        // per-frequency search direction: derivative of that rank-one term,
        // projected onto the orthogonal complement of the current model span
        std::vector<CMat<S>> dirs;
        dirs.resize(std::size_t(k));
        for (Index j = 0; j < k; ++j)
        {
            const CVec<S> atom = harmonic_atom<S>(amb, cur[j]);
            CVec<S> datom(amb);
            for (Index t = 0; t < amb; ++t)
                datom[t] = std::complex<S>(S(0), two_pi * S(t)) * atom[t];
            CMat<S> dir = (measurement * datom) * coef.row(j);
            dirs[std::size_t(j)] = dir - m * cod.solve(dir);
        }

        RMat<S> gram(k, k);
        RVec<S> rhs(k);
        for (Index a = 0; a < k; ++a)
        {
            for (Index b = 0; b < k; ++b)
                gram(a, b) = dirs[std::size_t(a)]
                                 .conjugate()
                                 .cwiseProduct(dirs[std::size_t(b)])
                                 .sum()
                                 .real();
            rhs[a] = dirs[std::size_t(a)].conjugate().cwiseProduct(resid).sum().real();
        }
        const S trace = gram.trace();
        if (!(trace > S(0)))
            break;
        gram.diagonal().array() += trace * S(1e-14) / S(k);
        RVec<S> delta = gram.ldlt().solve(rhs);
        if (!delta.allFinite())
            break;

        bool moved = false;
        S step = S(1);
        for (int bt = 0; bt < 8 && !moved; ++bt, step /= S(2))
        {
            RVec<S> trial = cur;
            for (Index j = 0; j < k; ++j)
            {
                const S move = std::clamp(step * delta[j], -step_cap, step_cap);
                trial[j] = init[j] + std::clamp(cur[j] + move - init[j], -radius, radius);
            }
            const S trial_norm = residual_norm(trial);
            if (trial_norm < cur_norm)
            {
                cur = trial;
                cur_norm = trial_norm;
                moved = true;
            }
        }
        if (!moved)
            break;
        if (cur_norm < best_norm)
        {
            best = cur;
            best_norm = cur_norm;
        }
        if (delta.cwiseAbs().maxCoeff() < S(1e-15))
            break;
    }

    for (Index j = 0; j < k; ++j)
        best[j] = wrap_half(best[j]);
    return best;
}

/// Map a directional-sine frequency back to a physical angle; empty when the
/// argument leaves the arcsine domain (callers keep the frequency then)
template <typename S>
std::optional<S> freq_to_angle(S freq, S spacing_ratio)
{
    if (!(spacing_ratio > S(0)))
        throw std::invalid_argument("freq_to_angle: spacing_ratio must be > 0");
    const S s = freq / spacing_ratio;
    if (std::abs(s) > S(1))
        return std::nullopt;
    return std::asin(s);
}

/// Least-squares amplitudes for a known frequency set: minimizes
/// ||obs - measurement * sum_l a_l atom(f_l)||_2
template <typename S>
CVec<S> ls_amplitudes(const RVec<S> &freqs, const CVec<S> &observations, const CMat<S> &measurement)
{
    if (freqs.size() < 1)
        throw std::invalid_argument("ls_amplitudes: need at least one frequency");
    if (measurement.rows() != observations.size())
        throw std::invalid_argument("ls_amplitudes: measurement rows must match observations");
    const Index n = measurement.cols();
    CMat<S> stack(n, freqs.size());
    for (Index l = 0; l < freqs.size(); ++l)
        stack.col(l) = harmonic_atom<S>(n, freqs[l]);
    CMat<S> e = measurement * stack;
    Eigen::ColPivHouseholderQR<CMat<S>> qr(e);
    if (qr.rank() < freqs.size())
        throw std::invalid_argument("ls_amplitudes: rank-deficient steering stack");
    return qr.solve(observations);
}

} // namespace risce

#endif
