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

#ifndef RISCE_METRICS_HPP
#define RISCE_METRICS_HPP

#include "risce/estimator.hpp"
#include "risce/ris_control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace risce
{

// One aggregated row of the evaluation table
template <typename S = double>
struct MetricReport
{
    S mse_sin_theta_br = 0;
    S mse_sin_phi_rm = 0;
    S mse_sin_delta = 0;
    S mse_rho = 0;
    S se_bound = 0;       // bits/s/Hz
    S asd_f = 0;
    S asd_w = 0;
    S ris_gain_mean = 0;
    Index n_realizations = 0;
    S snr_db = 0;
};

template <typename S = double>
struct DeltaRhoMse
{
    S mse_sin_delta = 0;
    S mse_rho = 0;
    bool partial = false; // estimates covered only a subset of the true pairs
};

// Per-realization record feeding the effective-SE reduction
template <typename S = double>
struct SeSample
{
    CMat<S> h_true; // composite channel under the deployed phase profile
    CMat<S> h_hat;  // reconstructed channel the beamformers were designed on
    CVec<S> f;
    CVec<S> w;
};

namespace detail
{

// Distance on the sine circle of circumference 2
template <typename S>
S wrap_sine_gap(S x)
{
    return x - S(2) * std::round(x / S(2));
}

constexpr Index kMaxAlignPaths = 8;

} // namespace detail

// Mean squared directional-sine error under the best truth-to-estimate
// assignment (exhaustive over permutations; path lists are short)
template <typename S>
S aligned_mse_sines(const RVec<S> &true_angles, const RVec<S> &est_angles)
{
    const Index l = true_angles.size();
    if (l != est_angles.size())
        throw std::invalid_argument("aligned_mse_sines: length mismatch");
    if (l == 0)
        throw std::invalid_argument("aligned_mse_sines: empty angle lists");
    if (l > detail::kMaxAlignPaths)
        throw std::invalid_argument("aligned_mse_sines: too many paths for exhaustive alignment");

    std::vector<Index> perm(static_cast<std::size_t>(l));
    std::iota(perm.begin(), perm.end(), Index(0));
    S best = std::numeric_limits<S>::infinity();
    do
    {
        S cost = 0;
        for (Index i = 0; i < l; ++i)
        {
            S diff = std::sin(true_angles[i]) - std::sin(est_angles[perm[std::size_t(i)]]);
            cost += diff * diff;
        }
        best = std::min(best, cost);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best / S(l);
}

// Joint stage-2 alignment: estimates are injectively matched to true pairs by
// minimum summed wrapped-frequency cost, then both MSEs are read off that
// matching. A bundle covering fewer pairs than the truth (partial estimation)
// is averaged over its own pairs and flagged.
template <typename S>
DeltaRhoMse<S> aligned_mse_delta_and_rho(const EstimateBundle<S> &bundle,
                                         const AngleDifferenceSet<S> &truth)
{
    const Index k_est = bundle.freq_diff_hat.size();
    const Index k_true = truth.freq_diffs.size();
    if (k_est == 0 || k_true == 0)
        throw std::invalid_argument("aligned_mse_delta_and_rho: empty estimate or truth");
    if (bundle.rho_hat.size() != k_est)
        throw std::invalid_argument("aligned_mse_delta_and_rho: bundle sizes disagree");
    if (truth.gains.size() != k_true)
        throw std::invalid_argument("aligned_mse_delta_and_rho: truth sizes disagree");
    if (k_est > k_true)
        throw std::invalid_argument("aligned_mse_delta_and_rho: more estimates than true pairs");
    if (k_true > detail::kMaxAlignPaths)
        throw std::invalid_argument(
            "aligned_mse_delta_and_rho: too many pairs for exhaustive alignment");

    std::vector<Index> perm(static_cast<std::size_t>(k_true));
    std::iota(perm.begin(), perm.end(), Index(0));
    S best_cost = std::numeric_limits<S>::infinity();
    std::vector<Index> best_map(static_cast<std::size_t>(k_est));
    do
    {
        S cost = 0;
        for (Index i = 0; i < k_est; ++i)
        {
            S gap = detail::wrap_sine_gap(truth.freq_diffs[perm[std::size_t(i)]] -
                                          bundle.freq_diff_hat[i]);
            cost += gap * gap;
        }
        if (cost < best_cost)
        {
            best_cost = cost;
            for (Index i = 0; i < k_est; ++i)
                best_map[std::size_t(i)] = perm[std::size_t(i)];
        }
    } while (std::next_permutation(perm.begin(), perm.end()));

    DeltaRhoMse<S> out;
    out.partial = k_est != k_true;
    for (Index i = 0; i < k_est; ++i)
    {
        Index j = best_map[std::size_t(i)];
        S gap = detail::wrap_sine_gap(truth.freq_diffs[j] - bundle.freq_diff_hat[i]);
        out.mse_sin_delta += gap * gap;
        out.mse_rho += std::norm(truth.gains[j] - bundle.rho_hat[i]);
    }
    out.mse_sin_delta /= S(k_est);
    out.mse_rho /= S(k_est);
    return out;
}

// Training-discounted rate bound: the estimation-error variance is the
// empirical variance of w^H (H - H_hat) f across the ensemble
template <typename S>
S effective_se_bound(const std::vector<SeSample<S>> &ensemble, S noise_var, Index t_train,
                     Index t_coherence)
{
    if (ensemble.size() < 2)
        throw std::invalid_argument("effective_se_bound: need at least two realizations");
    if (t_coherence < 1 || t_train < 0)
        throw std::invalid_argument("effective_se_bound: invalid slot counts");
    if (t_train > t_coherence)
        throw std::invalid_argument("effective_se_bound: training exceeds the coherence time");
    if (!(noise_var > S(0)))
        throw std::invalid_argument("effective_se_bound: noise variance must be > 0");

    const Index n = Index(ensemble.size());
    CVec<S> err(n);
    for (Index r = 0; r < n; ++r)
    {
        const auto &s = ensemble[std::size_t(r)];
        if (s.h_true.rows() != s.h_hat.rows() || s.h_true.cols() != s.h_hat.cols() ||
            s.w.size() != s.h_true.rows() || s.f.size() != s.h_true.cols())
            throw std::invalid_argument("effective_se_bound: inconsistent sample shapes");
        err[r] = (s.w.adjoint() * (s.h_true - s.h_hat) * s.f)(0);
    }
    std::complex<S> mean = err.mean();
    S var = (err.array() - mean).abs2().sum() / S(n);

    const S prefactor = S(t_coherence - t_train) / S(t_coherence);
    S rate = 0;
    for (Index r = 0; r < n; ++r)
    {
        const auto &s = ensemble[std::size_t(r)];
        S signal = std::norm((s.w.adjoint() * s.h_hat * s.f)(0));
        rate += std::log2(S(1) + signal / (noise_var + var));
    }
    return prefactor * rate / S(n);
}

// Squared distances after optimal phase alignment: 2 - 2|<v, v_o>| per vector
template <typename S>
std::pair<S, S> asd(const BeamformerPair<S> &designed, const BeamformerPair<S> &optimal)
{
    auto check_unit = [](const CVec<S> &v, const char *what) {
        if (v.size() == 0 || std::abs(v.norm() - S(1)) > S(1e-6))
            throw std::invalid_argument(std::string("asd: ") + what + " must be unit norm");
    };
    check_unit(designed.f, "designed f");
    check_unit(designed.w, "designed w");
    check_unit(optimal.f, "optimal f");
    check_unit(optimal.w, "optimal w");
    if (designed.f.size() != optimal.f.size() || designed.w.size() != optimal.w.size())
        throw std::invalid_argument("asd: vector lengths disagree");

    S df = std::max(S(0), S(2) - S(2) * std::abs(optimal.f.dot(designed.f)));
    S dw = std::max(S(0), S(2) - S(2) * std::abs(optimal.w.dot(designed.w)));
    return {df, dw};
}

} // namespace risce

#endif
