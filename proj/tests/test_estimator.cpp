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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "risce/estimator.hpp"

#include <cmath>
#include <numbers>

using namespace risce;

namespace
{

ArrayGeometry<double> geom(Index n) { return ArrayGeometry<double>{n, 0.5}; }

double wrap2(double x) { return 2.0 * (x / 2.0 - std::round(x / 2.0)); }

bool bundles_identical(const EstimateBundle<double> &a, const EstimateBundle<double> &b)
{
    if (a.index_map != b.index_map || a.overhead != b.overhead)
        return false;
    if ((a.theta_br_hat - b.theta_br_hat).cwiseAbs().maxCoeff() != 0.0)
        return false;
    if ((a.phi_rm_hat - b.phi_rm_hat).cwiseAbs().maxCoeff() != 0.0)
        return false;
    if ((a.freq_diff_hat - b.freq_diff_hat).cwiseAbs().maxCoeff() != 0.0)
        return false;
    if ((a.rho_hat - b.rho_hat).cwiseAbs().maxCoeff() != 0.0)
        return false;
    return true;
}

} // namespace

TEST_CASE("stage 1 recovers both angles in the near-noiseless regime")
{
    Rng rng(1201);
    auto r = sample_realization<double>(rng, 1, 1, geom(16), geom(32), geom(16));
    SoundingConfig<double> cfg{10, 10, 10, 8, 1e-4};
    Rng frng(1202);
    auto frame0 = gen_stage1_frame(cfg, r, frng);
    SolveOptions<double> opts;
    opts.max_iter = 8000;
    auto s1 = stage1_estimate(frame0, cfg, 1, 1, r.geom_bs, r.geom_ms, opts);
    REQUIRE(s1.theta_br_hat.size() == 1);
    REQUIRE(s1.phi_rm_hat.size() == 1);
    CHECK(std::abs(s1.theta_br_hat[0] - r.br.aod[0]) < 1e-3);
    CHECK(std::abs(s1.phi_rm_hat[0] - r.rm.aoa[0]) < 1e-3);
    CHECK(s1.diagnostics.size() == 2);
}

TEST_CASE("stage 1 estimates are invariant under true path reordering")
{
    Rng rng(1301);
    auto r = sample_realization<double>(rng, 2, 2, geom(16), geom(32), geom(16));
    PathSet<double> br2 = r.br, rm2 = r.rm;
    br2.aod.reverseInPlace();
    br2.aoa.reverseInPlace();
    br2.gains.reverseInPlace();
    rm2.aod.reverseInPlace();
    rm2.aoa.reverseInPlace();
    rm2.gains.reverseInPlace();
    auto r2 = make_realization(br2, rm2, r.geom_bs, r.geom_ris, r.geom_ms);

    SoundingConfig<double> cfg{10, 10, 10, 8, 1e-4};
    Rng a(1302), b(1302);
    auto fa = gen_stage1_frame(cfg, r, a);
    auto fb = gen_stage1_frame(cfg, r2, b);
    auto sa = stage1_estimate(fa, cfg, 2, 2, r.geom_bs, r.geom_ms);
    auto sb = stage1_estimate(fb, cfg, 2, 2, r.geom_bs, r.geom_ms);
    CHECK((sa.theta_br_hat - sb.theta_br_hat).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((sa.phi_rm_hat - sb.phi_rm_hat).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("stage-1 error trends down as noise drops a hundredfold")
{
    SolveOptions<double> opts;
    opts.eps_abs = opts.eps_rel = 1e-5;
    double mse_high = 0.0, mse_low = 0.0;
    Rng rng(1401);
    for (int trial = 0; trial < 100; ++trial)
    {
        auto r = sample_realization<double>(rng, 1, 1, geom(8), geom(16), geom(8));
        for (double sigma2 : {0.5, 0.005})
        {
            SoundingConfig<double> cfg{10, 10, 4, 8, sigma2};
            Rng frng = rng.child(1000 + trial);
            auto frame0 = gen_stage1_frame(cfg, r, frng);
            auto s1 = stage1_estimate(frame0, cfg, 1, 1, r.geom_bs, r.geom_ms, opts);
            double err = std::pow(s1.theta_br_hat[0] - r.br.aod[0], 2) +
                         std::pow(s1.phi_rm_hat[0] - r.rm.aoa[0], 2);
            (sigma2 > 0.1 ? mse_high : mse_low) += err;
        }
    }
    CHECK(mse_low < mse_high);
}

TEST_CASE("stage 2 recovers the gain product and angle difference")
{
    Rng rng(1501);
    auto r = sample_realization<double>(rng, 1, 1, geom(16), geom(64), geom(16));
    SoundingConfig<double> cfg{10, 10, 10, 8, 1e-4};
    Rng frng(1502);
    RVec<double> th(1), ph(1);
    th << r.br.aod[0];
    ph << r.rm.aoa[0];
    auto frames = gen_stage2_frames(cfg, r, th, ph, frng);
    auto stacked = stack_stage2_rows(frames);
    SolveOptions<double> opts;
    opts.max_iter = 8000;
    auto s2 = stage2_estimate(stacked.rows, stacked.measurement, cfg, std::sqrt(16.0 * 16.0),
                              0.5, opts);
    REQUIRE(s2.freq_diff_hat.size() == 1);
    std::complex<double> rho = r.rm.gains[0] * r.br.gains[0];
    double truth = wrap2(std::sin(r.br.aoa[0]) - std::sin(r.rm.aod[0]));
    CHECK(std::abs(wrap2(s2.freq_diff_hat[0] - truth)) < 2e-4);
    CHECK(std::abs(s2.rho_hat[0] - rho) < 1e-3 * std::abs(rho));
}

TEST_CASE("zero stage-2 rows shrink all gain estimates to zero")
{
    Rng rng(1601);
    const Index t_count = 8, n_r = 16;
    CMat<double> omega_bar(t_count, n_r);
    for (Index t = 0; t < t_count; ++t)
        for (Index k = 0; k < n_r; ++k)
            omega_bar(t, k) = rng.unit_phase();
    CMat<double> y = CMat<double>::Zero(4, t_count);
    SoundingConfig<double> cfg{10, 10, t_count, 8, 0.1};
    auto s2 = stage2_estimate(y, omega_bar, cfg, 16.0, 0.5);
    REQUIRE(s2.rho_hat.size() == 4);
    for (Index i = 0; i < 4; ++i)
        CHECK(std::abs(s2.rho_hat[i]) == 0.0);
}

TEST_CASE("stage-2 problems are independent across rows")
{
    Rng rng(1701);
    auto r = sample_realization<double>(rng, 2, 2, geom(8), geom(16), geom(8));
    SoundingConfig<double> cfg{10, 10, 6, 8, 0.01};
    Rng frng(1702);
    auto frames = gen_stage2_frames(cfg, r, r.br.aod, r.rm.aoa, frng);
    auto stacked = stack_stage2_rows(frames);
    auto base = stage2_estimate(stacked.rows, stacked.measurement, cfg, 8.0, 0.5);

    Eigen::PermutationMatrix<Eigen::Dynamic> perm(4);
    perm.indices() << 2, 0, 3, 1;
    CMat<double> shuffled = perm * stacked.rows;
    auto moved = stage2_estimate(shuffled, stacked.measurement, cfg, 8.0, 0.5);
    for (Index i = 0; i < 4; ++i)
    {
        Index j = perm.indices()[i]; // row i of base landed at row j
        CHECK(base.freq_diff_hat[i] == moved.freq_diff_hat[j]);
        CHECK(base.rho_hat[i] == moved.rho_hat[j]);
    }
}

TEST_CASE("full pipeline is deterministic and reports the training overhead")
{
    Rng rng(1801);
    auto r = sample_realization<double>(rng, 1, 1, geom(8), geom(16), geom(8));
    SoundingConfig<double> cfg{10, 10, 6, 8, 0.05};
    Rng a(1802), b(1802);
    auto ba = run_full_pipeline(cfg, r, a);
    auto bb = run_full_pipeline(cfg, r, b);
    CHECK(bundles_identical(ba, bb));
    CHECK(ba.overhead == training_overhead(cfg, 1, 1));
    CHECK(ba.overhead == 10 * 2 + 6);
    CHECK(ba.diagnostics.size() == 3);
    REQUIRE(ba.index_map.size() == 1);
}

TEST_CASE("full pipeline index map is bijective in estimated order")
{
    Rng rng(1901);
    auto r = sample_realization<double>(rng, 2, 2, geom(8), geom(16), geom(8));
    SoundingConfig<double> cfg{10, 10, 4, 8, 0.05};
    SolveOptions<double> opts;
    opts.eps_abs = opts.eps_rel = 1e-4;
    Rng frng(1902);
    auto bundle = run_full_pipeline(cfg, r, frng, opts);
    REQUIRE(bundle.index_map.size() == 4);
    std::vector<std::pair<Index, Index>> want = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
    CHECK(bundle.index_map == want);
    CHECK(bundle.freq_diff_hat.size() == 4);
    CHECK(bundle.rho_hat.size() == 4);
    CHECK(bundle.diagnostics.size() == 6);
}

TEST_CASE("partial pipeline degenerates to the full one for single paths")
{
    Rng rng(2001);
    auto r = sample_realization<double>(rng, 1, 1, geom(8), geom(16), geom(8));
    SoundingConfig<double> cfg{10, 10, 6, 8, 0.05};
    Rng a(2002), b(2002);
    auto full = run_full_pipeline(cfg, r, a);
    auto part = run_partial_pipeline(cfg, r, b);
    CHECK(bundles_identical(full, part));
}

TEST_CASE("partial pipeline reduces the stage-2 overhead")
{
    Rng rng(2101);
    auto r = sample_realization<double>(rng, 2, 2, geom(8), geom(16), geom(8));
    SoundingConfig<double> cfg{10, 10, 10, 8, 0.1};
    SolveOptions<double> opts;
    opts.eps_abs = opts.eps_rel = 1e-4;
    Rng frng(2102);
    auto part = run_partial_pipeline(cfg, r, frng, opts);
    CHECK(part.overhead == 10 * 2 + 10);
    CHECK(part.overhead < training_overhead(cfg, 2, 2));
    REQUIRE(part.index_map.size() == 1);
    CHECK(part.freq_diff_hat.size() == 1);
    CHECK(part.rho_hat.size() == 1);
    CHECK(part.diagnostics.size() == 3);

    SoundingConfig<double> tight = cfg;
    tight.t_blocks = 3;
    Rng frng2(2103);
    CHECK_THROWS_AS((void)run_partial_pipeline(tight, r, frng2, opts), std::invalid_argument);
}

TEST_CASE("partial pipeline locks onto the dominant pair under uneven gains")
{
    SolveOptions<double> opts;
    opts.eps_abs = opts.eps_rel = 1e-4;
    Rng rng(2201);
    int hits = 0;
    const int trials = 200;
    for (int trial = 0; trial < trials; ++trial)
    {
        auto r = sample_realization<double>(rng, 2, 2, geom(16), geom(32), geom(16),
                                            GainProfile::inhomogeneous);
        SoundingConfig<double> cfg{10, 10, 13, 8, 0.1};
        Rng frng = rng.child(4000 + trial);
        auto bundle = run_partial_pipeline(cfg, r, frng, opts);
        auto [m, n] = bundle.index_map[0];
        // estimated indices of the strong (first) true path on each hop
        Index want_m = (std::abs(bundle.phi_rm_hat[0] - r.rm.aoa[0]) <
                        std::abs(bundle.phi_rm_hat[1] - r.rm.aoa[0]))
                           ? 0
                           : 1;
        Index want_n = (std::abs(bundle.theta_br_hat[0] - r.br.aod[0]) <
                        std::abs(bundle.theta_br_hat[1] - r.br.aod[0]))
                           ? 0
                           : 1;
        if (m == want_m && n == want_n)
            ++hits;
    }
    CHECK(double(hits) / trials > 0.95);
}

TEST_CASE("aligned pilot leakage matches the closed-form Dirichlet sum")
{
    const Index n_b = 16;
    RVec<double> angles(3);
    angles << -0.9, 0.2, 0.75;
    CMat<double> a = steering_matrix(geom(n_b), angles);
    CMat<double> x = a / std::sqrt(double(n_b));
    CMat<double> leak = a.adjoint() * x -
                        std::sqrt(double(n_b)) * CMat<double>::Identity(3, 3);

    double sum = 0.0;
    for (Index i = 0; i < 3; ++i)
        for (Index j = 0; j < 3; ++j)
        {
            if (i == j)
                continue;
            double df = 0.5 * (std::sin(angles[j]) - std::sin(angles[i]));
            double d = std::sin(std::numbers::pi * double(n_b) * df) /
                       std::sin(std::numbers::pi * df);
            sum += d * d / double(n_b);
        }
    CHECK(std::abs(leak.norm() - std::sqrt(sum)) < 1e-10);
}

TEST_CASE("end-to-end noiseless recovery for two paths per hop")
{
    Rng rng(2301);
    auto r = sample_realization<double>(rng, 2, 2, geom(16), geom(32), geom(16));
    SoundingConfig<double> cfg{10, 10, 10, 8, 1e-4};
    Rng frng(2302);
    SolveOptions<double> opts;
    opts.max_iter = 8000;
    auto bundle = run_full_pipeline(cfg, r, frng, opts);

    RVec<double> th_true = r.br.aod, ph_true = r.rm.aoa;
    std::sort(th_true.begin(), th_true.end());
    std::sort(ph_true.begin(), ph_true.end());
    for (Index l = 0; l < 2; ++l)
    {
        CHECK(std::abs(bundle.theta_br_hat[l] - th_true[l]) < 1e-3);
        CHECK(std::abs(bundle.phi_rm_hat[l] - ph_true[l]) < 1e-3);
    }

    // per-pair truth located through the estimated angle ordering
    for (std::size_t i = 0; i < bundle.index_map.size(); ++i)
    {
        auto [m, n] = bundle.index_map[i];
        Index tm = (std::abs(ph_true[m] - r.rm.aoa[0]) < std::abs(ph_true[m] - r.rm.aoa[1]))
                       ? 0
                       : 1;
        Index tn = (std::abs(th_true[n] - r.br.aod[0]) < std::abs(th_true[n] - r.br.aod[1]))
                       ? 0
                       : 1;
        std::complex<double> rho = r.rm.gains[tm] * r.br.gains[tn];
        double diff = wrap2(std::sin(r.br.aoa[tn]) - std::sin(r.rm.aod[tm]));
        CHECK(std::abs(wrap2(bundle.freq_diff_hat[Index(i)] - diff)) < 2e-3);
        // gain products absorb the residual inter-path beam leakage, so the
        // attainable accuracy is a few percent even without noise
        CHECK(std::abs(bundle.rho_hat[Index(i)] - rho) < 5e-2 * std::abs(rho));
    }
}
