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

#include "risce/anm.hpp"
#include "risce/rng.hpp"
#include "risce/toeplitz.hpp"
#include "support/sdp_oracle.hpp"

#include <cmath>
#include <complex>
#include <numbers>

using namespace risce;
using risce_test::atom;
using cd = std::complex<double>;

namespace
{

CMat<double> random_complex(Rng &rng, Index r, Index c)
{
    CMat<double> m(r, c);
    for (Index i = 0; i < r; ++i)
        for (Index j = 0; j < c; ++j)
            m(i, j) = rng.cgaussian(1.0);
    return m;
}

CMat<double> random_hermitian(Rng &rng, Index n)
{
    CMat<double> m = random_complex(rng, n, n);
    return (m + m.adjoint()) / 2.0;
}

} // namespace

TEST_CASE("toeplitz_from_row of the first unit vector is the identity")
{
    CVec<double> e1 = CVec<double>::Zero(5);
    e1[0] = 1.0;
    CHECK((toeplitz_from_row(e1) - CMat<double>::Identity(5, 5)).norm() == 0.0);
}

TEST_CASE("toeplitz_from_row structure")
{
    Rng rng(11);
    CVec<double> u1(6);
    for (Index k = 0; k < 6; ++k)
        u1[k] = rng.cgaussian(1.0);
    CMat<double> t = toeplitz_from_row(u1);

    CHECK((t - t.adjoint()).norm() < 1e-15);
    // first row matches u1 with the leading element realified
    CHECK(std::abs(t(0, 0) - cd(u1[0].real(), 0.0)) == 0.0);
    for (Index q = 1; q < 6; ++q)
        CHECK(t(0, q) == u1[q]);
    // constant along diagonals
    for (Index p = 1; p < 6; ++p)
        for (Index q = 1; q < 6; ++q)
            CHECK(t(p, q) == t(p - 1, q - 1));
}

TEST_CASE("adjoint identity for the real trace inner product")
{
    Rng rng(13);
    for (int trial = 0; trial < 30; ++trial)
    {
        Index n = 3 + (trial % 6);
        CVec<double> u(n);
        for (Index k = 0; k < n; ++k)
            u[k] = rng.cgaussian(1.0);
        CMat<double> m = random_complex(rng, n, n); // arbitrary, not Hermitian
        double lhs = (toeplitz_from_row(u).adjoint() * m).trace().real();
        double rhs = (u.adjoint() * adjoint_toeplitz(m))(0).real();
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("single-frequency autocorrelation row gives a rank-1 Toeplitz matrix")
{
    const Index n = 8;
    const double f = 0.23;
    CVec<double> u1(n);
    for (Index k = 0; k < n; ++k)
        u1[k] = std::polar(1.0, -2.0 * std::numbers::pi * f * double(k));
    CMat<double> t = toeplitz_from_row(u1);
    Eigen::SelfAdjointEigenSolver<CMat<double>> es(t);
    CHECK(es.eigenvalues()[n - 1] == doctest::Approx(double(n)).epsilon(1e-12));
    CHECK(std::abs(es.eigenvalues()[n - 2]) < 1e-10);
    // and the dominant quadratic form peaks at the planted frequency
    CHECK(risce_test::grid_dominant_frequency(t) == doctest::Approx(f).epsilon(2e-4));
}

TEST_CASE("psd_project trivial cases")
{
    CHECK((psd_project(CMat<double>(CMat<double>::Identity(4, 4))) -
           CMat<double>::Identity(4, 4))
              .norm() < 1e-14);

    CMat<double> d = CMat<double>::Zero(2, 2);
    d(0, 0) = 1.0;
    d(1, 1) = -1.0;
    CMat<double> p = psd_project(d);
    CHECK(std::abs(p(0, 0) - 1.0) < 1e-14);
    CHECK(std::abs(p(1, 1)) < 1e-14);
    CHECK(std::abs(p(0, 1)) < 1e-14);
}

TEST_CASE("psd_project equals the eigen-clipping oracle and is idempotent")
{
    Rng rng(17);
    for (int trial = 0; trial < 10; ++trial)
    {
        CMat<double> m = random_hermitian(rng, 7);
        CMat<double> p = psd_project(m);

        Eigen::SelfAdjointEigenSolver<CMat<double>> es(m);
        CMat<double> oracle = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).asDiagonal() *
                              es.eigenvectors().adjoint();
        CHECK((p - oracle).norm() < 1e-10 * std::max(1.0, m.norm()));
        CHECK((psd_project(p) - p).norm() < 1e-10 * std::max(1.0, p.norm()));

        Eigen::SelfAdjointEigenSolver<CMat<double>> check(p);
        CHECK(check.eigenvalues().minCoeff() >= -1e-12);
    }
}

TEST_CASE("psd_project returns the nearest PSD matrix")
{
    Rng rng(19);
    CMat<double> m = random_hermitian(rng, 6);
    CMat<double> p = psd_project(m);
    double dist = (m - p).norm();
    for (int trial = 0; trial < 20; ++trial)
    {
        CMat<double> half = random_complex(rng, 6, 6);
        CMat<double> competitor = half * half.adjoint(); // arbitrary PSD point
        CHECK(dist <= (m - competitor).norm() + 1e-12);
    }
}

TEST_CASE("psd_project rejects non-Hermitian input")
{
    Rng rng(23);
    CMat<double> m = random_complex(rng, 5, 5);
    CHECK_THROWS_AS((void)psd_project(m), std::invalid_argument);
    CHECK_THROWS_AS((void)psd_project(CMat<double>(CMat<double>::Zero(3, 4))),
                    std::invalid_argument);
}

TEST_CASE("regularization weight formula")
{
    CHECK(regularization_weight<double>(RegKind::stage1_ms, 1.0, 16) ==
          doctest::Approx(6.6604368892615815).epsilon(1e-12));
    // quadrupling the noise power doubles the weight
    double w1 = regularization_weight<double>(RegKind::stage2, 2.5, 64);
    double w4 = regularization_weight<double>(RegKind::stage2, 10.0, 64);
    CHECK(w4 == doctest::Approx(2.0 * w1).epsilon(1e-12));
    // per-kind constants scale independently
    RegConstants<double> c{2.0, 3.0, 5.0};
    CHECK(regularization_weight<double>(RegKind::stage1_bs, 1.0, 16, c) ==
          doctest::Approx(3.0 * 6.6604368892615815).epsilon(1e-12));
    CHECK_THROWS_AS((void)regularization_weight<double>(RegKind::stage2, 0.0, 16),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)regularization_weight<double>(RegKind::stage2, 1.0, 1),
                    std::invalid_argument);
}

TEST_CASE("solve on zero observations returns the zero solution")
{
    Rng rng(29);
    ToeplitzSdpProblem<double> p;
    p.A = random_complex(rng, 6, 8);
    p.amb_dim = 8;
    p.Y = CMat<double>::Zero(6, 2);
    p.reg = 1.0;
    ToeplitzSdpSolution<double> s = solve(p);
    CHECK(s.converged);
    CHECK(s.u1.norm() < 1e-5);
    CHECK(s.U_hat.norm() < 1e-5);
    CHECK(s.Z_hat.norm() < 1e-5);
    CHECK(std::abs(s.objective) < 1e-4);
}

TEST_CASE("overwhelming regularization shrinks the latent block")
{
    Rng rng(31);
    RVec<double> freqs;
    ToeplitzSdpProblem<double> p =
        risce_test::planted_instance(rng, 8, 2, 6, 2, 0.05, 1.0, 1.0, &freqs);
    p.reg = 1e6 * p.Y.norm();
    ToeplitzSdpSolution<double> s = solve(p);
    CHECK(s.U_hat.norm() < 1e-3 * p.Y.norm());
}

TEST_CASE("noiseless single atom: rank-1 recovery and frequency accuracy")
{
    Rng rng(37);
    RVec<double> freqs;
    ToeplitzSdpProblem<double> p =
        risce_test::planted_instance(rng, 8, 2, 8, 1, 0.0, 0.0, 1.0, &freqs);
    p.reg = 1e-3 * p.Y.norm();
    ToeplitzSdpSolution<double> s = solve(p);

    CMat<double> t = toeplitz_from_row(s.u1);
    Eigen::SelfAdjointEigenSolver<CMat<double>> es(t);
    double l1 = es.eigenvalues()[7], l2 = es.eigenvalues()[6];
    CHECK(l1 > 0);
    CHECK(l2 / l1 < 1e-3);

    double f_solver = risce_test::grid_dominant_frequency(t);
    CHECK(std::abs(f_solver - freqs[0]) < 1e-3);

    double f_oracle = risce_test::grid_fit_single_atom(p.Y, p.scale * p.A);
    CHECK(std::abs(f_solver - f_oracle) < 2e-4);
}

TEST_CASE("noiseless MMV instances match the grid-search oracle")
{
    Rng rng(41);
    for (int trial = 0; trial < 5; ++trial)
    {
        Index amb = 6 + (trial % 3);
        RVec<double> freqs;
        ToeplitzSdpProblem<double> p =
            risce_test::planted_instance(rng, amb, 2, amb, 1, 0.0, 0.0, 1.0, &freqs);
        p.reg = 1e-3 * p.Y.norm();
        ToeplitzSdpSolution<double> s = solve(p);
        double f_solver = risce_test::grid_dominant_frequency(toeplitz_from_row(s.u1));
        double f_oracle = risce_test::grid_fit_single_atom(p.Y, p.scale * p.A);
        double df = std::abs(f_solver - f_oracle);
        CHECK(std::min(df, 1.0 - df) < 2e-4);
    }
}

TEST_CASE("objective matches the projected-gradient oracle on small instances")
{
    Rng rng(43);
    for (int trial = 0; trial < 6; ++trial)
    {
        Index amb = 5 + (trial % 4);
        Index cols = 1 + (trial % 3);
        Index rows = 4 + (trial % 5);
        ToeplitzSdpProblem<double> p = risce_test::planted_instance(
            rng, amb, cols, rows, 1 + (trial % 2), 0.3, 0.8 + 0.3 * trial, 1.0 + (trial % 2));
        ToeplitzSdpSolution<double> s = solve(p);
        risce_test::OracleResult o = risce_test::sdp_oracle(p);
        CHECK(std::abs(s.objective - o.objective) <= 1e-4 * std::max(1.0, std::abs(o.objective)));
    }
}

TEST_CASE("solution block is PSD after the feasibility polish")
{
    Rng rng(47);
    for (int trial = 0; trial < 6; ++trial)
    {
        ToeplitzSdpProblem<double> p =
            risce_test::planted_instance(rng, 8, 2, 6, 2, 0.5, 2.0, 1.0);
        ToeplitzSdpSolution<double> s = solve(p);
        Index n = p.amb_dim, m = p.Y.cols();
        CMat<double> block(n + m, n + m);
        block.topLeftCorner(n, n) = toeplitz_from_row(s.u1);
        block.topRightCorner(n, m) = s.U_hat;
        block.bottomLeftCorner(m, n) = s.U_hat.adjoint();
        block.bottomRightCorner(m, m) = s.Z_hat;
        Eigen::SelfAdjointEigenSolver<CMat<double>> es(block);
        double spectral = std::max(std::abs(es.eigenvalues()[0]), es.eigenvalues()[n + m - 1]);
        CHECK(es.eigenvalues().minCoeff() >= -1e-7 * std::max(1.0, spectral));
    }
}

TEST_CASE("converged runs report residuals below tolerance")
{
    Rng rng(53);
    ToeplitzSdpProblem<double> p = risce_test::planted_instance(rng, 8, 3, 6, 2, 0.2, 1.5, 1.0);
    SolveOptions<double> opts;
    ToeplitzSdpSolution<double> s = solve(p, opts);
    CHECK(s.converged);
    CHECK(s.iterations <= opts.max_iter);
    CHECK(s.primal_residual <= 11 * opts.eps_abs + opts.eps_rel * 1e3);
    CHECK(s.dual_residual <= 11 * opts.eps_abs + opts.eps_rel * 1e3);
}

TEST_CASE("objective trace decreases up to splitting oscillation")
{
    Rng rng(59);
    ToeplitzSdpProblem<double> p = risce_test::planted_instance(rng, 8, 2, 6, 2, 0.3, 1.0, 1.0);
    SolveOptions<double> opts;
    opts.trace = true;
    ToeplitzSdpSolution<double> s = solve(p, opts);
    REQUIRE(s.trace.size() > 10);

    double running_min = s.trace[0][0];
    double worst_rise = 0;
    for (std::size_t k = 10; k < s.trace.size(); ++k)
    {
        worst_rise = std::max(worst_rise, s.trace[k][0] - running_min);
        running_min = std::min(running_min, s.trace[k][0]);
    }
    double scale = 1.0 + std::abs(s.objective);
    CHECK(worst_rise <= 1e-2 * scale);
    CHECK(s.objective <= running_min + 1e-3 * scale);
}

TEST_CASE("solver is deterministic")
{
    Rng rng(61);
    ToeplitzSdpProblem<double> p = risce_test::planted_instance(rng, 7, 2, 6, 2, 0.4, 1.2, 2.0);
    ToeplitzSdpSolution<double> a = solve(p);
    ToeplitzSdpSolution<double> b = solve(p);
    CHECK((a.u1 - b.u1).norm() == 0.0);
    CHECK((a.U_hat - b.U_hat).norm() == 0.0);
    CHECK((a.Z_hat - b.Z_hat).norm() == 0.0);
    CHECK(a.objective == b.objective);
    CHECK(a.iterations == b.iterations);
}

TEST_CASE("malformed problems are rejected")
{
    Rng rng(67);
    ToeplitzSdpProblem<double> p = risce_test::planted_instance(rng, 6, 2, 5, 1, 0.1, 1.0, 1.0);

    ToeplitzSdpProblem<double> bad = p;
    bad.reg = 0.0;
    CHECK_THROWS_AS((void)solve(bad), std::invalid_argument);

    bad = p;
    bad.amb_dim = 5;
    CHECK_THROWS_AS((void)solve(bad), std::invalid_argument);

    bad = p;
    bad.Y(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS((void)solve(bad), std::invalid_argument);
}
