// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include <gtest/gtest.h>

#include "riszf/optimizer.hpp"
#include "test_util.hpp"

namespace riszf {
namespace {

TEST(ObjectiveContext, RayleighCaseIsScaledIdentity) {
  Rng rng = substream(1, Stream::kSelfCheck);
  const StatisticalCsi csi = testing::make_csi(10, 16, 3, 0.0, rng, 0.7);
  const ObjectiveContext ctx = build_objective_context(csi, 2.0, 0.5);
  EXPECT_LT((ctx.b - CMatrix::Identity(16, 16) / 16.0).cwiseAbs().maxCoeff(), 1e-15);
  for (int k = 0; k < 3; ++k) {
    const CMatrix want = (0.5 / (2.0 * 7)) * ctx.lambda_inv_diag(k) * CMatrix::Identity(16, 16) / 16.0;
    EXPECT_LT((ctx.a[k] - want).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(ObjectiveContext, Invariants) {
  Rng rng = substream(2, Stream::kSelfCheck);
  const StatisticalCsi csi = testing::make_csi(10, 16, 3, 1.5, rng, 0.7);
  const ObjectiveContext ctx = build_objective_context(csi, 2.0, 0.5);
  EXPECT_LT((ctx.b - ctx.b.adjoint()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<CMatrix>(ctx.b).eigenvalues().minCoeff(), 0.0);
  // s_k^H is row k of Lambda^-1 H1^H diag(a_N).
  const CMatrix rows = build_lambda(csi).lambda.inverse() * csi.h1_bar.adjoint() * csi.a_n.asDiagonal();
  for (int k = 0; k < 3; ++k) {
    EXPECT_LT((ctx.a[k] - ctx.a[k].adjoint()).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT((ctx.s[k].adjoint() - rows.row(k)).cwiseAbs().maxCoeff(), 1e-12);
    for (int t = 0; t < 5; ++t) {
      const CVector v = testing::random_phases(16, rng).v();
      EXPECT_GT(v.dot(ctx.a[k] * v).real(), 0.0);
    }
  }
  StatisticalCsi few = csi;
  few.a_m = CVector::Ones(3);
  EXPECT_THROW(build_objective_context(few, 1.0, 1.0), DomainError);
}

TEST(ObjectiveContext, ScalarInstanceMatchesBound) {
  Rng rng = substream(3, Stream::kSelfCheck);
  const StatisticalCsi csi = testing::make_csi(6, 1, 1, 1.3, rng, 0.8);
  const ObjectiveContext ctx = build_objective_context(csi, 1.0, 0.3);
  const PhaseShiftVector v = testing::random_phases(1, rng);
  const double bound = zf_rate_bound(csi, v, 1.0, 0.3).per_user(0);
  EXPECT_NEAR(sum_rate_objective(ctx, v), bound, 1e-12 * bound);
}

TEST(Objective, EqualsSummedBound) {
  Rng rng = substream(4, Stream::kSelfCheck);
  for (int i = 0; i < 30; ++i) {
    const StatisticalCsi csi = testing::make_csi(12, 36, 1 + i % 4, 0.2 * (i + 1), rng, 0.9);
    const ObjectiveContext ctx = build_objective_context(csi, 1.0, 0.05);
    const PhaseShiftVector v = testing::random_phases(36, rng);
    const double bound = zf_rate_bound(csi, v, 1.0, 0.05).sum();
    EXPECT_NEAR(sum_rate_objective(ctx, v), bound, 1e-10 * bound);
  }
}

TEST(Objective, ConstantWithoutLos) {
  Rng rng = substream(5, Stream::kSelfCheck);
  const StatisticalCsi csi = testing::make_csi(10, 16, 3, 0.0, rng, 0.7);
  const ObjectiveContext ctx = build_objective_context(csi, 2.0, 0.5);
  const double a = sum_rate_objective(ctx, testing::random_phases(16, rng));
  const double b = sum_rate_objective(ctx, testing::random_phases(16, rng));
  EXPECT_NEAR(a, b, 1e-12);
  const CVector g = sum_rate_gradient(ctx, testing::random_phases(16, rng));
  EXPECT_LT(g.norm(), kStationaryGradient);
}

TEST(Objective, NoRisReducesToRisFree) {
  Rng rng = substream(6, Stream::kSelfCheck);
  const StatisticalCsi csi = testing::make_csi(10, 16, 1, 2.0, rng, 0.0);
  const ObjectiveContext ctx = build_objective_context(csi, 2.0, 0.5);
  EXPECT_NEAR(sum_rate_objective(ctx, testing::random_phases(16, rng)), ris_free_rate(csi, 2.0, 0.5).sum(), 1e-12);
}

TEST(Objective, BrokenContextIsReported) {
  Rng rng = substream(7, Stream::kSelfCheck);
  const StatisticalCsi csi = testing::make_csi(10, 16, 2, 1.0, rng, 0.7);
  ObjectiveContext ctx = build_objective_context(csi, 2.0, 0.5);
  ctx.a[1] = -ctx.a[1];
  const PhaseShiftVector v = testing::random_phases(16, rng);
  EXPECT_THROW(sum_rate_objective(ctx, v), DomainError);
  EXPECT_THROW(sum_rate_gradient(ctx, v), DomainError);
}

TEST(Gradient, CentralDifferences) {
  Rng rng = substream(8, Stream::kSelfCheck);
  for (int i = 0; i < 50; ++i) {
    const StatisticalCsi csi = testing::make_csi(10, 16, 1 + i % 4, 0.5 + i % 3, rng, 0.6);
    const ObjectiveContext ctx = build_objective_context(csi, 1.0, 0.2);
    // Off the constraint set on purpose: the gradient holds on all of C^N.
    const CVector v = testing::random_cvector(16, rng);
    CVector e = testing::random_cvector(16, rng);
    e.normalize();
    const double eps = 1e-5;
    const double fd =
        (sum_rate_objective(ctx, CVector(v + eps * e)) - sum_rate_objective(ctx, CVector(v - eps * e))) / (2 * eps);
    const double an = 2.0 * sum_rate_gradient(ctx, v).dot(e).real();
    EXPECT_LE(std::abs(fd - an), 1e-6 * std::abs(an)) << i;
  }
}

TEST(Gradient, InvariantToCommonScaling) {
  Rng rng = substream(9, Stream::kSelfCheck);
  const StatisticalCsi csi = testing::make_csi(10, 16, 3, 1.0, rng, 0.6);
  ObjectiveContext ctx = build_objective_context(csi, 1.0, 0.2);
  const PhaseShiftVector v = testing::random_phases(16, rng);
  const CVector g = sum_rate_gradient(ctx, v);
  ctx.b *= 7.5;
  for (auto& a : ctx.a) a *= 7.5;
  EXPECT_LT((sum_rate_gradient(ctx, v) - g).norm(), 1e-12 * g.norm());
}

TEST(Projection, Examples) {
  Rng rng = substream(10, Stream::kSelfCheck);
  const PhaseShiftVector u = testing::random_phases(8, rng);
  EXPECT_LT((project_unit_modulus(u.v()).v() - u.v()).cwiseAbs().maxCoeff(), 1e-15);
  CVector v(3);
  v << cplx(3, 4), cplx(0, 0), cplx(-2, 0);
  const CVector p = project_unit_modulus(v).v();
  EXPECT_NEAR(std::abs(p(0) - cplx(0.6, 0.8)), 0.0, 1e-15);
  EXPECT_EQ(p(1), cplx(1, 0));
  EXPECT_NEAR(std::abs(p(2) - cplx(-1, 0)), 0.0, 1e-15);
}

TEST(Ascent, StationaryWithoutLos) {
  Rng rng = substream(11, Stream::kSelfCheck);
  const StatisticalCsi csi = testing::make_csi(10, 16, 3, 0.0, rng, 0.7);
  const ObjectiveContext ctx = build_objective_context(csi, 2.0, 0.5);
  const PhaseShiftVector v0 = testing::random_phases(16, rng);
  const AscentTrace tr = gradient_ascent(ctx, v0);
  EXPECT_TRUE(tr.converged);
  EXPECT_EQ(tr.iterations.size(), 1u);
  EXPECT_EQ(tr.final_phases.v(), v0.v());
  EXPECT_EQ(tr.final_objective(), sum_rate_objective(ctx, v0));
}

TEST(Ascent, SingleUserReachesCoherentAlignment) {
  Rng rng = substream(12, Stream::kSelfCheck);
  StatisticalCsi csi = testing::make_csi(16, 16, 1, 2.0, rng, 0.8);
  csi.h1_bar.col(0) = std::sqrt(csi.alpha(0)) * csi.a_n;  // user steering equals a_N
  const ObjectiveContext ctx = build_objective_context(csi, 1.0, 0.3);
  // Aligned design: v_n = exp(j (arg h1_n - arg a_n)) gives |u| = sqrt(alpha) N.
  CVector aligned(16);
  for (int n = 0; n < 16; ++n) aligned(n) = std::polar(1.0, std::arg(csi.h1_bar(n, 0)) - std::arg(csi.a_n(n)));
  const PhaseShiftVector va(aligned);
  EXPECT_NEAR(std::abs(effective_los_vector(csi, va)(0)), std::sqrt(csi.alpha(0)) * 16, 1e-12);
  const double best = sum_rate_objective(ctx, va);
  const AscentTrace tr = gradient_ascent(ctx, testing::random_phases(16, rng));
  EXPECT_GE(tr.final_objective(), best * (1 - 1e-3));
  EXPECT_LE(tr.final_objective(), best * (1 + 1e-12));
}

TEST(Ascent, MonotoneAndFeasible) {
  Rng rng = substream(13, Stream::kSelfCheck);
  for (int i = 0; i < 10; ++i) {
    const StatisticalCsi csi = testing::make_csi(12, 16, 1 + i % 4, 1.0 + i, rng, 0.5);
    const ObjectiveContext ctx = build_objective_context(csi, 1.0, 0.1);
    AscentOptions opts;
    opts.keep_iterates = true;
    const PhaseShiftVector v0 = testing::random_phases(16, rng);
    const AscentTrace tr = gradient_ascent(ctx, v0, opts);
    ASSERT_EQ(tr.iterates.size(), tr.iterations.size());
    for (std::size_t j = 1; j < tr.iterations.size(); ++j) {
      EXPECT_GE(tr.iterations[j].sum_rate, tr.iterations[j - 1].sum_rate - 1e-12);
      EXPECT_GT(tr.iterations[j].step, 0.0);
    }
    for (const auto& it : tr.iterates) EXPECT_LT((it.v().cwiseAbs().array() - 1.0).abs().maxCoeff(), 1e-12);
    EXPECT_GT(tr.final_objective(), sum_rate_objective(ctx, v0));
  }
}

TEST(Ascent, DefaultScenarioBeatsRandomPhases) {
  const ScenarioConfig cfg;
  const auto csi = build_statistical_csi(cfg);
  const LinkBudget link = link_budget(cfg);
  const ObjectiveContext ctx = build_objective_context(csi, link.p_watts, link.noise_watts);
  Rng rng = substream(cfg.seed, Stream::kRandomPhase);
  double random_avg = 0.0;
  for (int i = 0; i < 20; ++i) random_avg += sum_rate_objective(ctx, random_phase_baseline(cfg.N, rng)) / 20;
  const AscentTrace best = optimize_phases(ctx, 20, cfg.seed);
  EXPECT_GT(best.final_objective(), random_avg);
  EXPECT_GT(best.final_objective() - random_avg, 0.5);
}

TEST(Ascent, RestartSelectionIsDeterministic) {
  const ScenarioConfig cfg;
  const auto csi = build_statistical_csi(cfg);
  const LinkBudget link = link_budget(cfg);
  const ObjectiveContext ctx = build_objective_context(csi, link.p_watts, link.noise_watts);
  const AscentTrace a = optimize_phases(ctx, 3, 5, {}, 1);
  const AscentTrace b = optimize_phases(ctx, 3, 5, {}, 3);
  EXPECT_EQ(a.final_phases.v(), b.final_phases.v());
}

TEST(RandomPhase, Properties) {
  Rng a = substream(3, Stream::kRandomPhase), b = substream(3, Stream::kRandomPhase);
  const PhaseShiftVector va = random_phase_baseline(64, a);
  EXPECT_EQ(va.v(), random_phase_baseline(64, b).v());
  EXPECT_LT((va.v().cwiseAbs().array() - 1.0).abs().maxCoeff(), 1e-12);
  // E{v_n} = 0: each component has variance 1/2.
  Rng rng = substream(4, Stream::kRandomPhase);
  const int T = 100000;
  cplx sum = 0;
  for (int t = 0; t < T; ++t) sum += random_phase_baseline(1, rng).v()(0);
  const double se = std::sqrt(0.5 / T);
  EXPECT_LE(std::abs(sum.real() / T), 3 * se);
  EXPECT_LE(std::abs(sum.imag() / T), 3 * se);
}

}  // namespace
}  // namespace riszf
