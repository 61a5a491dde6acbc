// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "riszf/analysis.hpp"
#include "riszf/channels.hpp"
#include "riszf/detection.hpp"
#include "riszf/optimizer.hpp"
#include "riszf/random.hpp"

namespace riszf {

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double tolerance = 0.0;
};

struct SelfCheckOptions {
  std::uint64_t seed = 1;
  bool inject_gradient_fault = false;  // negative control: flips the gradient sign
  std::size_t wishart_draws = 100000;
};

namespace detail {

/// Random CSI with unit-order gains so checks are not dominated by scaling.
inline StatisticalCsi random_csi(int M, int N, int K, double delta, Rng& rng) {
  std::uniform_real_distribution<double> gain(0.2, 2.0);
  StatisticalCsi csi;
  csi.h1_bar.resize(N, K);
  csi.alpha.resize(K);
  csi.gamma.resize(K);
  for (int k = 0; k < K; ++k) {
    csi.alpha(k) = gain(rng);
    csi.gamma(k) = gain(rng);
    const double az = uniform_angle(rng), el = uniform_angle(rng);
    csi.h1_bar.col(k) = std::sqrt(csi.alpha(k)) * steering_vector(N, az, el, 0.5).entries;
  }
  const double az_m = uniform_angle(rng), el_m = uniform_angle(rng);
  const double az_n = uniform_angle(rng), el_n = uniform_angle(rng);
  csi.a_m = array_response(M, az_m, el_m, 0.5).entries;
  csi.a_n = steering_vector(N, az_n, el_n, 0.5).entries;
  csi.beta = gain(rng);
  csi.delta = delta;
  return csi;
}

inline CVector random_complex_vector(int n, Rng& rng) {
  CVector v(n);
  for (int i = 0; i < n; ++i) v(i) = complex_gaussian(rng);
  return v;
}

}  // namespace detail

/// Property checks across the library. Each result records the worst
/// measured deviation and the tolerance it was held to.
inline std::vector<CheckResult> run_selfcheck(const SelfCheckOptions& opts = {}) {
  std::vector<CheckResult> out;
  Rng rng = substream(opts.seed, Stream::kSelfCheck);

  {  // directional derivative vs central differences
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const StatisticalCsi csi = detail::random_csi(8, 16, 3, 1.0 + i % 3, rng);
      const ObjectiveContext ctx = build_objective_context(csi, 1.0, 0.1);
      const PhaseShiftVector v = random_phase_baseline(csi.N(), rng);
      CVector e = detail::random_complex_vector(csi.N(), rng);
      e.normalize();
      CVector g = sum_rate_gradient(ctx, v);
      if (opts.inject_gradient_fault) g = -g;
      const double eps = 1e-5;
      const double fd =
          (sum_rate_objective(ctx, CVector(v.v() + eps * e)) - sum_rate_objective(ctx, CVector(v.v() - eps * e))) /
          (2 * eps);
      const double an = 2.0 * g.dot(e).real();
      worst = std::max(worst, std::abs(fd - an) / std::max(std::abs(an), 1e-12));
    }
    out.push_back({"gradient vs central differences", worst <= 1e-6, worst, 1e-6});
  }
  {  // Woodbury evaluation vs direct inverse
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const StatisticalCsi csi = detail::random_csi(8, 16, 4, 1.5, rng);
      const CVector u = effective_los_vector(csi, random_phase_baseline(csi.N(), rng));
      const CMatrix lam = build_lambda(csi).lambda;
      const RVector a = inverse_diagonal_woodbury(lam, u, csi.beta * csi.delta);
      const RVector b = inverse_diagonal_direct(lam, u, csi.beta * csi.delta);
      worst = std::max(worst, ((a - b).cwiseAbs().array() / b.cwiseAbs().array()).maxCoeff());
    }
    out.push_back({"Woodbury vs direct inverse", worst <= 1e-10, worst, 1e-10});
  }
  {  // objective rewrite vs the per-user bound, and the ordering of bounds
    double worst = 0.0;
    bool ordered = true;
    for (int i = 0; i < 20; ++i) {
      const StatisticalCsi csi = detail::random_csi(10, 16, 3, 2.0, rng);
      const PhaseShiftVector v = random_phase_baseline(csi.N(), rng);
      const ObjectiveContext ctx = build_objective_context(csi, 2.0, 0.5);
      const double bound = zf_rate_bound(csi, v, 2.0, 0.5).sum();
      worst = std::max(worst, std::abs(sum_rate_objective(ctx, v) - bound) / bound);
      const RVector lower = phase_free_rate_bound(csi, 2.0, 0.5, LowerBoundMode::kExact).per_user;
      const RVector full = zf_rate_bound(csi, v, 2.0, 0.5).per_user;
      ordered = ordered && (lower.array() <= full.array() + 1e-12).all();
    }
    out.push_back({"objective equals summed bound", worst <= 1e-10, worst, 1e-10});
    out.push_back({"los-free bound <= ZF bound", ordered, ordered ? 0.0 : 1.0, 0.0});
  }
  {  // delta = 0 removes the phase dependence
    const StatisticalCsi csi = detail::random_csi(8, 16, 3, 0.0, rng);
    const double ref = zf_rate_bound(csi, random_phase_baseline(csi.N(), rng), 1.0, 0.1).sum();
    double worst = 0.0;
    for (int i = 0; i < 10; ++i)
      worst = std::max(worst, std::abs(zf_rate_bound(csi, random_phase_baseline(csi.N(), rng), 1.0, 0.1).sum() - ref));
    out.push_back({"phase independence at delta = 0", worst <= 1e-12, worst, 1e-12});
  }
  {  // ZF nulls interference
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      CMatrix q(8, 3);
      fill_complex_gaussian(q, rng);
      const CMatrix r = zf_detector(q).adjoint() * q - CMatrix::Identity(3, 3);
      worst = std::max(worst, r.cwiseAbs().maxCoeff());
    }
    out.push_back({"ZF detector A^H Q = I", worst <= 1e-9, worst, 1e-9});
  }
  {  // central Wishart inverse moment at delta = 0
    const StatisticalCsi csi = detail::random_csi(8, 4, 2, 0.0, rng);
    const PhaseShiftVector v = random_phase_baseline(csi.N(), rng);
    const CMatrix analytic = wishart_inverse_expectation(csi, v);
    const RealizationSampler sampler(csi, v);
    CMatrix acc = CMatrix::Zero(2, 2);
    for (std::size_t t = 0; t < opts.wishart_draws; ++t) {
      Rng r = substream(opts.seed, Stream::kSelfCheck, t + 1);
      acc += gram_inverse(sampler.draw(r).q);
    }
    acc /= static_cast<double>(opts.wishart_draws);
    const double worst = ((acc - analytic).cwiseAbs().array() / analytic.cwiseAbs().array()).maxCoeff();
    out.push_back({"Wishart inverse mean at delta = 0", worst <= 0.02, worst, 0.02});
  }
  {  // ascent never decreases the objective and keeps unit modulus
    double worst_drop = 0.0;
    double worst_modulus = 0.0;
    for (int i = 0; i < 5; ++i) {
      const StatisticalCsi csi = detail::random_csi(16, 16, 3, 2.0, rng);
      const ObjectiveContext ctx = build_objective_context(csi, 1.0, 0.1);
      AscentOptions ao;
      ao.keep_iterates = true;
      const AscentTrace tr = gradient_ascent(ctx, random_phase_baseline(csi.N(), rng), ao);
      for (std::size_t j = 1; j < tr.iterations.size(); ++j)
        worst_drop = std::max(worst_drop, tr.iterations[j - 1].sum_rate - tr.iterations[j].sum_rate);
      for (const auto& it : tr.iterates)
        worst_modulus = std::max(worst_modulus, (it.v().cwiseAbs().array() - 1.0).abs().maxCoeff());
    }
    out.push_back({"monotone ascent", worst_drop <= 1e-12, worst_drop, 1e-12});
    out.push_back({"unit-modulus iterates", worst_modulus <= 1e-12, worst_modulus, 1e-12});
  }
  return out;
}

inline bool print_selfcheck(std::ostream& os, const std::vector<CheckResult>& results) {
  bool all = true;
  for (const auto& r : results) {
    char line[160];
    std::snprintf(line, sizeof line, "[%s] %-36s measured=%.3e tol=%.1e", r.passed ? "PASS" : "FAIL", r.name.c_str(),
                  r.measured, r.tolerance);
    os << line << '\n';
    all = all && r.passed;
  }
  os << (all ? "all checks passed" : "some checks FAILED") << '\n';
  return all;
}

}  // namespace riszf
