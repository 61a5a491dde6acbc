// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include "riszf/analysis.hpp"
#include "riszf/channels.hpp"
#include "riszf/parallel.hpp"
#include "riszf/random.hpp"
#include "riszf/types.hpp"

namespace riszf {

/// Quadratic forms that express the statistical-CSI sum rate as
///   R(v) = sum_k log2(1 + v^H B v / v^H A_k v).
struct ObjectiveContext {
  CMatrix b;                  // N x N, Hermitian positive definite
  std::vector<CMatrix> a;     // K matrices, N x N Hermitian
  std::vector<CVector> s;     // s_k^H is row k of Lambda^-1 H1^H diag(a_N)
  RVector lambda_inv_diag;    // [Lambda^-1]_kk
  double p = 0.0;
  double noise = 0.0;
  int M = 0;
  int K = 0;
  double delta = 0.0;
  double beta = 0.0;

  int N() const { return static_cast<int>(b.rows()); }
};

inline ObjectiveContext build_objective_context(const StatisticalCsi& csi, double p, double noise) {
  if (csi.M() <= csi.K()) throw DomainError("objective needs M > K");
  if (!std::isfinite(csi.delta)) throw DomainError("objective needs a finite delta");
  const LambdaMatrix lam = build_lambda(csi);
  const Eigen::LLT<CMatrix> llt(lam.lambda);
  if (llt.info() != Eigen::Success) throw DomainError("Lambda is not positive definite");
  const CMatrix lambda_inv = llt.solve(CMatrix::Identity(csi.K(), csi.K()));

  const int N = csi.N();
  const double bd = csi.beta * csi.delta;
  // T = H1^H diag(a_N), K x N.
  const CMatrix t = csi.h1_bar.adjoint() * csi.a_n.asDiagonal();
  const CMatrix s_rows = lambda_inv * t;

  ObjectiveContext ctx;
  ctx.p = p;
  ctx.noise = noise;
  ctx.M = csi.M();
  ctx.K = csi.K();
  ctx.delta = csi.delta;
  ctx.beta = csi.beta;
  ctx.lambda_inv_diag = lambda_inv.diagonal().real();

  ctx.b = bd * (t.adjoint() * s_rows);
  ctx.b.diagonal().array() += 1.0 / N;
  ctx.b = 0.5 * (ctx.b + ctx.b.adjoint()).eval();

  const double c = noise * (csi.delta + 1.0) / (p * (csi.M() - csi.K()));
  ctx.a.reserve(static_cast<std::size_t>(csi.K()));
  ctx.s.reserve(static_cast<std::size_t>(csi.K()));
  for (int k = 0; k < csi.K(); ++k) {
    CVector sk = s_rows.row(k).adjoint();
    CMatrix ak = c * (ctx.lambda_inv_diag(k) * ctx.b - bd * (sk * sk.adjoint()));
    ctx.a.push_back(0.5 * (ak + ak.adjoint()));
    ctx.s.push_back(std::move(sk));
  }
  return ctx;
}

namespace detail {

inline double quad_form(const CMatrix& m, const CVector& v) { return v.dot(m * v).real(); }

inline double checked_denominator(const CMatrix& a, const CVector& v) {
  const double d = quad_form(a, v);
  if (!(d > 0.0)) throw DomainError("non-positive denominator in the sum-rate objective");
  return d;
}

}  // namespace detail

/// Sum rate as a function on all of C^N; equals the sum of the ZF bound
/// per-user values on the unit-modulus set.
inline double sum_rate_objective(const ObjectiveContext& ctx, const CVector& v) {
  const double num = detail::quad_form(ctx.b, v);
  double r = 0.0;
  for (const CMatrix& ak : ctx.a) r += std::log2(1.0 + num / detail::checked_denominator(ak, v));
  return r;
}

inline double sum_rate_objective(const ObjectiveContext& ctx, const PhaseShiftVector& v) {
  return sum_rate_objective(ctx, v.v());
}

/// Conjugate-coordinate gradient dR/dv*. Evaluated as
/// (B v - r_k A_k v) / (v^H A_k v) / (ln2 (1 + r_k)), r_k = v^H B v / v^H A_k v,
/// which avoids cancelling two large terms when A_k is nearly proportional to B.
inline CVector sum_rate_gradient(const ObjectiveContext& ctx, const CVector& v) {
  const CVector bv = ctx.b * v;
  const double num = v.dot(bv).real();
  CVector g = CVector::Zero(v.size());
  for (const CMatrix& ak : ctx.a) {
    const CVector av = ak * v;
    const double den = v.dot(av).real();
    if (!(den > 0.0)) throw DomainError("non-positive denominator in the sum-rate objective");
    const double r = num / den;
    g += (bv - r * av) / (den * std::log(2.0) * (1.0 + r));
  }
  return g;
}

inline CVector sum_rate_gradient(const ObjectiveContext& ctx, const PhaseShiftVector& v) {
  return sum_rate_gradient(ctx, v.v());
}

/// exp(j arg(v_n)) entrywise; zero entries map to 1.
inline PhaseShiftVector project_unit_modulus(const CVector& v) {
  CVector out(v.size());
  for (Eigen::Index n = 0; n < v.size(); ++n) {
    const double m = std::abs(v(n));
    out(n) = m == 0.0 ? cplx(1.0, 0.0) : std::polar(1.0, std::arg(v(n)));
  }
  return PhaseShiftVector(std::move(out));
}

struct AscentOptions {
  int max_iters = 500;
  double tol = 1e-6;            // relative sum-rate improvement
  double initial_step = 1.0;
  double shrink = 0.5;
  double armijo = 1e-4;
  int max_backtracks = 30;
  bool keep_iterates = false;
};

struct AscentStep {
  int iteration = 0;
  double sum_rate = 0.0;
  double step = 0.0;
  double grad_norm = 0.0;
};

struct AscentTrace {
  std::vector<AscentStep> iterations;  // entry 0 is the starting point
  bool converged = false;
  PhaseShiftVector final_phases = PhaseShiftVector::ones(0);
  std::vector<PhaseShiftVector> iterates;  // filled when keep_iterates is set

  double final_objective() const { return iterations.back().sum_rate; }
};

/// Gradient norm below which the start point is treated as stationary.
inline constexpr double kStationaryGradient = 1e-12;

/// Projected gradient ascent with backtracking. A trial step is projected
/// onto the unit-modulus set before it is scored; it is accepted when the
/// projected objective does not decrease and gains at least
/// armijo * 2 Re(g^H (v_new - v)).
inline AscentTrace gradient_ascent(const ObjectiveContext& ctx, const PhaseShiftVector& v0,
                                   const AscentOptions& opts = {}) {
  if (v0.size() != ctx.N()) throw DomainError("start vector length does not match N");
  AscentTrace trace;
  PhaseShiftVector v = v0;
  double f = sum_rate_objective(ctx, v);
  CVector g = sum_rate_gradient(ctx, v);
  trace.iterations.push_back({0, f, 0.0, g.norm()});
  if (opts.keep_iterates) trace.iterates.push_back(v);

  for (int it = 1; it <= opts.max_iters; ++it) {
    if (g.norm() <= kStationaryGradient) {
      trace.converged = true;
      break;
    }
    double mu = opts.initial_step;
    std::optional<PhaseShiftVector> accepted;
    double f_new = f;
    for (int bt = 0; bt <= opts.max_backtracks; ++bt, mu *= opts.shrink) {
      PhaseShiftVector cand = project_unit_modulus(v.v() + mu * g);
      const double fc = sum_rate_objective(ctx, cand);
      const double predicted = 2.0 * g.dot(cand.v() - v.v()).real();
      if (fc >= f && fc - f >= opts.armijo * predicted) {
        accepted = std::move(cand);
        f_new = fc;
        break;
      }
    }
    if (!accepted) break;  // no improving step: stop, not converged

    const double rel = (f_new - f) / std::max(std::abs(f), 1e-300);
    v = std::move(*accepted);
    f = f_new;
    g = sum_rate_gradient(ctx, v);
    trace.iterations.push_back({it, f, mu, g.norm()});
    if (opts.keep_iterates) trace.iterates.push_back(v);
    if (rel < opts.tol) {
      trace.converged = true;
      break;
    }
  }
  trace.final_phases = v;
  return trace;
}

/// Phases i.i.d. uniform on [0, 2 pi).
inline PhaseShiftVector random_phase_baseline(int N, Rng& rng) {
  RVector theta(N);
  for (int n = 0; n < N; ++n) theta(n) = uniform_angle(rng);
  return PhaseShiftVector::from_angles(theta);
}

/// Best of `restarts` ascents, each from its own seeded random start.
/// Ties keep the lowest restart index.
inline AscentTrace optimize_phases(const ObjectiveContext& ctx, int restarts, std::uint64_t seed,
                                   const AscentOptions& opts = {}, unsigned workers = 1) {
  if (restarts < 1) throw DomainError("need at least one restart");
  std::vector<AscentTrace> runs(static_cast<std::size_t>(restarts));
  parallel_for(runs.size(), workers, [&](std::size_t r) {
    Rng rng = substream(seed, Stream::kPhaseInit, r);
    runs[r] = gradient_ascent(ctx, random_phase_baseline(ctx.N(), rng), opts);
  });
  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r)
    if (runs[r].final_objective() > runs[best].final_objective()) best = r;
  return std::move(runs[best]);
}

inline void write_trace_csv(std::ostream& os, const AscentTrace& trace) {
  const auto old = os.precision(12);
  os << "iteration,objective,step,grad_norm\n";
  for (const AscentStep& s : trace.iterations)
    os << s.iteration << ',' << s.sum_rate << ',' << s.step << ',' << s.grad_norm << '\n';
  os.precision(old);
}

}  // namespace riszf
