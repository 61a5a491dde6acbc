// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "riszf/channels.hpp"
#include "riszf/detection.hpp"
#include "riszf/types.hpp"

namespace riszf {

/// Lambda = beta H1^H H1 + (delta + 1) Omega_d. Positive definite whenever
/// every direct-link gain is positive.
struct LambdaMatrix {
  CMatrix lambda;
};

enum class BoundKind {
  kZfBound,       // full statistical-CSI bound, phase dependent
  kLosFreeBound,  // drops the rank-one LoS gain; lower bound of kZfBound
  kLargeArray,    // large-N approximation of kLosFreeBound
  kRisFree,       // direct links only
};

struct ClosedFormRate {
  RVector per_user;
  BoundKind kind = BoundKind::kZfBound;

  double sum() const { return per_user.sum(); }
};

inline RateMethod to_rate_method(BoundKind k) {
  switch (k) {
    case BoundKind::kZfBound: return RateMethod::kClosedForm;
    case BoundKind::kLosFreeBound: return RateMethod::kLosFreeBound;
    case BoundKind::kLargeArray: return RateMethod::kLargeArray;
    case BoundKind::kRisFree: return RateMethod::kRisFree;
  }
  return RateMethod::kClosedForm;
}

inline RateReport to_report(const ClosedFormRate& r) {
  RateReport rep;
  rep.per_user = r.per_user;
  rep.sum = r.sum();
  rep.method = to_rate_method(r.kind);
  rep.std_err = RVector::Zero(r.per_user.size());
  return rep;
}

namespace detail {

inline void require_zf_dims(const StatisticalCsi& csi) {
  if (csi.M() <= csi.K()) throw DomainError("closed-form ZF rates need M > K");
  if (!std::isfinite(csi.delta) || csi.delta < 0.0) throw DomainError("closed-form rates need a finite delta >= 0");
}

inline RVector rate_from_inverse_diagonal(const RVector& inv_diag, double scale) {
  return inv_diag.unaryExpr([scale](double d) { return std::log2(1.0 + scale / d); });
}

}  // namespace detail

inline LambdaMatrix build_lambda(const StatisticalCsi& csi) {
  if (!std::isfinite(csi.delta)) throw DomainError("Lambda needs a finite delta");
  LambdaMatrix l;
  l.lambda = csi.beta * (csi.h1_bar.adjoint() * csi.h1_bar);
  l.lambda.diagonal() += ((csi.delta + 1.0) * csi.gamma).cast<cplx>();
  return l;
}

/// diag((L + c u u^H)^-1) through the Woodbury identity:
/// [L^-1]_kk - c |[L^-1 u]_k|^2 / (1 + c u^H L^-1 u).
inline RVector inverse_diagonal_woodbury(const CMatrix& lambda, const CVector& u, double c) {
  const Eigen::LLT<CMatrix> llt(lambda);
  if (llt.info() != Eigen::Success) throw DomainError("Lambda is not positive definite");
  const CMatrix inv = llt.solve(CMatrix::Identity(lambda.rows(), lambda.cols()));
  const CVector w = inv * u;
  const double denom = 1.0 + c * u.dot(w).real();
  RVector d(lambda.rows());
  for (Eigen::Index k = 0; k < d.size(); ++k) d(k) = inv(k, k).real() - c * std::norm(w(k)) / denom;
  return d;
}

/// Same quantity by factorizing the updated matrix directly.
inline RVector inverse_diagonal_direct(const CMatrix& lambda, const CVector& u, double c) {
  const CMatrix full = lambda + c * (u * u.adjoint());
  const CMatrix inv = full.partialPivLu().inverse();
  return inv.diagonal().real();
}

/// E{(Q^H Q)^-1} under the central Wishart law with matched first moment:
/// Sigma^-1 / (M - K), Sigma = beta/(delta+1) H1^H H1 + Omega_d + beta delta/(delta+1) u u^H.
inline CMatrix wishart_inverse_expectation(const StatisticalCsi& csi, const PhaseShiftVector& phases) {
  detail::require_zf_dims(csi);
  const double d1 = csi.delta + 1.0;
  const CVector u = effective_los_vector(csi, phases);
  CMatrix sigma = (csi.beta / d1) * (csi.h1_bar.adjoint() * csi.h1_bar) +
                  (csi.beta * csi.delta / d1) * (u * u.adjoint());
  sigma.diagonal() += csi.gamma.cast<cplx>();
  const Eigen::LLT<CMatrix> llt(sigma);
  if (llt.info() != Eigen::Success) throw DomainError("Wishart scale matrix is not positive definite");
  return llt.solve(CMatrix::Identity(csi.K(), csi.K())) / static_cast<double>(csi.M() - csi.K());
}

/// Per-user ergodic-rate lower bound for ZF detection from statistical CSI.
inline ClosedFormRate zf_rate_bound(const StatisticalCsi& csi, const PhaseShiftVector& phases, double p,
                                    double noise) {
  detail::require_zf_dims(csi);
  const LambdaMatrix lam = build_lambda(csi);
  const CVector u = effective_los_vector(csi, phases);
  const RVector d = inverse_diagonal_woodbury(lam.lambda, u, csi.beta * csi.delta);
  const double scale = p * (csi.M() - csi.K()) / (noise * (csi.delta + 1.0));
  return {detail::rate_from_inverse_diagonal(d, scale), BoundKind::kZfBound};
}

enum class LowerBoundMode { kExact, kLargeArray };

/// Phase-independent bounds: kExact replaces the rank-one-updated inverse by
/// Lambda^-1; kLargeArray additionally keeps only the diagonal of H1^H H1.
inline ClosedFormRate phase_free_rate_bound(const StatisticalCsi& csi, double p, double noise, LowerBoundMode mode) {
  detail::require_zf_dims(csi);
  const double d1 = csi.delta + 1.0;
  const double snr = p * (csi.M() - csi.K()) / noise;
  if (mode == LowerBoundMode::kExact) {
    const LambdaMatrix lam = build_lambda(csi);
    const Eigen::LLT<CMatrix> llt(lam.lambda);
    if (llt.info() != Eigen::Success) throw DomainError("Lambda is not positive definite");
    const RVector d = llt.solve(CMatrix::Identity(csi.K(), csi.K())).diagonal().real();
    return {detail::rate_from_inverse_diagonal(d, snr / d1), BoundKind::kLosFreeBound};
  }
  RVector r(csi.K());
  for (int k = 0; k < csi.K(); ++k)
    r(k) = std::log2(1.0 + snr * (csi.N() * csi.alpha(k) * csi.beta / d1 + csi.gamma(k)));
  return {r, BoundKind::kLargeArray};
}

/// Conventional massive MIMO with ZF and no RIS: log2(1 + p (M-K) gamma_k / noise).
inline ClosedFormRate ris_free_rate(const RVector& gamma, double p, double noise, int M, int K) {
  if (M <= K) throw DomainError("closed-form ZF rates need M > K");
  const double snr = p * (M - K) / noise;
  return {gamma.unaryExpr([snr](double g) { return std::log2(1.0 + snr * g); }), BoundKind::kRisFree};
}

inline ClosedFormRate ris_free_rate(const StatisticalCsi& csi, double p, double noise) {
  return ris_free_rate(csi.gamma, p, noise, csi.M(), csi.K());
}

struct ScalingPoint {
  int M = 0;
  double p_watts = 0.0;
  ClosedFormRate bound;
};

/// Evaluates the ZF bound with p = c / M^power_exponent for each M. The
/// LoS angles, and therefore H1 and a_N, do not depend on M.
inline std::vector<ScalingPoint> power_scaling_check(const ScenarioConfig& base, std::span<const int> Ms, double c,
                                                     const PhaseShiftVector& phases, double power_exponent = 1.0) {
  std::vector<ScalingPoint> out;
  out.reserve(Ms.size());
  const double noise = dbm_to_watts(base.noise_dbm);
  for (int M : Ms) {
    ScenarioConfig cfg = base;
    cfg.M = M;
    if (M <= cfg.K) throw ConfigError("power scaling sweep needs every M > K");
    const StatisticalCsi csi = build_statistical_csi(cfg);
    const double p = c / std::pow(static_cast<double>(M), power_exponent);
    out.push_back({M, p, zf_rate_bound(csi, phases, p, noise)});
  }
  return out;
}

/// Least-squares slope of rate against log2(parameter), in bits per doubling.
inline double scaling_slope(std::span<const double> parameter, std::span<const double> rate) {
  if (parameter.size() != rate.size()) throw DomainError("slope fit needs matching sample counts");
  if (parameter.size() < 3) throw DomainError("slope fit needs at least three points");
  const auto n = static_cast<double>(parameter.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < parameter.size(); ++i) {
    if (!(parameter[i] > 0.0)) throw DomainError("slope fit needs positive parameters");
    mx += std::log2(parameter[i]);
    my += rate[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < parameter.size(); ++i) {
    const double dx = std::log2(parameter[i]) - mx;
    sxy += dx * (rate[i] - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw DomainError("slope fit needs distinct parameters");
  return sxy / sxx;
}

/// Minimum log argument (1 + SNR) for the asymptotic slope to be meaningful.
inline constexpr double kHighSnrLogArgument = 100.0;

inline bool in_high_snr_regime(double rate_bits) { return std::exp2(rate_bits) >= kHighSnrLogArgument; }

}  // namespace riszf
