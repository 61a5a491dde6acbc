// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <string_view>
#include <vector>

#include "riszf/channels.hpp"
#include "riszf/parallel.hpp"
#include "riszf/random.hpp"
#include "riszf/types.hpp"

namespace riszf {

/// Largest tolerated condition number of Q^H Q.
inline constexpr double kGramConditionLimit = 1e12;

enum class Detector { kZf, kMrc };

enum class RateMethod { kMonteCarloZf, kMonteCarloMrc, kClosedForm, kLosFreeBound, kLargeArray, kRisFree };

inline std::string_view to_string(RateMethod m) {
  switch (m) {
    case RateMethod::kMonteCarloZf: return "monte-carlo-zf";
    case RateMethod::kMonteCarloMrc: return "monte-carlo-mrc";
    case RateMethod::kClosedForm: return "closed-form";
    case RateMethod::kLosFreeBound: return "los-free-bound";
    case RateMethod::kLargeArray: return "large-array";
    case RateMethod::kRisFree: return "ris-free";
  }
  return "unknown";
}

/// Linear SINRs, one per user.
struct SinrVector {
  RVector values;
};

/// Ergodic or bounded rates in bits/s/Hz. Monte Carlo reports carry the
/// trial count and standard errors; closed forms report zero trials.
struct RateReport {
  RVector per_user;
  double sum = 0.0;
  RateMethod method = RateMethod::kClosedForm;
  std::size_t trials = 0;
  std::size_t excluded = 0;  // trials dropped by the Gram condition guard
  RVector std_err;
  double sum_std_err = 0.0;
};

struct LinkBudget {
  double p_watts = 1.0;
  double noise_watts = 1.0;
};

inline LinkBudget link_budget(const ScenarioConfig& cfg) {
  return {dbm_to_watts(cfg.p_dbm), dbm_to_watts(cfg.noise_dbm)};
}

/// (Q^H Q)^-1 through a Cholesky factorization, guarded by the condition number.
inline CMatrix gram_inverse(const CMatrix& q) {
  if (q.rows() <= q.cols()) throw DomainError("zero-forcing needs more antennas than users");
  const CMatrix gram = q.adjoint() * q;
  const Eigen::SelfAdjointEigenSolver<CMatrix> eig(gram, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kGramConditionLimit)
    throw SingularMatrixError("Gram matrix is singular or ill-conditioned");
  const Eigen::LLT<CMatrix> llt(gram);
  if (llt.info() != Eigen::Success) throw SingularMatrixError("Cholesky factorization of Gram matrix failed");
  return llt.solve(CMatrix::Identity(q.cols(), q.cols()));
}

/// A = Q (Q^H Q)^-1, so that A^H Q = I.
inline CMatrix zf_detector(const CMatrix& q) { return q * gram_inverse(q); }

/// p / (noise [(Q^H Q)^-1]_kk).
inline SinrVector zf_sinr(const CMatrix& q, double p, double noise) {
  const CMatrix inv = gram_inverse(q);
  SinrVector s;
  s.values.resize(q.cols());
  for (Eigen::Index k = 0; k < q.cols(); ++k) s.values(k) = p / (noise * inv(k, k).real());
  return s;
}

/// Matched-filter combiner q_k: p|q_k|^4 / (p sum_{i!=k} |q_k^H q_i|^2 + noise |q_k|^2).
inline SinrVector mrc_sinr(const CMatrix& q, double p, double noise) {
  const CMatrix gram = q.adjoint() * q;
  const Eigen::Index K = q.cols();
  SinrVector s;
  s.values.resize(K);
  for (Eigen::Index k = 0; k < K; ++k) {
    const double gain = gram(k, k).real();
    if (!(gain > 0.0)) throw DomainError("MRC combiner column is zero");
    double interference = 0.0;
    for (Eigen::Index i = 0; i < K; ++i)
      if (i != k) interference += std::norm(gram(k, i));
    s.values(k) = p * gain * gain / (p * interference + noise * gain);
  }
  return s;
}

inline RVector instantaneous_rates(const SinrVector& s) {
  return s.values.unaryExpr([](double x) { return std::log2(1.0 + x); });
}

struct MonteCarloOptions {
  std::size_t trials = 10000;
  std::uint64_t seed = 1;
  unsigned workers = 1;
};

/// Averages log2(1 + SINR_k) over independent channel draws. Trial t uses
/// its own substream of `seed`, and the reduction is an ordered pairwise
/// sum, so results do not depend on the worker count.
inline RateReport monte_carlo_rate(const StatisticalCsi& csi, const PhaseShiftVector& phases, Detector detector,
                                   const LinkBudget& link, const MonteCarloOptions& opts) {
  if (opts.trials < 1) throw DomainError("Monte Carlo needs at least one trial");
  const int K = csi.K();
  const RealizationSampler sampler(csi, phases);
  const std::size_t T = opts.trials;
  // Row-major per trial: K user rates followed by their sum.
  std::vector<double> samples(T * static_cast<std::size_t>(K + 1), 0.0);
  std::vector<char> dropped(T, 0);

  parallel_for(T, opts.workers, [&](std::size_t t) {
    Rng rng = substream(opts.seed, Stream::kTrials, t);
    const ChannelRealization r = sampler.draw(rng);
    SinrVector s;
    if (detector == Detector::kZf) {
      try {
        s = zf_sinr(r.q, link.p_watts, link.noise_watts);
      } catch (const SingularMatrixError&) {
        dropped[t] = 1;
        return;
      }
    } else {
      s = mrc_sinr(r.q, link.p_watts, link.noise_watts);
    }
    const RVector rates = instantaneous_rates(s);
    double* row = &samples[t * static_cast<std::size_t>(K + 1)];
    for (int k = 0; k < K; ++k) row[k] = rates(k);
    row[K] = rates.sum();
  });

  RateReport rep;
  rep.method = detector == Detector::kZf ? RateMethod::kMonteCarloZf : RateMethod::kMonteCarloMrc;
  std::vector<std::size_t> kept;
  kept.reserve(T);
  for (std::size_t t = 0; t < T; ++t)
    if (!dropped[t]) kept.push_back(t);
  rep.trials = kept.size();
  rep.excluded = T - kept.size();
  if (kept.empty()) throw SingularMatrixError("every Monte Carlo trial hit a singular Gram matrix");

  const double n = static_cast<double>(kept.size());
  std::vector<double> column(kept.size());
  auto column_stats = [&](int c, double& mean, double& se) {
    for (std::size_t i = 0; i < kept.size(); ++i) column[i] = samples[kept[i] * static_cast<std::size_t>(K + 1) + c];
    mean = pairwise_sum(column) / n;
    if (kept.size() < 2) {
      se = 0.0;
      return;
    }
    for (double& x : column) x = (x - mean) * (x - mean);
    se = std::sqrt(pairwise_sum(column) / (n - 1.0) / n);
  };
  rep.per_user.resize(K);
  rep.std_err.resize(K);
  for (int k = 0; k < K; ++k) column_stats(k, rep.per_user(k), rep.std_err(k));
  double sum_mean = 0.0;
  column_stats(K, sum_mean, rep.sum_std_err);
  rep.sum = rep.per_user.sum();
  return rep;
}

inline RateReport monte_carlo_rate(const StatisticalCsi& csi, const PhaseShiftVector& phases, Detector detector,
                                   const ScenarioConfig& cfg) {
  return monte_carlo_rate(csi, phases, detector, link_budget(cfg), {cfg.mc_trials, cfg.seed, worker_count()});
}

/// Rows of (method, user, rate, std_err); the last row carries the sum.
inline void write_rate_csv(std::ostream& os, const RateReport& rep, bool header = true) {
  const auto old = os.precision(12);
  if (header) os << "method,user,rate,std_err\n";
  for (Eigen::Index k = 0; k < rep.per_user.size(); ++k) {
    os << to_string(rep.method) << ',' << (k + 1) << ',' << rep.per_user(k) << ','
       << (rep.std_err.size() ? rep.std_err(k) : 0.0) << '\n';
  }
  os << to_string(rep.method) << ",sum," << rep.sum << ',' << rep.sum_std_err << '\n';
  os.precision(old);
}

}  // namespace riszf
