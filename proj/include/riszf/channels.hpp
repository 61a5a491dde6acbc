// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>

#include "riszf/random.hpp"
#include "riszf/scenario.hpp"
#include "riszf/types.hpp"

namespace riszf {

/// Array response of a planar array. Entries are laid out x-major with y
/// varying fastest: entry x * cols + y.
struct SteeringVector {
  CVector entries;
  int rows = 0;
  int cols = 0;

  Eigen::Index size() const { return entries.size(); }
};

/// Response of a rows x cols planar array for a path with the given
/// azimuth/elevation (radians).
inline SteeringVector planar_steering_vector(int rows, int cols, double azimuth, double elevation,
                                             double spacing_ratio) {
  if (rows < 1 || cols < 1) throw DomainError("planar array needs positive dimensions");
  SteeringVector sv;
  sv.rows = rows;
  sv.cols = cols;
  sv.entries.resize(static_cast<Eigen::Index>(rows) * cols);
  const double kx = 2.0 * kPi * spacing_ratio * std::sin(elevation) * std::sin(azimuth);
  const double ky = 2.0 * kPi * spacing_ratio * std::cos(elevation);
  for (int x = 0; x < rows; ++x)
    for (int y = 0; y < cols; ++y) sv.entries(x * cols + y) = std::polar(1.0, x * kx + y * ky);
  return sv;
}

/// Uniform square planar array with X elements; X must be a perfect square.
inline SteeringVector steering_vector(int X, double azimuth, double elevation, double spacing_ratio) {
  const int side = exact_sqrt(X);
  if (side == 0) throw DomainError("square planar array needs a perfect-square element count, got " +
                                   std::to_string(X));
  return planar_steering_vector(side, side, azimuth, elevation, spacing_ratio);
}

/// Most nearly square rows x cols factorization (rows <= cols) of X elements.
inline std::pair<int, int> planar_shape(int X) {
  if (X < 1) throw DomainError("array needs at least one element");
  int rows = 1;
  for (int r = 1; r * r <= X; ++r)
    if (X % r == 0) rows = r;
  return {rows, X / rows};
}

/// BS array response: square when M is a perfect square, otherwise the most
/// nearly square rectangular planar array.
inline SteeringVector array_response(int X, double azimuth, double elevation, double spacing_ratio) {
  const auto [rows, cols] = planar_shape(X);
  return planar_steering_vector(rows, cols, azimuth, elevation, spacing_ratio);
}

/// RIS reflection coefficients v with |v_n| = 1. The reflection matrix is
/// diag(conj(v)).
class PhaseShiftVector {
 public:
  static constexpr double kModulusTolerance = 1e-12;

  explicit PhaseShiftVector(CVector v) : v_(std::move(v)) {
    for (Eigen::Index n = 0; n < v_.size(); ++n)
      if (std::abs(std::abs(v_(n)) - 1.0) > kModulusTolerance)
        throw DomainError("phase-shift entry " + std::to_string(n) + " is not unit-modulus");
  }

  /// Element n applies phase theta_n, i.e. v_n = exp(-j theta_n).
  static PhaseShiftVector from_angles(const RVector& theta) {
    CVector v(theta.size());
    for (Eigen::Index n = 0; n < theta.size(); ++n) v(n) = std::polar(1.0, -theta(n));
    return PhaseShiftVector(std::move(v));
  }

  static PhaseShiftVector ones(Eigen::Index n) { return PhaseShiftVector(CVector::Ones(n)); }

  const CVector& v() const { return v_; }
  Eigen::Index size() const { return v_.size(); }
  /// Diagonal of the reflection matrix.
  CVector reflection() const { return v_.conjugate(); }

 private:
  CVector v_;
};

/// Long-term channel knowledge: path losses, LoS geometry and the Rician factor.
struct StatisticalCsi {
  CMatrix h1_bar;  // N x K, column k = sqrt(alpha_k) * RIS response towards user k
  CVector a_m;     // BS-side response of the RIS-BS LoS path
  CVector a_n;     // RIS-side response of the RIS-BS LoS path
  double beta = 0.0;
  double delta = 0.0;
  RVector alpha;
  RVector gamma;

  int M() const { return static_cast<int>(a_m.size()); }
  int N() const { return static_cast<int>(a_n.size()); }
  int K() const { return static_cast<int>(h1_bar.cols()); }
  /// Direct-link covariance, diagonal with the user-BS gains.
  Eigen::MatrixXd omega_d() const { return gamma.asDiagonal(); }
};

/// Amplitude weights of the LoS and NLoS parts of the RIS-BS channel.
/// delta = +inf yields a pure LoS link.
struct RicianWeights {
  double los = 0.0;
  double nlos = 0.0;
};

inline RicianWeights rician_weights(double beta, double delta) {
  if (std::isinf(delta)) return {std::sqrt(beta), 0.0};
  return {std::sqrt(beta * delta / (delta + 1.0)), std::sqrt(beta / (delta + 1.0))};
}

/// Draws all LoS angles from rng: per user (azimuth, elevation) at the RIS,
/// then the BS arrival pair, then the RIS departure pair.
inline StatisticalCsi build_statistical_csi(const ScenarioConfig& cfg, const PathLossSet& losses, Rng& rng) {
  validate(cfg);
  if (losses.alpha.size() != cfg.K || losses.gamma.size() != cfg.K)
    throw DomainError("path-loss set does not match K");
  StatisticalCsi csi;
  csi.h1_bar.resize(cfg.N, cfg.K);
  for (int k = 0; k < cfg.K; ++k) {
    const double az = uniform_angle(rng);
    const double el = uniform_angle(rng);
    csi.h1_bar.col(k) = std::sqrt(losses.alpha(k)) * steering_vector(cfg.N, az, el, cfg.spacing_ratio).entries;
  }
  const double bs_az = uniform_angle(rng);
  const double bs_el = uniform_angle(rng);
  const double ris_az = uniform_angle(rng);
  const double ris_el = uniform_angle(rng);
  csi.a_m = array_response(cfg.M, bs_az, bs_el, cfg.spacing_ratio).entries;
  csi.a_n = steering_vector(cfg.N, ris_az, ris_el, cfg.spacing_ratio).entries;
  csi.beta = losses.beta;
  csi.delta = cfg.rician_delta;
  csi.alpha = losses.alpha;
  csi.gamma = losses.gamma;
  return csi;
}

/// Geometry, path losses and angles straight from the scenario seed.
inline StatisticalCsi build_statistical_csi(const ScenarioConfig& cfg) {
  validate(cfg);
  const Geometry geom = build_geometry(cfg);
  const PathLossSet losses = compute_path_losses(geom, cfg);
  Rng rng = substream(cfg.seed, Stream::kAngles);
  return build_statistical_csi(cfg, losses, rng);
}

/// H1^H diag(a_N) v, which equals H1^H Phi^H a_N.
inline CVector effective_los_vector(const StatisticalCsi& csi, const PhaseShiftVector& phases) {
  if (phases.size() != csi.N()) throw DomainError("phase vector length does not match N");
  return csi.h1_bar.adjoint() * csi.a_n.cwiseProduct(phases.v());
}

struct ChannelRealization {
  CMatrix d_mat;     // M x K direct channel
  CMatrix h2_tilde;  // M x N NLoS part of the RIS-BS channel
  CMatrix q;         // M x K aggregated channel
};

/// Draws realizations for a fixed (csi, phases) pair. Caches the
/// deterministic parts so per-trial work is the Gaussian draws and one product.
class RealizationSampler {
 public:
  RealizationSampler(const StatisticalCsi& csi, const PhaseShiftVector& phases)
      : csi_(&csi), weights_(rician_weights(csi.beta, csi.delta)) {
    if (phases.size() != csi.N()) throw DomainError("phase vector length does not match N");
    reflected_h1_ = phases.reflection().asDiagonal() * csi.h1_bar;
    los_part_ = weights_.los * (csi.a_m * effective_los_vector(csi, phases).adjoint());
    sqrt_gamma_ = csi.gamma.cwiseSqrt();
  }

  /// Direct channel is drawn before the NLoS RIS-BS channel.
  ChannelRealization draw(Rng& rng) const {
    const int M = csi_->M();
    const int N = csi_->N();
    const int K = csi_->K();
    ChannelRealization r;
    r.d_mat.resize(M, K);
    fill_complex_gaussian(r.d_mat, rng);
    r.d_mat = r.d_mat * sqrt_gamma_.asDiagonal();
    r.h2_tilde.resize(M, N);
    fill_complex_gaussian(r.h2_tilde, rng);
    r.q = r.d_mat;
    if (weights_.los != 0.0) r.q += los_part_;
    if (weights_.nlos != 0.0) r.q.noalias() += weights_.nlos * (r.h2_tilde * reflected_h1_);
    return r;
  }

 private:
  const StatisticalCsi* csi_;
  RicianWeights weights_;
  CMatrix reflected_h1_;  // Phi H1
  CMatrix los_part_;
  RVector sqrt_gamma_;
};

inline ChannelRealization sample_realization(const StatisticalCsi& csi, const PhaseShiftVector& phases, Rng& rng) {
  return RealizationSampler(csi, phases).draw(rng);
}

/// Row-major text dump, one row per line, entries formatted "re+imi".
inline void write_matrix_text(std::ostream& os, const CMatrix& m) {
  char buf[96];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g%+.17gi", m(i, j).real(), m(i, j).imag());
      if (j) os << ' ';
      os << buf;
    }
    os << '\n';
  }
}

}  // namespace riszf
