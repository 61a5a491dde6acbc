// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace riszf {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

/// Invalid or inconsistent experiment configuration (bad key, out-of-range value).
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Argument shapes or values outside an operation's domain.
class DomainError : public std::invalid_argument {
 public:
  explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

/// Gram matrix too ill-conditioned to invert reliably.
class SingularMatrixError : public std::runtime_error {
 public:
  explicit SingularMatrixError(const std::string& what) : std::runtime_error(what) {}
};

/// Integer square root when x is a perfect square, otherwise 0.
inline int exact_sqrt(int x) {
  if (x < 1) return 0;
  int r = 0;
  while ((r + 1) * (r + 1) <= x) ++r;
  return r * r == x ? r : 0;
}

}  // namespace riszf
