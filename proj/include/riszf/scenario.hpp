// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "riszf/types.hpp"

namespace riszf {

/// Everything needed to reproduce one experiment. Defaults describe the
/// reference operating point: 64 BS antennas, an 8x8 RIS, four users on a
/// 20 m half-circle around the RIS and the BS 700 m away.
struct ScenarioConfig {
  int M = 64;                  // BS antennas
  int N = 64;                  // RIS elements (perfect square)
  int K = 4;                   // single-antenna users
  double p_dbm = 30.0;         // per-user transmit power
  double noise_dbm = -104.0;   // noise power
  double rician_delta = 1.0;   // RIS-BS Rician factor, may be +inf for pure LoS sampling
  double d_ui_m = 20.0;        // user-RIS radius
  double d_ib_m = 700.0;       // RIS-BS distance
  double spacing_ratio = 0.5;  // element spacing over wavelength
  // Path-loss exponents for the (user-RIS, RIS-BS, user-BS) links.
  std::array<double, 3> pathloss_exponents{2.0, 2.5, 4.0};
  double pathloss_ref_db = -30.0;  // loss at 1 m
  std::uint64_t seed = 1;
  std::size_t mc_trials = 10000;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct Geometry {
  Point2 bs_position;
  Point2 ris_position;
  std::vector<Point2> user_positions;
};

/// Linear power gains of the three link families.
struct PathLossSet {
  RVector alpha;  // user-RIS, one per user
  double beta = 0.0;
  RVector gamma;  // user-BS, one per user
};

inline double dbm_to_watts(double x_dbm) { return std::pow(10.0, (x_dbm - 30.0) / 10.0); }

inline double db_to_linear(double x_db) { return std::pow(10.0, x_db / 10.0); }

inline void validate(const ScenarioConfig& cfg) {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (cfg.K < 1) fail("K must be positive");
  if (cfg.M < 1) fail("M must be positive");
  if (cfg.M <= cfg.K) fail("zero-forcing needs M > K");
  if (exact_sqrt(cfg.N) == 0) fail("N must be a positive perfect square");
  if (!std::isfinite(cfg.p_dbm) || !std::isfinite(cfg.noise_dbm)) fail("powers must be finite");
  if (std::isnan(cfg.rician_delta) || cfg.rician_delta < 0.0) fail("rician_delta must be >= 0");
  if (!(cfg.d_ui_m >= 0.0) || !std::isfinite(cfg.d_ui_m)) fail("d_ui_m must be >= 0");
  if (!(cfg.d_ib_m > 0.0) || !std::isfinite(cfg.d_ib_m)) fail("d_ib_m must be > 0");
  if (!(cfg.spacing_ratio > 0.0)) fail("spacing_ratio must be > 0");
  for (double e : cfg.pathloss_exponents)
    if (!(e >= 0.0) || !std::isfinite(e)) fail("path-loss exponents must be finite and >= 0");
  if (!std::isfinite(cfg.pathloss_ref_db)) fail("pathloss_ref_db must be finite");
  if (cfg.mc_trials < 1) fail("mc_trials must be >= 1");
}

/// BS at the origin, RIS on the positive x-axis, users spread evenly over
/// the half-circle around the RIS that faces away from the BS. The half-slot
/// offset keeps every user off the BS-RIS axis.
inline Geometry build_geometry(const ScenarioConfig& cfg) {
  if (cfg.K < 1) throw ConfigError("K must be positive");
  if (!(cfg.d_ib_m > 0.0)) throw ConfigError("d_ib_m must be > 0");
  if (!(cfg.d_ui_m >= 0.0)) throw ConfigError("d_ui_m must be >= 0");
  Geometry g;
  g.bs_position = {0.0, 0.0};
  g.ris_position = {cfg.d_ib_m, 0.0};
  g.user_positions.reserve(static_cast<std::size_t>(cfg.K));
  for (int k = 1; k <= cfg.K; ++k) {
    const double psi = -kPi / 2.0 + (k - 0.5) * kPi / cfg.K;
    g.user_positions.push_back(
        {g.ris_position.x + cfg.d_ui_m * std::cos(psi), g.ris_position.y + cfg.d_ui_m * std::sin(psi)});
  }
  return g;
}

/// Log-distance law: ref_gain * d^-exponent.
inline double log_distance_gain(double d_m, double exponent, double ref_db) {
  if (d_m < 0.0) throw DomainError("negative distance");
  if (d_m == 0.0 && exponent > 0.0) throw DomainError("zero distance with positive path-loss exponent");
  return db_to_linear(ref_db) * std::pow(d_m, -exponent);
}

inline PathLossSet compute_path_losses(const Geometry& geom, const ScenarioConfig& cfg) {
  const auto K = static_cast<Eigen::Index>(geom.user_positions.size());
  const auto& [e_ui, e_ib, e_ub] = cfg.pathloss_exponents;
  PathLossSet pl;
  pl.alpha.resize(K);
  pl.gamma.resize(K);
  for (Eigen::Index k = 0; k < K; ++k) {
    const Point2 u = geom.user_positions[static_cast<std::size_t>(k)];
    pl.alpha(k) = log_distance_gain(distance(u, geom.ris_position), e_ui, cfg.pathloss_ref_db);
    pl.gamma(k) = log_distance_gain(distance(u, geom.bs_position), e_ub, cfg.pathloss_ref_db);
  }
  pl.beta = log_distance_gain(distance(geom.bs_position, geom.ris_position), e_ib, cfg.pathloss_ref_db);
  return pl;
}

// ---------------------------------------------------------------------------
// Scenario files: one "key = value" per line, '#' starts a comment.

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (trim(v.substr(used)).empty()) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError("bad numeric value for '" + key + "': " + v);
}

inline long long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long x = std::stoll(v, &used);
    if (trim(v.substr(used)).empty()) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError("bad integer value for '" + key + "': " + v);
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    if (!v.empty() && v[0] != '-') {
      std::size_t used = 0;
      const unsigned long long x = std::stoull(v, &used);
      if (trim(v.substr(used)).empty()) return x;
    }
  } catch (const std::exception&) {
  }
  throw ConfigError("bad unsigned value for '" + key + "': " + v);
}

inline int parse_dim(const std::string& key, const std::string& v) {
  const long long x = parse_int(key, v);
  if (x < 1 || x > 1'000'000) throw ConfigError("'" + key + "' out of range: " + v);
  return static_cast<int>(x);
}

}  // namespace detail

/// Applies one key/value assignment to cfg. Unknown keys are errors.
inline void set_scenario_field(ScenarioConfig& cfg, const std::string& key, const std::string& raw) {
  using namespace detail;
  const std::string v = trim(raw);
  if (key == "M") cfg.M = parse_dim(key, v);
  else if (key == "N") cfg.N = parse_dim(key, v);
  else if (key == "K") cfg.K = parse_dim(key, v);
  else if (key == "p_dbm") cfg.p_dbm = parse_double(key, v);
  else if (key == "noise_dbm") cfg.noise_dbm = parse_double(key, v);
  else if (key == "rician_delta") cfg.rician_delta = parse_double(key, v);
  else if (key == "d_ui_m") cfg.d_ui_m = parse_double(key, v);
  else if (key == "d_ib_m") cfg.d_ib_m = parse_double(key, v);
  else if (key == "spacing_ratio") cfg.spacing_ratio = parse_double(key, v);
  else if (key == "pathloss_ref_db") cfg.pathloss_ref_db = parse_double(key, v);
  else if (key == "seed") cfg.seed = parse_u64(key, v);
  else if (key == "mc_trials") {
    const long long t = parse_int(key, v);
    if (t < 1) throw ConfigError("mc_trials must be >= 1");
    cfg.mc_trials = static_cast<std::size_t>(t);
  } else if (key == "pathloss_exponents") {
    std::stringstream ss(v);
    std::string item;
    std::vector<double> xs;
    while (std::getline(ss, item, ',')) xs.push_back(parse_double(key, trim(item)));
    if (xs.size() != 3) throw ConfigError("pathloss_exponents needs three comma-separated values");
    cfg.pathloss_exponents = {xs[0], xs[1], xs[2]};
  } else {
    throw ConfigError("unknown scenario key '" + key + "'");
  }
}

/// Reads a scenario on top of `base`; fields not mentioned keep their values.
inline ScenarioConfig parse_scenario(std::istream& in, ScenarioConfig base = {}) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    set_scenario_field(base, detail::trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  validate(base);
  return base;
}

inline ScenarioConfig load_scenario_file(const std::string& path, ScenarioConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file: " + path);
  return parse_scenario(in, base);
}

inline void write_scenario(std::ostream& os, const ScenarioConfig& cfg) {
  const auto old = os.precision(17);
  os << "M = " << cfg.M << "\nN = " << cfg.N << "\nK = " << cfg.K << "\np_dbm = " << cfg.p_dbm
     << "\nnoise_dbm = " << cfg.noise_dbm << "\nrician_delta = " << cfg.rician_delta
     << "\nd_ui_m = " << cfg.d_ui_m << "\nd_ib_m = " << cfg.d_ib_m << "\nspacing_ratio = " << cfg.spacing_ratio
     << "\npathloss_exponents = " << cfg.pathloss_exponents[0] << ", " << cfg.pathloss_exponents[1] << ", "
     << cfg.pathloss_exponents[2] << "\npathloss_ref_db = " << cfg.pathloss_ref_db << "\nseed = " << cfg.seed
     << "\nmc_trials = " << cfg.mc_trials << "\n";
  os.precision(old);
}

}  // namespace riszf
