#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "steerfair/analytics.hpp"
#include "steerfair/common.hpp"

namespace steerfair {

enum class ConstraintMode { ExPostAll, ExAnteDP, ExAnteFPR, ExAnteFNR, ExAnteSuff };

inline const char* to_string(ConstraintMode m) {
  switch (m) {
    case ConstraintMode::ExPostAll: return "expost_all";
    case ConstraintMode::ExAnteDP: return "exante_dp";
    case ConstraintMode::ExAnteFPR: return "exante_fpr";
    case ConstraintMode::ExAnteFNR: return "exante_fnr";
    case ConstraintMode::ExAnteSuff: return "exante_suff";
  }
  return "?";
}

/// Signed-difference moment constraints  matrix * mu <= c + nu.
/// Both +/- rows are kept for every pair so the dual dimensionality matches
/// the mirror-ascent updates.
struct ConstraintSystem {
  Eigen::MatrixXd matrix;  // K x (moment arity)
  Eigen::VectorXd c;       // right-hand side, default zero
  double nu = 0.0;         // slack relaxation, c_hat = c + nu
  double bound = 1.0;      // dual L1 budget B
  ConstraintMode mode = ConstraintMode::ExPostAll;

  int rows() const { return static_cast<int>(matrix.rows()); }
  int arity() const { return static_cast<int>(matrix.cols()); }
  Eigen::VectorXd c_hat() const { return c.array() + nu; }
};

namespace detail {

/// K x len matrix whose rows are the +/- differences of the given index pairs.
inline Eigen::MatrixXd pairwise_difference_rows(
    int len, const std::vector<std::pair<int, int>>& pairs) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2 * static_cast<int>(pairs.size()), len);
  int r = 0;
  for (const auto& [i, j] : pairs) {
    m(r, i) = 1.0;
    m(r, j) = -1.0;
    m(r + 1, i) = -1.0;
    m(r + 1, j) = 1.0;
    r += 2;
  }
  return m;
}

}  // namespace detail

/// Default slack: kappa / sqrt(min(n_A, n_D)).
inline double default_nu(Eigen::Index n_a, Eigen::Index n_d, double kappa = 2.0) {
  return kappa / std::sqrt(static_cast<double>(std::min(n_a, n_d)));
}

/// The six-row ex-post system over the moment order
/// [E[Y'|A], E[Y'|D], E[f|A], E[f|D], E[fY'|A], E[fY'|D]]: +/- rows on index
/// pairs (0,1), (2,3), (4,5), c = 0.
inline ConstraintSystem build_expost_system(double nu, double bound) {
  if (!(nu >= 0.0)) throw ConfigError("nu must be nonnegative");
  if (!(bound > 0.0)) throw ConfigError("dual bound B must be positive");
  ConstraintSystem s;
  s.matrix = detail::pairwise_difference_rows(6, {{0, 1}, {2, 3}, {4, 5}});
  s.c = Eigen::VectorXd::Zero(6);
  s.nu = nu;
  s.bound = bound;
  s.mode = ConstraintMode::ExPostAll;
  return s;
}

/// Single ex-ante metric baseline: pairwise rows over (metric_A, metric_D).
/// "suff" couples the PPV and NPV pairs (K = 4); the others have K = 2.
inline ConstraintSystem build_baseline_system(ConstraintMode mode, double nu,
                                              double bound) {
  if (!(nu >= 0.0)) throw ConfigError("nu must be nonnegative");
  if (!(bound > 0.0)) throw ConfigError("dual bound B must be positive");
  if (mode == ConstraintMode::ExPostAll)
    throw ConfigError("use build_expost_system for the ex-post constraints");
  ConstraintSystem s;
  s.nu = nu;
  s.bound = bound;
  s.mode = mode;
  if (mode == ConstraintMode::ExAnteSuff) {
    s.matrix = detail::pairwise_difference_rows(4, {{0, 1}, {2, 3}});
    s.c = Eigen::VectorXd::Zero(4);
  } else {
    s.matrix = detail::pairwise_difference_rows(2, {{0, 1}});
    s.c = Eigen::VectorXd::Zero(2);
  }
  return s;
}

/// Constraint slack vector and its largest signed entry.
/// max_violation <= 0 means every constraint is satisfied.
struct Violation {
  Eigen::VectorXd values;      // matrix * mu - c_hat
  double max_violation = 0.0;  // max_k values[k] (signed)
};

inline Violation violation(const ConstraintSystem& system, const Eigen::VectorXd& mu) {
  if (mu.size() != system.arity())
    throw ArityMismatch("moment vector arity does not match the constraint system");
  Violation v;
  v.values = system.matrix * mu - system.c_hat();
  v.max_violation = v.values.maxCoeff();
  return v;
}

inline Violation violation(const ConstraintSystem& system, const MomentVector& mu) {
  return violation(system, Eigen::VectorXd(mu.as_vector()));
}

/// Exact solution of  max_{lambda >= 0, ||lambda||_1 <= B} lambda^T v :
/// value B max(0, max_k v_k), attained at B e_k* (or at 0 when all v <= 0).
struct DualSupport {
  double value = 0.0;
  Eigen::VectorXd attaining;
};

inline DualSupport dual_support_max(const Eigen::VectorXd& v, double bound) {
  if (!(bound > 0.0)) throw ConfigError("dual bound B must be positive");
  DualSupport out;
  out.attaining = Eigen::VectorXd::Zero(v.size());
  Eigen::Index best = 0;
  const double top = v.size() ? v.maxCoeff(&best) : 0.0;
  if (top > 0.0) {
    out.value = bound * top;
    out.attaining[best] = bound;
  }
  return out;
}

}  // namespace steerfair
