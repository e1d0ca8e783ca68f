#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace steerfair {

/// Logistic link, computed without overflow for any finite argument.
inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// d/dx sigmoid(x) = sigma (1 - sigma).
inline double sigmoid_deriv(double x) {
  const double s = sigmoid(x);
  return s * (1.0 - s);
}

inline Eigen::ArrayXd sigmoid(const Eigen::ArrayXd& x) {
  return x.unaryExpr([](double v) { return sigmoid(v); });
}

inline Eigen::ArrayXd sigmoid_deriv(const Eigen::ArrayXd& x) {
  return x.unaryExpr([](double v) { return sigmoid_deriv(v); });
}

/// Global bound on |sigmoid''|, attained at sigma = (3 +- sqrt 3)/6.
inline constexpr double kSigmoidCurvatureBound = 0.09622504486493764;  // 1/(6 sqrt 3)

/// Standard normal CDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

/// Standard normal density.
inline double normal_pdf(double x) {
  static const double inv_sqrt_2pi = 0.3989422804014327;
  return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

}  // namespace steerfair
