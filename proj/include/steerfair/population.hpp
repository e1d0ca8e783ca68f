#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "steerfair/common.hpp"
#include "steerfair/rng.hpp"

namespace steerfair {

/// Two-group Gaussian strategic population.
///
/// direct variant: features X|G=g ~ N(mu_g, I) in R^d, agents shift X itself.
/// latent variant: skills S|G=g ~ N(mu_g, I) in R^d, observed through
/// interviews X = Loading * S + eps with eps ~ N(0, I_p); agents shift S.
struct PopulationModel {
  enum class Variant { Direct, Latent };

  int dim = 0;                 // d, skill/feature dimension
  Eigen::VectorXd mu_a, mu_d;  // ex-ante group means in R^d
  Eigen::VectorXd beta;        // outcome direction in R^d
  double cost_a = 1.0, cost_d = 1.0;
  Eigen::VectorXd mask;        // effort mask in {0,1}^d; M = diag(mask)
  double lambda_a = 0.5;       // group-A population proportion
  Variant variant = Variant::Direct;
  std::optional<Eigen::MatrixXd> loading;  // p x d, latent variant only
  double reg_weight = 1.0;                 // weight on ||theta_g||^2
  bool reg_weighted_by_group = true;       // regularizer inside the lambda_g sum

  const Eigen::VectorXd& mu(Group g) const { return g == Group::A ? mu_a : mu_d; }
  double cost(Group g) const { return g == Group::A ? cost_a : cost_d; }
  double proportion(Group g) const { return g == Group::A ? lambda_a : 1.0 - lambda_a; }

  bool is_latent() const { return variant == Variant::Latent; }

  /// Dimension of observed feature rows and of policy vectors.
  int feature_dim() const {
    return is_latent() ? static_cast<int>(loading->rows()) : dim;
  }

  /// True when the latent loading is square (the only case where sample-level
  /// estimation through the interview proxy is well defined).
  bool square_loading() const {
    return !is_latent() || loading->rows() == loading->cols();
  }

  Eigen::VectorXd masked(const Eigen::VectorXd& v) const {
    return mask.cwiseProduct(v);
  }
};

/// Raw configuration record for a population model, as read from a config
/// file. Optional fields get the documented defaults during validation.
struct ModelSpec {
  int dim = 0;
  Eigen::VectorXd mu_a, mu_d, beta;
  double cost_a = 0.0, cost_d = 0.0;
  std::optional<Eigen::VectorXd> mask;   // default: first ceil(d/2) coords manipulable
  std::optional<double> lambda_a;        // default 0.5 (balanced samples)
  std::string variant = "direct";
  std::optional<Eigen::MatrixXd> loading;
  double reg_weight = 1.0;
  bool reg_weighted_by_group = true;
};

inline Eigen::VectorXd default_mask(int dim) {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(dim);
  const int manipulable = (dim + 1) / 2;
  for (int i = 0; i < manipulable; ++i) m[i] = 1.0;
  return m;
}

/// Validates a raw record against every model invariant. Returns the model or
/// throws a ValidationError listing all violated invariants at once.
inline PopulationModel validate_model(const ModelSpec& spec) {
  std::vector<ValidationIssue> issues;

  if (spec.dim < 1) issues.push_back(ValidationIssue::BadDimension);
  if (!(spec.cost_a > 0.0) || !(spec.cost_d > 0.0))
    issues.push_back(ValidationIssue::NonPositiveCost);

  const bool latent = spec.variant == "latent";
  if (!latent && spec.variant != "direct")
    issues.push_back(ValidationIssue::NonFiniteField);

  if (spec.dim >= 1) {
    if (spec.mu_a.size() != spec.dim || spec.mu_d.size() != spec.dim ||
        spec.beta.size() != spec.dim)
      issues.push_back(ValidationIssue::BadDimension);
    if (spec.mask && spec.mask->size() != spec.dim)
      issues.push_back(ValidationIssue::MaskArityMismatch);
  }
  if (spec.mask) {
    for (Eigen::Index i = 0; i < spec.mask->size(); ++i) {
      const double v = (*spec.mask)[i];
      if (v != 0.0 && v != 1.0) {
        issues.push_back(ValidationIssue::BadMaskEntry);
        break;
      }
    }
  }
  if (spec.lambda_a && !(*spec.lambda_a > 0.0 && *spec.lambda_a < 1.0))
    issues.push_back(ValidationIssue::ProportionOutOfRange);
  if (spec.reg_weight < 0.0) issues.push_back(ValidationIssue::NegativeRegWeight);

  auto finite = [](const Eigen::VectorXd& v) { return v.allFinite(); };
  if (spec.mu_a.size() && (!finite(spec.mu_a) || !finite(spec.mu_d) || !finite(spec.beta)))
    issues.push_back(ValidationIssue::NonFiniteField);

  if (latent) {
    if (!spec.loading) {
      issues.push_back(ValidationIssue::MissingLoading);
    } else if (spec.dim >= 1) {
      if (spec.loading->cols() != spec.dim || spec.loading->rows() < spec.dim) {
        issues.push_back(ValidationIssue::BadDimension);
      } else {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(*spec.loading);
        if (svd.singularValues().minCoeff() <= 1e-10)
          issues.push_back(ValidationIssue::RankDeficientLoading);
      }
    }
  } else if (spec.loading) {
    issues.push_back(ValidationIssue::SpuriousLoading);
  }

  if (!issues.empty()) throw ValidationError(std::move(issues));

  PopulationModel m;
  m.dim = spec.dim;
  m.mu_a = spec.mu_a;
  m.mu_d = spec.mu_d;
  m.beta = spec.beta;
  m.cost_a = spec.cost_a;
  m.cost_d = spec.cost_d;
  m.mask = spec.mask ? *spec.mask : default_mask(spec.dim);
  m.lambda_a = spec.lambda_a ? *spec.lambda_a : 0.5;
  m.variant = latent ? PopulationModel::Variant::Latent : PopulationModel::Variant::Direct;
  m.loading = spec.loading;
  m.reg_weight = spec.reg_weight;
  m.reg_weighted_by_group = spec.reg_weighted_by_group;
  return m;
}

/// Re-validation of an already-valid model is the identity.
inline PopulationModel validate_model(const PopulationModel& model) {
  ModelSpec spec;
  spec.dim = model.dim;
  spec.mu_a = model.mu_a;
  spec.mu_d = model.mu_d;
  spec.beta = model.beta;
  spec.cost_a = model.cost_a;
  spec.cost_d = model.cost_d;
  spec.mask = model.mask;
  spec.lambda_a = model.lambda_a;
  spec.variant = model.is_latent() ? "latent" : "direct";
  spec.loading = model.loading;
  spec.reg_weight = model.reg_weight;
  spec.reg_weighted_by_group = model.reg_weighted_by_group;
  PopulationModel out = validate_model(spec);
  out.reg_weighted_by_group = model.reg_weighted_by_group;
  return out;
}

/// Ex-ante feature rows per group plus the provenance needed to regenerate
/// them bit-identically.
struct SampleSet {
  Eigen::MatrixXd rows_a, rows_d;  // n_g x feature_dim
  std::uint64_t seed = 0;
  std::string generator_name = kGeneratorName;

  const Eigen::MatrixXd& rows(Group g) const { return g == Group::A ? rows_a : rows_d; }
  Eigen::MatrixXd& rows(Group g) { return g == Group::A ? rows_a : rows_d; }
  Eigen::Index count(Group g) const { return rows(g).rows(); }
};

namespace detail {

inline Eigen::MatrixXd sample_group(const PopulationModel& model, Group g,
                                    Eigen::Index n, std::uint64_t seed) {
  // Distinct substreams per group so that streams are independent and a
  // group's draw does not depend on the other group's count.
  NormalStream stream(substream_seed(seed, static_cast<std::uint64_t>(g)));
  const Eigen::VectorXd& mu = model.mu(g);
  if (!model.is_latent()) {
    Eigen::MatrixXd x = stream.matrix(n, model.dim);
    x.rowwise() += mu.transpose();
    return x;
  }
  const Eigen::MatrixXd& loading = *model.loading;
  Eigen::MatrixXd skills = stream.matrix(n, model.dim);
  skills.rowwise() += mu.transpose();
  Eigen::MatrixXd noise = stream.matrix(n, loading.rows());
  return skills * loading.transpose() + noise;
}

}  // namespace detail

/// Draws ex-ante samples for both groups. Pure in its arguments: the same
/// (model, n_a, n_d, seed) always reproduces the same matrices bit for bit.
inline SampleSet sample_population(const PopulationModel& model, Eigen::Index n_a,
                                   Eigen::Index n_d, std::uint64_t seed) {
  if (n_a < 1 || n_d < 1) throw EmptyGroup("sample counts must be >= 1");
  SampleSet s;
  s.seed = seed;
  s.rows_a = detail::sample_group(model, Group::A, n_a, seed);
  s.rows_d = detail::sample_group(model, Group::D, n_d, seed);
  return s;
}

}  // namespace steerfair
