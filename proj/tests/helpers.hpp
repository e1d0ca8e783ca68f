#pragma once

#include <Eigen/Dense>

#include "steerfair/population.hpp"

namespace helpers {

/// The default two-group benchmark population: d = 10, beta = 1, means 0.5
/// vs 0.1, costs 4 vs 10, identity covariance/loading.
inline steerfair::ModelSpec benchmark_spec() {
  steerfair::ModelSpec spec;
  spec.dim = 10;
  spec.mu_a = Eigen::VectorXd::Constant(10, 0.5);
  spec.mu_d = Eigen::VectorXd::Constant(10, 0.1);
  spec.beta = Eigen::VectorXd::Ones(10);
  spec.cost_a = 4.0;
  spec.cost_d = 10.0;
  return spec;
}

inline steerfair::PopulationModel benchmark_model() {
  return steerfair::validate_model(benchmark_spec());
}

inline steerfair::PopulationModel latent_benchmark_model(
    const Eigen::MatrixXd& loading) {
  steerfair::ModelSpec spec = benchmark_spec();
  spec.variant = "latent";
  spec.loading = loading;
  return steerfair::validate_model(spec);
}

}  // namespace helpers
