#pragma once

#include <Eigen/Dense>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "steerfair/analytics.hpp"
#include "steerfair/common.hpp"
#include "steerfair/population.hpp"
#include "steerfair/response.hpp"
#include "steerfair/rng.hpp"

namespace steerfair {

/// Residuals of the combined equality-of-treatment constraint system. All
/// five vanish exactly when the two groups' analytic Gaussian summaries
/// coincide. For the latent variant the same equations apply to the
/// transformed policy theta~ = Loading^T theta, with the prediction-variance
/// residual picking up the extra ||theta_g||^2 interview-noise term.
struct ResidualVector {
  std::array<double, 5> values{};

  double max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }
};

inline ResidualVector residuals(const PolicyPair& theta, const PopulationModel& model) {
  const Eigen::VectorXd& beta = model.beta;
  Eigen::VectorXd ta = theta.theta_a, td = theta.theta_d;
  double extra_a = 0.0, extra_d = 0.0;  // interview-noise part of the variance
  if (model.is_latent()) {
    extra_a = ta.squaredNorm();
    extra_d = td.squaredNorm();
    ta = model.loading->transpose() * ta;
    td = model.loading->transpose() * td;
  }
  const Eigen::VectorXd mta = model.masked(ta);
  const Eigen::VectorXd mtd = model.masked(td);
  const double inv_ca = 1.0 / model.cost_a;
  const double inv_cd = 1.0 / model.cost_d;

  ResidualVector r;
  r.values[0] = inv_ca * ta.dot(mta) - inv_cd * td.dot(mtd);
  r.values[1] = inv_ca * beta.dot(mta) + beta.dot(model.mu_a) -
                inv_cd * beta.dot(mtd) - beta.dot(model.mu_d);
  r.values[2] = ta.dot(model.mu_a) - td.dot(model.mu_d);
  r.values[3] = (ta.squaredNorm() + extra_a) - (td.squaredNorm() + extra_d);
  r.values[4] = beta.dot(ta) - beta.dot(td);
  return r;
}

/// Gap report from matching the two groups' analytic summaries.
struct EqualityCheck {
  bool pass = false;
  double mean_gap = 0.0;
  double cov_gap = 0.0;

  double max_gap() const { return std::max(mean_gap, cov_gap); }
};

/// A policy satisfies equality of treatment (and responses) when the joint
/// ex-post law of (prediction score, outcome score) matches across groups;
/// for Gaussian populations matching mean and covariance suffices.
inline EqualityCheck verify_equality(const PolicyPair& theta, const PopulationModel& model,
                                     double tol) {
  const GaussianSummary a = analytic_summary(theta, Group::A, model);
  const GaussianSummary d = analytic_summary(theta, Group::D, model);
  EqualityCheck c;
  c.mean_gap = (a.mean - d.mean).cwiseAbs().maxCoeff();
  c.cov_gap = (a.cov - d.cov).cwiseAbs().maxCoeff();
  c.pass = c.mean_gap <= tol && c.cov_gap <= tol;
  return c;
}

/// Generating parameters of an ex-ante manifold point: the per-block
/// orthogonal matrices tying theta_A to theta_D.
struct ExAnteBlockData {
  Eigen::MatrixXd u_manip, u_nonmanip;
};

/// Generating parameters of a cost-case point: the sphere radii/offsets and
/// the sampled unit directions orthogonal to beta in every block.
struct CostBlockData {
  double k1 = 0.0, k2 = 0.0;
  PerGroup<Eigen::VectorXd> normal_manip, normal_nonmanip;
};

struct ManifoldPoint {
  PolicyPair theta;
  std::optional<ExAnteBlockData> exante;
  std::optional<CostBlockData> cost;
};

namespace detail {

inline constexpr double kRankTol = 1e-10;
inline constexpr int kResampleBudget = 100;
inline constexpr double kConstructionTol = 1e-8;

struct MaskSplit {
  std::vector<int> manip, nonmanip;
};

inline MaskSplit split_mask(const PopulationModel& model) {
  MaskSplit s;
  for (int i = 0; i < model.dim; ++i)
    (model.mask[i] == 1.0 ? s.manip : s.nonmanip).push_back(i);
  return s;
}

inline Eigen::VectorXd gather(const Eigen::VectorXd& v, const std::vector<int>& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[idx[i]];
  return out;
}

inline void scatter(Eigen::VectorXd& target, const std::vector<int>& idx,
                    const Eigen::VectorXd& block) {
  for (std::size_t i = 0; i < idx.size(); ++i)
    target[idx[i]] = block[static_cast<Eigen::Index>(i)];
}

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the sign
/// of R's diagonal fixed.
inline Eigen::MatrixXd haar_orthogonal(int n, NormalStream& rng) {
  Eigen::MatrixXd g = rng.matrix(n, n);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR();
  for (int i = 0; i < n; ++i)
    if (r(i, i) < 0.0) q.col(i) = -q.col(i);
  return q;
}

inline bool colinear(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double na = a.norm(), nb = b.norm();
  if (na < kRankTol || nb < kRankTol) return true;  // degenerate counts as colinear
  return std::abs(std::abs(a.dot(b)) - na * nb) <= kRankTol * na * nb;
}

/// View used by the constructors: the direct model itself, or the latent
/// model's constraint system expressed in theta~ = Loading^T theta.
struct ConstructView {
  const PopulationModel* model = nullptr;
  Eigen::MatrixXd loading_inv_t;  // Loading^{-T}, latent only
  bool latent = false;

  PolicyPair to_policy(const Eigen::VectorXd& ta, const Eigen::VectorXd& td) const {
    if (!latent) return PolicyPair(ta, td);
    return PolicyPair(loading_inv_t * ta, loading_inv_t * td);
  }
};

inline ConstructView make_view(const PopulationModel& model) {
  ConstructView v;
  v.model = &model;
  v.latent = model.is_latent();
  if (v.latent) {
    if (!model.square_loading())
      throw InfeasiblePremise("manifold construction supports square loadings only");
    v.loading_inv_t = model.loading->transpose().inverse();
  }
  return v;
}

/// Extra prediction-variance mismatch that the theta~-space construction does
/// not control for latent models: ||theta_A||^2 - ||theta_D||^2.
inline double latent_variance_gap(const ConstructView& view, const Eigen::VectorXd& ta,
                                  const Eigen::VectorXd& td) {
  if (!view.latent) return 0.0;
  return (view.loading_inv_t * ta).squaredNorm() - (view.loading_inv_t * td).squaredNorm();
}

struct ExAnteBlock {
  Eigen::MatrixXd u;
  Eigen::VectorXd particular;
  Eigen::MatrixXd null_basis;  // d_blk x (d_blk - 2)
};

/// Solves one block of the ex-ante system for a sampled orthogonal U:
///   (U^T beta_blk - beta_blk)^T x = rhs,  (U^T mu_A_blk - mu_D_blk)^T x = 0.
inline ExAnteBlock exante_block(const Eigen::VectorXd& beta_blk,
                                const Eigen::VectorXd& mu_a_blk,
                                const Eigen::VectorXd& mu_d_blk, double rhs,
                                NormalStream& rng) {
  const int dim = static_cast<int>(beta_blk.size());
  for (int attempt = 0; attempt < kResampleBudget; ++attempt) {
    Eigen::MatrixXd u = haar_orthogonal(dim, rng);
    Eigen::MatrixXd a(2, dim);
    a.row(0) = (u.transpose() * beta_blk - beta_blk).transpose();
    a.row(1) = (u.transpose() * mu_a_blk - mu_d_blk).transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV | Eigen::ComputeFullU);
    if (svd.singularValues().minCoeff() < kRankTol) continue;  // resample U
    Eigen::Vector2d b(rhs, 0.0);
    ExAnteBlock blk;
    blk.u = std::move(u);
    blk.particular = svd.solve(b);  // least-norm particular solution
    blk.null_basis = svd.matrixV().rightCols(dim - 2);
    return blk;
  }
  throw ResampleBudgetExceeded("could not sample a rank-2 block system");
}

}  // namespace detail

/// Constructs points on the equality-of-treatment manifold for ex-ante
/// distribution discrimination (equal costs, different means). Per block: a
/// Haar orthogonal U ties theta_A = U theta_D, and theta_D solves the
/// two-equation linear system with right-hand side +-c (beta^T mu_D -
/// beta^T mu_A); the remaining d_blk - 2 null directions are sampled.
inline std::vector<ManifoldPoint> construct_exante_feasible(const PopulationModel& model,
                                                            std::uint64_t seed, int n_points,
                                                            double null_scale = 1.0) {
  const auto view = detail::make_view(model);
  if (std::abs(model.cost_a - model.cost_d) > 1e-12)
    throw InfeasiblePremise("ex-ante construction requires equal costs");
  const auto split = detail::split_mask(model);
  const int d_m = static_cast<int>(split.manip.size());
  const int d_u = static_cast<int>(split.nonmanip.size());
  if (d_m < 3 || d_u < 3)
    throw InfeasiblePremise("both blocks need dimension >= 3 for a nontrivial stratum");

  const Eigen::VectorXd beta_m = detail::gather(model.beta, split.manip);
  const Eigen::VectorXd beta_u = detail::gather(model.beta, split.nonmanip);
  const Eigen::VectorXd mu_a_m = detail::gather(model.mu_a, split.manip);
  const Eigen::VectorXd mu_d_m = detail::gather(model.mu_d, split.manip);
  const Eigen::VectorXd mu_a_u = detail::gather(model.mu_a, split.nonmanip);
  const Eigen::VectorXd mu_d_u = detail::gather(model.mu_d, split.nonmanip);

  auto stack = [](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    Eigen::VectorXd out(x.size() + y.size());
    out << x, -y;
    return out;
  };
  if (detail::colinear(stack(mu_a_m, mu_d_m), stack(beta_m, beta_m)) ||
      detail::colinear(stack(mu_a_u, mu_d_u), stack(beta_u, beta_u)))
    throw InfeasiblePremise("premise vectors are colinear");

  const double b0 = model.cost_a * (model.beta.dot(model.mu_d) - model.beta.dot(model.mu_a));

  std::vector<ManifoldPoint> points;
  points.reserve(static_cast<std::size_t>(n_points));
  for (int p = 0; p < n_points; ++p) {
    NormalStream rng(substream_seed(seed, static_cast<std::uint64_t>(p)));
    ManifoldPoint point;
    for (int attempt = 0; attempt < detail::kResampleBudget; ++attempt) {
      auto blk_m = detail::exante_block(beta_m, mu_a_m, mu_d_m, b0, rng);
      auto blk_u = detail::exante_block(beta_u, mu_a_u, mu_d_u, -b0, rng);

      Eigen::VectorXd z_m = null_scale * rng.vector(d_m - 2);
      Eigen::VectorXd z_u = null_scale * rng.vector(d_u - 2);
      auto assemble = [&](const Eigen::VectorXd& zm, const Eigen::VectorXd& zu,
                          Eigen::VectorXd& ta, Eigen::VectorXd& td) {
        const Eigen::VectorXd td_m = blk_m.particular + blk_m.null_basis * zm;
        const Eigen::VectorXd td_u = blk_u.particular + blk_u.null_basis * zu;
        ta = Eigen::VectorXd::Zero(model.dim);
        td = Eigen::VectorXd::Zero(model.dim);
        detail::scatter(td, split.manip, td_m);
        detail::scatter(td, split.nonmanip, td_u);
        detail::scatter(ta, split.manip, blk_m.u * td_m);
        detail::scatter(ta, split.nonmanip, blk_u.u * td_u);
      };

      Eigen::VectorXd ta, td;
      assemble(z_m, z_u, ta, td);

      if (view.latent) {
        // The theta~-space solution leaves one quadratic condition open (the
        // interview-noise variance term). It is exactly quadratic along any
        // null-space ray, so a root of a scalar quadratic restores it.
        if (std::abs(detail::latent_variance_gap(view, ta, td)) > 1e-13) {
          Eigen::VectorXd w_m = rng.vector(d_m - 2);
          Eigen::VectorXd w_u = rng.vector(d_u - 2);
          auto gap_at = [&](double t) {
            Eigen::VectorXd xa, xd;
            assemble(z_m + t * w_m, z_u + t * w_u, xa, xd);
            return detail::latent_variance_gap(view, xa, xd);
          };
          const double c0 = gap_at(0.0);
          const double cp = gap_at(1.0);
          const double cm = gap_at(-1.0);
          const double qa = 0.5 * (cp + cm) - c0;
          const double qb = 0.5 * (cp - cm);
          double root = 0.0;
          bool found = false;
          if (std::abs(qa) < 1e-14) {
            if (std::abs(qb) > 1e-14) {
              root = -c0 / qb;
              found = true;
            }
          } else {
            const double disc = qb * qb - 4.0 * qa * c0;
            if (disc >= 0.0) {
              const double sq = std::sqrt(disc);
              const double r1 = (-qb + sq) / (2.0 * qa);
              const double r2 = (-qb - sq) / (2.0 * qa);
              root = std::abs(r1) < std::abs(r2) ? r1 : r2;
              found = true;
            }
          }
          if (!found) continue;  // no real root along this ray; redraw
          assemble(z_m + root * w_m, z_u + root * w_u, ta, td);
        }
      }

      point.theta = view.to_policy(ta, td);
      if (verify_equality(point.theta, model, detail::kConstructionTol).pass) {
        point.exante = ExAnteBlockData{blk_m.u, blk_u.u};
        break;
      }
      point.exante.reset();
    }
    if (!point.exante)
      throw ResampleBudgetExceeded("ex-ante manifold point construction failed");
    points.push_back(std::move(point));
  }
  return points;
}

namespace detail {

/// Samples a block vector with ||x||^2 = r_sq and x^T beta = offset:
/// the beta-component plus a random direction on the orthogonal sphere.
inline Eigen::VectorXd sphere_plane_point(const Eigen::VectorXd& beta_blk, double r_sq,
                                          double offset, NormalStream& rng,
                                          Eigen::VectorXd* normal_out) {
  const double beta_sq = beta_blk.squaredNorm();
  if (beta_sq < kRankTol) throw InfeasiblePremise("zero outcome direction in a block");
  const double radicand = r_sq - offset * offset / beta_sq;
  if (radicand <= 0.0)
    throw EmptyIntersection("sphere and hyperplane do not intersect");
  const int dim = static_cast<int>(beta_blk.size());
  Eigen::VectorXd dir;
  for (int attempt = 0; attempt < kResampleBudget; ++attempt) {
    dir = rng.vector(dim);
    dir -= (dir.dot(beta_blk) / beta_sq) * beta_blk;
    const double norm = dir.norm();
    if (norm > kRankTol) {
      dir /= norm;
      if (normal_out) *normal_out = dir;
      return (offset / beta_sq) * beta_blk + std::sqrt(radicand) * dir;
    }
  }
  throw ResampleBudgetExceeded("could not sample a direction orthogonal to beta");
}

}  // namespace detail

/// Constructs points on the equality-of-treatment manifold for cost
/// discrimination (zero means, different costs). Every block is a
/// sphere-hyperplane intersection with radius/offset determined by (k1, k2)
/// and the cost ratio.
inline std::vector<ManifoldPoint> construct_cost_feasible(const PopulationModel& model,
                                                          double k1, double k2,
                                                          std::uint64_t seed, int n_points) {
  const auto view = detail::make_view(model);
  if (model.mu_a.cwiseAbs().maxCoeff() > 1e-12 || model.mu_d.cwiseAbs().maxCoeff() > 1e-12)
    throw InfeasiblePremise("cost construction requires zero ex-ante means");
  const auto split = detail::split_mask(model);
  const int d_m = static_cast<int>(split.manip.size());
  const int d_u = static_cast<int>(split.nonmanip.size());
  if (d_m < 2 || d_u < 2)
    throw InfeasiblePremise("both blocks need dimension >= 2 for the sphere intersection");
  if (!(k1 > 0.0)) throw InfeasiblePremise("k1 must be positive");

  const Eigen::VectorXd beta_m = detail::gather(model.beta, split.manip);
  const Eigen::VectorXd beta_u = detail::gather(model.beta, split.nonmanip);
  const double ratio = model.cost_a / model.cost_d;

  // Radius^2 / plane offset per block, from the four block constraint sets.
  struct BlockSpec {
    double r_sq, offset;
  };
  const BlockSpec a_m{ratio * k1 * k1, ratio * k2};
  const BlockSpec d_m_spec{k1 * k1, k2};
  const BlockSpec a_u{k1 * k1, k2};
  const BlockSpec d_u_spec{ratio * k1 * k1, ratio * k2};

  std::vector<ManifoldPoint> points;
  points.reserve(static_cast<std::size_t>(n_points));
  for (int p = 0; p < n_points; ++p) {
    NormalStream rng(substream_seed(seed, static_cast<std::uint64_t>(p) + 0x51c0ffULL));
    ManifoldPoint point;
    bool done = false;
    for (int attempt = 0; attempt < detail::kResampleBudget && !done; ++attempt) {
      CostBlockData data;
      data.k1 = k1;
      data.k2 = k2;
      const Eigen::VectorXd blk_a_m = detail::sphere_plane_point(
          beta_m, a_m.r_sq, a_m.offset, rng, &data.normal_manip.a);
      Eigen::VectorXd blk_d_m = detail::sphere_plane_point(
          beta_m, d_m_spec.r_sq, d_m_spec.offset, rng, &data.normal_manip.d);
      const Eigen::VectorXd blk_a_u = detail::sphere_plane_point(
          beta_u, a_u.r_sq, a_u.offset, rng, &data.normal_nonmanip.a);
      Eigen::VectorXd blk_d_u = detail::sphere_plane_point(
          beta_u, d_u_spec.r_sq, d_u_spec.offset, rng, &data.normal_nonmanip.d);

      auto assemble = [&](const Eigen::VectorXd& dm, const Eigen::VectorXd& du,
                          Eigen::VectorXd& ta, Eigen::VectorXd& td) {
        ta = Eigen::VectorXd::Zero(model.dim);
        td = Eigen::VectorXd::Zero(model.dim);
        detail::scatter(ta, split.manip, blk_a_m);
        detail::scatter(ta, split.nonmanip, blk_a_u);
        detail::scatter(td, split.manip, dm);
        detail::scatter(td, split.nonmanip, du);
      };

      Eigen::VectorXd ta, td;
      assemble(blk_d_m, blk_d_u, ta, td);

      if (view.latent && std::abs(detail::latent_variance_gap(view, ta, td)) > 1e-13) {
        // Rotating the D blocks inside their spheres preserves every block
        // constraint; scan the rotation angle for a root of the remaining
        // interview-noise variance gap.
        auto orth_dir = [&](const Eigen::VectorXd& beta_blk, const Eigen::VectorXd& u1) {
          Eigen::VectorXd w = rng.vector(beta_blk.size());
          w -= (w.dot(beta_blk) / beta_blk.squaredNorm()) * beta_blk;
          w -= w.dot(u1) * u1;
          const double n = w.norm();
          return n > detail::kRankTol ? Eigen::VectorXd(w / n) : Eigen::VectorXd();
        };
        const Eigen::VectorXd u2_m = orth_dir(beta_m, data.normal_manip.d);
        const Eigen::VectorXd u2_u = orth_dir(beta_u, data.normal_nonmanip.d);
        if (u2_m.size() == 0 && u2_u.size() == 0) continue;  // no rotational freedom

        const double rad_m = std::sqrt(d_m_spec.r_sq -
                                       d_m_spec.offset * d_m_spec.offset / beta_m.squaredNorm());
        const double rad_u = std::sqrt(d_u_spec.r_sq -
                                       d_u_spec.offset * d_u_spec.offset / beta_u.squaredNorm());
        const Eigen::VectorXd base_m = (d_m_spec.offset / beta_m.squaredNorm()) * beta_m;
        const Eigen::VectorXd base_u = (d_u_spec.offset / beta_u.squaredNorm()) * beta_u;

        auto rotated = [&](double angle, Eigen::VectorXd& dm, Eigen::VectorXd& du) {
          dm = base_m + rad_m * (u2_m.size() ? std::cos(angle) * data.normal_manip.d +
                                                   std::sin(angle) * u2_m
                                             : data.normal_manip.d);
          du = base_u + rad_u * (u2_u.size() ? std::cos(angle) * data.normal_nonmanip.d +
                                                   std::sin(angle) * u2_u
                                             : data.normal_nonmanip.d);
        };
        auto gap_at = [&](double angle) {
          Eigen::VectorXd dm, du, xa, xd;
          rotated(angle, dm, du);
          assemble(dm, du, xa, xd);
          return detail::latent_variance_gap(view, xa, xd);
        };

        const int scan = 64;
        double lo = 0.0, hi = 0.0;
        bool bracketed = false;
        double prev = gap_at(0.0);
        for (int i = 1; i <= scan; ++i) {
          const double angle = 2.0 * M_PI * static_cast<double>(i) / scan;
          const double cur = gap_at(angle);
          if (prev == 0.0 || (prev < 0.0) != (cur < 0.0)) {
            lo = 2.0 * M_PI * static_cast<double>(i - 1) / scan;
            hi = angle;
            bracketed = true;
            break;
          }
          prev = cur;
        }
        if (!bracketed) continue;  // retry with fresh block draws
        double flo = gap_at(lo);
        for (int i = 0; i < 100; ++i) {
          const double mid = 0.5 * (lo + hi);
          const double fm = gap_at(mid);
          if (fm == 0.0) {
            lo = hi = mid;
            break;
          }
          if ((flo < 0.0) != (fm < 0.0)) {
            hi = mid;
          } else {
            lo = mid;
            flo = fm;
          }
        }
        Eigen::VectorXd dm, du;
        rotated(0.5 * (lo + hi), dm, du);
        blk_d_m = dm;
        blk_d_u = du;
        assemble(blk_d_m, blk_d_u, ta, td);
      }

      point.theta = view.to_policy(ta, td);
      if (verify_equality(point.theta, model, detail::kConstructionTol).pass) {
        point.cost = std::move(data);
        done = true;
      }
    }
    if (!done) throw ResampleBudgetExceeded("cost manifold point construction failed");
    points.push_back(std::move(point));
  }
  return points;
}

}  // namespace steerfair
