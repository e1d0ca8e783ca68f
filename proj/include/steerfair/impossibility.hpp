#pragma once

#include <cstdint>
#include <vector>

#include "steerfair/markets.hpp"
#include "steerfair/math.hpp"
#include "steerfair/response.hpp"
#include "steerfair/rng.hpp"

namespace steerfair {

enum class DiscriminationForm { SkillGap, CostGap };

inline const char* to_string(DiscriminationForm f) {
  return f == DiscriminationForm::SkillGap ? "skill_gap" : "cost_gap";
}

/// One grid cell of the group-blind threshold sweep.
struct GapSweepRow {
  double threshold = 0.0;
  double response_a = 0.0;  // E[Y' | A] under the group-blind threshold
  double response_d = 0.0;
  double gap = 0.0;  // response_a - response_d
  bool positive_incentive = false;
};

/// Evaluates group-blind thresholds on a market with exactly one form of
/// discrimination. Workers are drawn once per group from the ex-ante skill
/// laws via a common standard-normal stream (a monotone coupling: both groups
/// see the same quantiles), each best-responds to the threshold, and the
/// ex-post response means are compared.
inline std::vector<GapSweepRow> continuous_gap_sweep(const ContinuousMarket1D& market,
                                                     const std::vector<double>& thresholds,
                                                     DiscriminationForm form,
                                                     int n_workers, std::uint64_t seed) {
  if (form == DiscriminationForm::SkillGap) {
    if (market.cost_a != market.cost_d || !(market.skill_mean_a > market.skill_mean_d))
      throw ConfigError("skill_gap sweep needs equal costs and mean_A > mean_D");
  } else {
    if (!(market.cost_a < market.cost_d) || market.skill_mean_a != market.skill_mean_d ||
        market.skill_sd_a != market.skill_sd_d)
      throw ConfigError("cost_gap sweep needs equal skill laws and c_A < c_D");
  }

  NormalStream stream(substream_seed(seed, 0xb1ed5eedULL));
  Eigen::VectorXd z = stream.vector(n_workers);

  std::vector<GapSweepRow> rows;
  rows.reserve(thresholds.size());
  for (double t : thresholds) {
    GapSweepRow row;
    row.threshold = t;
    const double p1 = 1.0 - market.signal_cdf(t, 1);
    const double p0 = 1.0 - market.signal_cdf(t, 0);
    row.positive_incentive = market.wage * (p1 - p0) > 0.0;
    for (Group g : kGroups) {
      double mean_response = 0.0;
      for (int i = 0; i < n_workers; ++i) {
        const double s = market.skill_mean(g) + market.skill_sd(g) * z[i];
        mean_response += sigmoid(continuous_skill_response(s, g, market, t));
      }
      mean_response /= static_cast<double>(n_workers);
      (g == Group::A ? row.response_a : row.response_d) = mean_response;
    }
    row.gap = row.response_a - row.response_d;
    rows.push_back(row);
  }
  return rows;
}

/// One cell of the discrete-market threshold-pair scan.
struct EqualTreatmentScanRow {
  double theta_a = 0.0, theta_d = 0.0;
  double tpr_a = 0.0, fpr_a = 0.0, tpr_d = 0.0, fpr_d = 0.0;
  double pi_a = 0.0, pi_d = 0.0;
  bool equal_treatment = false;  // ex-post TPR and FPR match across groups
};

inline constexpr double kEqualTreatmentTol = 1e-9;

/// Scans threshold pairs for equal treatment (matching ex-post TPR and FPR,
/// the criterion itself rather than threshold equality) and reports the
/// long-run qualified fractions pi_g for each pair.
inline std::vector<EqualTreatmentScanRow> coate_loury_equal_treatment_scan(
    const CoateLouryMarket& market, const std::vector<double>& grid) {
  std::vector<EqualTreatmentScanRow> rows;
  rows.reserve(grid.size() * grid.size());
  for (double ta : grid) {
    for (double td : grid) {
      EqualTreatmentScanRow row;
      row.theta_a = ta;
      row.theta_d = td;
      row.tpr_a = market.tpr(ta);
      row.fpr_a = market.fpr(ta);
      row.tpr_d = market.tpr(td);
      row.fpr_d = market.fpr(td);
      row.pi_a = coate_loury_pi(ta, Group::A, market);
      row.pi_d = coate_loury_pi(td, Group::D, market);
      row.equal_treatment = std::abs(row.tpr_a - row.tpr_d) <= kEqualTreatmentTol &&
                            std::abs(row.fpr_a - row.fpr_d) <= kEqualTreatmentTol;
      rows.push_back(row);
    }
  }
  return rows;
}

/// Default threshold grid: `count` points over [m0 - 2, m1 + 2].
inline std::vector<double> default_threshold_grid(double m0, double m1, int count = 101) {
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(count));
  const double lo = m0 - 2.0, hi = m1 + 2.0;
  for (int i = 0; i < count; ++i)
    grid.push_back(lo + (hi - lo) * static_cast<double>(i) / (count - 1));
  return grid;
}

}  // namespace steerfair
