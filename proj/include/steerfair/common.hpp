#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace steerfair {

/// Sensitive-trait value. Exactly two groups: A (advantaged) and D (disadvantaged).
enum class Group { A = 0, D = 1 };

constexpr std::array<Group, 2> kGroups{Group::A, Group::D};

inline const char* group_name(Group g) { return g == Group::A ? "A" : "D"; }

inline Group other_group(Group g) { return g == Group::A ? Group::D : Group::A; }

/// Fixed-size container indexed by Group; every per-group quantity holds both entries.
template <class T>
struct PerGroup {
  T a{};
  T d{};

  T& operator[](Group g) { return g == Group::A ? a : d; }
  const T& operator[](Group g) const { return g == Group::A ? a : d; }
};

// ---------------------------------------------------------------------------
// Error types
// ---------------------------------------------------------------------------

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ValidationIssue {
  NonPositiveCost,
  MaskArityMismatch,
  MissingLoading,
  RankDeficientLoading,
  ProportionOutOfRange,
  SpuriousLoading,
  BadDimension,
  BadMaskEntry,
  NonFiniteField,
  NegativeRegWeight,
};

inline const char* to_string(ValidationIssue v) {
  switch (v) {
    case ValidationIssue::NonPositiveCost: return "NonPositiveCost";
    case ValidationIssue::MaskArityMismatch: return "MaskArityMismatch";
    case ValidationIssue::MissingLoading: return "MissingLoading";
    case ValidationIssue::RankDeficientLoading: return "RankDeficientLoading";
    case ValidationIssue::ProportionOutOfRange: return "ProportionOutOfRange";
    case ValidationIssue::SpuriousLoading: return "SpuriousLoading";
    case ValidationIssue::BadDimension: return "BadDimension";
    case ValidationIssue::BadMaskEntry: return "BadMaskEntry";
    case ValidationIssue::NonFiniteField: return "NonFiniteField";
    case ValidationIssue::NegativeRegWeight: return "NegativeRegWeight";
  }
  return "Unknown";
}

/// Carries every violated invariant found while validating a model record.
struct ValidationError : std::runtime_error {
  std::vector<ValidationIssue> issues;

  explicit ValidationError(std::vector<ValidationIssue> iss)
      : std::runtime_error(join(iss)), issues(std::move(iss)) {}

  bool has(ValidationIssue v) const {
    for (auto i : issues)
      if (i == v) return true;
    return false;
  }

 private:
  static std::string join(const std::vector<ValidationIssue>& iss) {
    std::string s = "model validation failed:";
    for (auto i : iss) {
      s += ' ';
      s += to_string(i);
    }
    return s;
  }
};

struct ArityMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct EmptyGroup : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DegenerateDenominator : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonConcaveObjective : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Base for manifold-construction failures (maps to a distinct CLI exit code).
struct InfeasibleConstruction : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InfeasiblePremise : InfeasibleConstruction {
  using InfeasibleConstruction::InfeasibleConstruction;
};

struct EmptyIntersection : InfeasibleConstruction {
  using InfeasibleConstruction::InfeasibleConstruction;
};

struct ResampleBudgetExceeded : InfeasibleConstruction {
  using InfeasibleConstruction::InfeasibleConstruction;
};

struct SolverFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace steerfair
