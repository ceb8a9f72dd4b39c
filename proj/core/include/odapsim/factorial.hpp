#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "odapsim/scenario.hpp"

namespace odapsim {

// Intercept (no fragments) or an interaction of 1..3 fragment placements.
struct FactorTerm {
  std::vector<int> fragments; // catalog indices, ascending

  int level() const { return static_cast<int>(fragments.size()); }
  // "intercept", "f1", "f1*f2*f5" (1-based fragment positions).
  std::string name() const;

  bool operator==(const FactorTerm&) const = default;
};

struct FactorEstimate {
  FactorTerm term;
  double coefficient_s = 0.0;
  double std_err = 0.0;
  double t_stat = 0.0;
  double p_value = 1.0;
  bool significant = false;
};

// Least-squares fit on the +/-1 coded design (-1 = database, +1 = product).
// Coefficients are seconds per coded unit; standard errors come from the
// replicate-level pooled variance.
struct FactorModel {
  int k = 0;
  int max_level = 0;
  double alpha = 0.05;
  std::vector<FactorEstimate> estimates; // intercept first, then level order
  double pooled_variance = 0.0;
  std::int64_t pooled_dof = 0;
  int replicates = 0;
  bool full_factorial = false;
  std::string warning; // non-empty when the design is not a full factorial

  double predict(const DistributionPattern& pattern) const;
  const FactorEstimate* find(const FactorTerm& term) const;
};

// `responses[i]` holds the replicate makespans observed for `patterns[i]`.
// Throws ValidationError on rank-deficient designs, naming collinear terms.
FactorModel fit_factorial_regression(const std::vector<DistributionPattern>& patterns,
                                     const std::vector<std::vector<double>>& responses,
                                     int max_level = 3, double alpha = 0.05);

// Significant non-intercept factors: main effects first, then 2-way, then
// 3-way interactions, each group in lexicographic fragment order.
std::vector<FactorEstimate> select_significant(const FactorModel& model, double alpha);

} // namespace odapsim
