#include "odapsim/factorial.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <Eigen/Dense>

#include "odapsim/stats.hpp"

namespace odapsim {

std::string FactorTerm::name() const {
  if (fragments.empty()) return "intercept";
  std::string out;
  for (int f : fragments) {
    if (!out.empty()) out += '*';
    out += 'f' + std::to_string(f + 1);
  }
  return out;
}

namespace {

// Intercept, then all fragment combinations level by level, lexicographic
// within a level.
std::vector<FactorTerm> make_terms(int k, int max_level) {
  std::vector<FactorTerm> terms;
  terms.push_back({});
  std::vector<int> combo;
  auto recurse = [&](auto&& self, int start, int remaining) -> void {
    if (remaining == 0) {
      terms.push_back({combo});
      return;
    }
    for (int f = start; f <= k - remaining; ++f) {
      combo.push_back(f);
      self(self, f + 1, remaining - 1);
      combo.pop_back();
    }
  };
  for (int level = 1; level <= max_level; ++level) recurse(recurse, 0, level);
  return terms;
}

double coded(const DistributionPattern& pattern, const FactorTerm& term) {
  double v = 1.0;
  for (int f : term.fragments) v *= pattern.on_product(f) ? 1.0 : -1.0;
  return v;
}

} // namespace

double FactorModel::predict(const DistributionPattern& pattern) const {
  double y = 0.0;
  for (const FactorEstimate& e : estimates) y += e.coefficient_s * coded(pattern, e.term);
  return y;
}

const FactorEstimate* FactorModel::find(const FactorTerm& term) const {
  for (const FactorEstimate& e : estimates) {
    if (e.term == term) return &e;
  }
  return nullptr;
}

FactorModel fit_factorial_regression(const std::vector<DistributionPattern>& patterns,
                                     const std::vector<std::vector<double>>& responses,
                                     int max_level, double alpha) {
  if (patterns.empty()) throw ValidationError("regression needs at least one pattern");
  if (patterns.size() != responses.size()) {
    throw ValidationError("regression: one response list per pattern required");
  }
  const int k = patterns.front().size();
  for (const DistributionPattern& p : patterns) {
    if (p.size() != k) throw ValidationError("regression: patterns differ in length");
  }
  if (max_level < 0 || max_level > k) {
    throw ValidationError("regression: max_level must be in [0, k]");
  }
  std::size_t replicates = 0;
  for (const auto& cell : responses) {
    if (cell.empty()) throw ValidationError("regression: empty response cell");
    if (replicates == 0) replicates = cell.size();
    if (cell.size() != replicates) {
      throw ValidationError("regression: replicate counts differ across cells");
    }
  }

  FactorModel model;
  model.k = k;
  model.max_level = max_level;
  model.alpha = alpha;
  model.replicates = static_cast<int>(replicates);

  // Full factorial = every pattern exactly once.
  std::set<std::uint32_t> ids;
  for (const DistributionPattern& p : patterns) ids.insert(p.index());
  model.full_factorial = k <= 31 && ids.size() == patterns.size() &&
                         patterns.size() == (std::size_t{1} << k);
  if (!model.full_factorial) {
    model.warning = "input is not a full factorial; generic least squares used "
                    "(orthogonality shortcut unavailable)";
  }

  const std::vector<FactorTerm> terms = make_terms(k, max_level);
  const int n = static_cast<int>(patterns.size());
  const int p = static_cast<int>(terms.size());

  Eigen::MatrixXd x(n, p);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) x(i, j) = coded(patterns[i], terms[j]);
    y(i) = stats::mean(responses[i]);
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(1e-10);
  if (qr.rank() < p) {
    const auto perm = qr.colsPermutation().indices();
    std::string collinear;
    for (int j = qr.rank(); j < p; ++j) {
      if (!collinear.empty()) collinear += ", ";
      collinear += terms[perm(j)].name();
    }
    throw ValidationError("regression design is rank deficient; collinear terms: " +
                          collinear);
  }
  const Eigen::VectorXd beta = qr.solve(y);

  // Pooled within-cell variance of a single observation.
  double ss = 0.0;
  std::int64_t dof = 0;
  for (const auto& cell : responses) {
    if (cell.size() < 2) continue;
    ss += stats::sample_variance(cell) * static_cast<double>(cell.size() - 1);
    dof += static_cast<std::int64_t>(cell.size()) - 1;
  }
  model.pooled_variance = dof > 0 ? ss / static_cast<double>(dof) : 0.0;
  model.pooled_dof = dof;

  // Var(beta) = (X'X)^-1 * s^2 / replicates; the diagonal is 1/n on a full
  // factorial.
  Eigen::VectorXd var_scale(p);
  if (model.full_factorial) {
    var_scale.setConstant(1.0 / static_cast<double>(n));
  } else {
    const Eigen::MatrixXd xtx_inv =
        (x.transpose() * x).ldlt().solve(Eigen::MatrixXd::Identity(p, p));
    var_scale = xtx_inv.diagonal();
  }

  double max_abs_coef = 0.0;
  for (int j = 0; j < p; ++j) max_abs_coef = std::max(max_abs_coef, std::abs(beta(j)));
  const bool noise_free = model.pooled_dof == 0 || model.pooled_variance <= 0.0;

  model.estimates.reserve(p);
  for (int j = 0; j < p; ++j) {
    FactorEstimate e;
    e.term = terms[j];
    e.coefficient_s = beta(j);
    if (noise_free) {
      // Exact responses: any coefficient distinguishable from rounding noise
      // is real.
      e.std_err = 0.0;
      e.t_stat = 0.0;
      e.significant = std::abs(beta(j)) > 1e-9 * std::max(1.0, max_abs_coef);
      e.p_value = e.significant ? 0.0 : 1.0;
    } else {
      e.std_err = std::sqrt(model.pooled_variance * var_scale(j) /
                            static_cast<double>(model.replicates));
      e.t_stat = e.std_err > 0 ? e.coefficient_s / e.std_err : 0.0;
      e.p_value = stats::t_p_value_two_sided(e.t_stat, static_cast<double>(dof));
      e.significant = e.p_value < alpha;
    }
    model.estimates.push_back(std::move(e));
  }
  return model;
}

std::vector<FactorEstimate> select_significant(const FactorModel& model, double alpha) {
  std::vector<FactorEstimate> out;
  for (const FactorEstimate& e : model.estimates) {
    if (e.term.fragments.empty()) continue;
    const bool pass = model.pooled_dof == 0 || model.pooled_variance <= 0.0
                          ? e.significant && alpha > 0.0
                          : e.p_value < alpha;
    if (pass) out.push_back(e);
  }
  // make_terms already emits mains, then 2-way, then 3-way, lexicographic
  // within each level, and fitting preserved that order.
  return out;
}

} // namespace odapsim
