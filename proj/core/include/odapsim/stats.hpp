#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace odapsim::stats {

double mean(std::span<const double> values);
// Unbiased sample variance; 0 for fewer than two values (callers flag that
// case separately).
double sample_variance(std::span<const double> values);

// Student-t quantile and two-sided p value.
double t_quantile(double probability, double dof);
double t_p_value_two_sided(double t, double dof);

// Half width of the 95% confidence interval for the mean of n values with
// sample variance `variance`; 0 when n < 2.
double ci95_half_width(double variance, std::int64_t n);

// Deterministic mixing of sweep coordinates into a simulation seed.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b,
                       std::uint64_t c);

} // namespace odapsim::stats
