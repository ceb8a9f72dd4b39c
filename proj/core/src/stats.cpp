#include "odapsim/stats.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <cmath>

namespace odapsim::stats {

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double sample_variance(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return ss / static_cast<double>(n - 1);
}

double t_quantile(double probability, double dof) {
  boost::math::students_t dist(dof);
  return boost::math::quantile(dist, probability);
}

double t_p_value_two_sided(double t, double dof) {
  boost::math::students_t dist(dof);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

double ci95_half_width(double variance, std::int64_t n) {
  if (n < 2 || variance <= 0.0) return 0.0;
  return t_quantile(0.975, static_cast<double>(n - 1)) *
         std::sqrt(variance / static_cast<double>(n));
}

// splitmix64 finalizer, applied per mixed-in word.
static std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b,
                       std::uint64_t c) {
  std::uint64_t h = splitmix(base);
  h = splitmix(h ^ a);
  h = splitmix(h ^ b);
  h = splitmix(h ^ c);
  return h;
}

} // namespace odapsim::stats
