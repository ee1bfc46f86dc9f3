#include "stgp/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace stgp {

double Rng::half_normal(double scale2) {
  if (scale2 <= 0.0) throw std::domain_error("half_normal: scale2 must be > 0");
  return std::abs(normal(0.0, std::sqrt(scale2)));
}

double Rng::truncated_normal_lower(double mean, double sd, double lower) {
  if (sd <= 0.0) throw std::domain_error("truncated_normal_lower: sd must be > 0");
  const double alpha = (lower - mean) / sd;
  if (alpha < 0.5) {
    // acceptance probability >= P(Z > 0.5) ~ 0.31
    for (;;) {
      const double z = normal();
      if (z >= alpha) return mean + sd * z;
    }
  }
  // Robert (1995) shifted-exponential proposal for the tail.
  const double lambda = 0.5 * (alpha + std::sqrt(alpha * alpha + 4.0));
  for (;;) {
    const double z = alpha + exponential(lambda);
    const double d = z - lambda;
    if (uniform() <= std::exp(-0.5 * d * d)) return mean + sd * z;
  }
}

}  // namespace stgp
