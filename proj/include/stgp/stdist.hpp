#pragma once

#include <Eigen/Dense>
#include <utility>

#include "stgp/rng.hpp"

namespace stgp {

/// Parameters of the p-dimensional skew-t family: location mu, scale
/// matrix omega (SPD), skewness vector delta, degrees of freedom nu.
/// Derived quantities (Sigma = omega + delta delta^T, Lambda, d(y)) are
/// computed on demand, never stored.
struct StParams {
  Eigen::VectorXd mu;
  Eigen::MatrixXd omega;
  Eigen::VectorXd delta;
  double nu = 0.0;

  int dim() const { return static_cast<int>(mu.size()); }
  void validate() const;
};

/// Negative half-integer moments of Gamma(nu/2, nu/2): m1 = E U^{-1/2},
/// m2 = E U^{-1}, m3 = E U^{-3/2}. Moments below their existence
/// threshold (nu > 1, 2, 3 respectively) are NaN with the flag cleared.
struct GammaMoments {
  double m1, m2, m3;
  double nu;
  bool has_m1, has_m2, has_m3;
};

/// h(nu) = -sqrt(nu/pi) Gamma((nu-1)/2) / Gamma(nu/2), the centering
/// constant that gives the skew-t random effect mean zero.
double h_of_nu(double nu);

GammaMoments gamma_neg_moments(double nu);

/// Stochastic representation draw: mu + U^{-1/2} (delta |X0| + X1).
/// When nu == +inf the mixing variable is pinned to 1 (skew-normal limit).
Eigen::VectorXd sample_st(const StParams& params, Rng& rng);

/// Log density of the skew-t vector (hierarchy integrated out).
double st_logpdf(const Eigen::VectorXd& y, const StParams& params);

/// Closure under affine maps: A Y + b.
StParams st_linear_transform(const StParams& params, const Eigen::MatrixXd& A,
                             const Eigen::VectorXd& b);

/// Second and third central-location moments of the univariate skew-t
/// ST_1(h(nu) delta, sigma2, delta, nu); sigma2 is the ST scale
/// parameter (in the mixed model, d^2 + sigma^2). Requires nu > 3.
std::pair<double, double> st_moments_23(double delta, double sigma2, double nu);

/// Recovers delta from (E Y^2, E Y^3) by the unique real root of the
/// depressed cubic. nu must be an integer in [4, 100], where the
/// coefficient ratio is verified positive.
double recover_delta_cardano(double m2, double m3, int nu);

/// Multivariate t log density (dense scale matrix).
double mvt_logpdf(const Eigen::VectorXd& y, const Eigen::VectorXd& mu,
                  const Eigen::MatrixXd& sigma, double nu);

/// Exact-HMC (wall bounce) draw from N(mean, cov) restricted to the
/// positive orthant. `start`, when nonempty, must be strictly positive
/// and is used as the chain's initial point; `periods` trajectory legs
/// of length pi/2 are simulated before the point is returned.
Eigen::VectorXd sample_truncated_mvn_positive(const Eigen::VectorXd& mean,
                                              const Eigen::MatrixXd& cov, Rng& rng,
                                              const Eigen::VectorXd& start = Eigen::VectorXd(),
                                              int periods = 20,
                                              long max_wall_hits = 1000000);

}  // namespace stgp
