#pragma once

namespace stgp {

/// Standard normal cdf.
double normal_cdf(double x);

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double reg_incomplete_beta(double a, double b, double x);

/// Univariate Student-t cdf with dof degrees of freedom (location 0 scale 1).
double student_t_cdf(double x, double dof);

/// Regularized lower incomplete gamma P(a, x).
double reg_lower_gamma(double a, double x);

/// Inverse of P(a, .) for p in (0, 1).
double inv_reg_lower_gamma(double a, double p);

/// log N(x | mean, var).
double normal_logpdf(double x, double mean, double var);

/// log Gamma(x | shape, rate).
double gamma_logpdf(double x, double shape, double rate);

}  // namespace stgp
