#pragma once

#include <Eigen/Dense>

namespace stgp {

/// Regular knot grid on [-1, 1] for the monotone piecewise-linear basis.
struct BasisSpec {
  int L = 25;

  explicit BasisSpec(int num_intervals = 25);

  double delta() const { return 2.0 / L; }
  double knot(int k) const { return -1.0 + k * delta(); }
  int num_basis() const { return L + 1; }
};

/// Matern kernel parameters; smoothness is fixed at 3/2.
struct KernelParams {
  double rho1_sq = 1.0;
  double rho2 = 1.0;

  void validate() const;
};

/// Hat function h_k at x; boundary hats (k = 0, L) are half-hats.
double hat(int k, double x, const BasisSpec& spec);

/// Integrated hat psi_k(x) = int_{-1}^x h_k, closed-form piecewise quadratic.
double psi(int k, double x, const BasisSpec& spec);

/// Rows are psi_0..psi_L evaluated at each index value.
Eigen::MatrixXd design_matrix(const Eigen::VectorXd& index_values, const BasisSpec& spec);

/// g*(x) = sum_k xi_k psi_k(x); xi >= 0 guarantees monotonicity and g*(-1) = 0.
double evaluate_index(double x, const Eigen::VectorXd& xi, const BasisSpec& spec);

/// Matern-3/2 covariance at lag r.
double matern32(double r, const KernelParams& kp);

/// K[i][j] = matern32(|u_i - u_j|) + jitter on the diagonal; Toeplitz, SPD.
Eigen::MatrixXd kernel_matrix(const BasisSpec& spec, const KernelParams& kp);

}  // namespace stgp
