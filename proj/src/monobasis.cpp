#include "stgp/monobasis.hpp"

#include <cmath>
#include <stdexcept>

namespace stgp {

namespace {
void check_domain(double x) {
  if (x < -1.0 || x > 1.0) throw std::domain_error("monobasis: x must lie in [-1, 1]");
}
}  // namespace

BasisSpec::BasisSpec(int num_intervals) : L(num_intervals) {
  if (L < 2) throw std::invalid_argument("BasisSpec: L must be >= 2");
}

void KernelParams::validate() const {
  if (!(rho1_sq > 0.0) || !(rho2 > 0.0))
    throw std::domain_error("KernelParams: rho1_sq and rho2 must be > 0");
}

double hat(int k, double x, const BasisSpec& spec) {
  check_domain(x);
  if (k < 0 || k > spec.L) throw std::out_of_range("hat: k out of range");
  const double d = spec.delta();
  const double r = std::abs(x - spec.knot(k)) / d;
  return r >= 1.0 ? 0.0 : 1.0 - r;
}

double psi(int k, double x, const BasisSpec& spec) {
  check_domain(x);
  if (k < 0 || k > spec.L) throw std::out_of_range("psi: k out of range");
  const double d = spec.delta();
  const double uk = spec.knot(k);
  // rising half: contributes (x - u_{k-1})^2 / (2d) up to d/2 at u_k
  double acc = 0.0;
  if (k > 0) {
    const double lo = uk - d;
    if (x >= uk)
      acc += 0.5 * d;
    else if (x > lo)
      acc += (x - lo) * (x - lo) / (2.0 * d);
  }
  // falling half: d/2 - (u_{k+1} - x)^2 / (2d) once past u_k
  if (k < spec.L && x > uk) {
    const double hi = uk + d;
    acc += x >= hi ? 0.5 * d : 0.5 * d - (hi - x) * (hi - x) / (2.0 * d);
  }
  return acc;
}

Eigen::MatrixXd design_matrix(const Eigen::VectorXd& index_values, const BasisSpec& spec) {
  Eigen::MatrixXd phi(index_values.size(), spec.num_basis());
  for (Eigen::Index i = 0; i < index_values.size(); ++i)
    for (int k = 0; k <= spec.L; ++k) phi(i, k) = psi(k, index_values[i], spec);
  return phi;
}

double evaluate_index(double x, const Eigen::VectorXd& xi, const BasisSpec& spec) {
  if (xi.size() != spec.num_basis())
    throw std::invalid_argument("evaluate_index: xi has wrong length");
  if (xi.minCoeff() < 0.0) throw std::invalid_argument("evaluate_index: xi must be nonnegative");
  double g = 0.0;
  for (int k = 0; k <= spec.L; ++k) g += xi[k] * psi(k, x, spec);
  return g;
}

double matern32(double r, const KernelParams& kp) {
  kp.validate();
  if (r < 0.0) throw std::domain_error("matern32: r must be >= 0");
  const double z = std::sqrt(3.0) * r / kp.rho2;
  return kp.rho1_sq * (1.0 + z) * std::exp(-z);
}

Eigen::MatrixXd kernel_matrix(const BasisSpec& spec, const KernelParams& kp) {
  kp.validate();
  const int m = spec.num_basis();
  Eigen::VectorXd lag(m);
  for (int k = 0; k < m; ++k) lag[k] = matern32(k * spec.delta(), kp);
  Eigen::MatrixXd K(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) K(i, j) = lag[std::abs(i - j)];
  K.diagonal().array() += 1e-8 * kp.rho1_sq;
  if (Eigen::LLT<Eigen::MatrixXd>(K).info() != Eigen::Success)
    throw std::runtime_error("kernel_matrix: Cholesky failed after jitter");
  return K;
}

}  // namespace stgp
