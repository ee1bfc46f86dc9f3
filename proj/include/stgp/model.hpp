#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "stgp/monobasis.hpp"

namespace stgp {

/// One subject: stacked tooth-level responses and subject covariates.
struct Subject {
  std::string id;
  int n_teeth = 0;
  Eigen::VectorXd y_pd;   // length n_teeth
  Eigen::VectorXd y_cal;  // length n_teeth
  Eigen::MatrixXd X;      // n_teeth x P, rows scaled to L2 norm <= 1
  double weight = 1.0;

  void validate() const;
  Eigen::VectorXd stacked_y() const;  // (y_pd; y_cal)
};

struct PanelDataset {
  std::vector<Subject> subjects;
  int P = 0;
  std::vector<std::vector<int>> group_map;  // horseshoe groups, 0-based columns
  std::vector<int> normal_prior_columns;    // 0-based

  int N() const { return static_cast<int>(subjects.size()); }
  void validate() const;
};

/// Divides every X row by (1 + 1e-9) * max row L2 norm across the dataset,
/// so |x^T beta| <= 1 for any unit beta. Returns the divisor.
double scale_rows(PanelDataset& data);

/// Full parameter state of one chain.
struct ModelState {
  double a = 1.0;
  Eigen::VectorXd beta_raw;  // beta = beta_raw / ||beta_raw||
  Eigen::VectorXd xi;        // length L+1, >= 0
  double delta = 0.0;
  double sigma2 = 1.0;
  double d2 = 1.0;
  double nu = 5.0;
  double rho1_sq = 1.0;
  double rho2 = 1.0;
  Eigen::VectorXd lambda;  // one per horseshoe group, > 0
  double tau = 0.5;        // in (0, 1)
  // per-subject latents
  Eigen::VectorXd b;
  Eigen::VectorXd s;  // >= 0
  Eigen::VectorXd u;  // > 0

  Eigen::VectorXd beta() const;
};

/// Compound-symmetry matrix r2 * 11^T + v * I with O(n) solve, quadratic
/// forms, and log-determinant via Sherman-Morrison.
struct CompoundSymmetry {
  int n = 0;
  double rank1 = 0.0;  // r2 >= 0
  double diag = 0.0;   // v > 0

  CompoundSymmetry(int n2, double r2, double v);

  double logdet() const;
  Eigen::VectorXd solve(const Eigen::VectorXd& x) const;
  double quad(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;  // x' M^-1 y
  double one_quad(const Eigen::VectorXd& x) const;                        // 1' M^-1 x
  double one_one() const;                                                 // 1' M^-1 1
  Eigen::MatrixXd dense() const;
};

/// theta_i = (g(X_i beta); a * g(X_i beta)).
Eigen::VectorXd theta_i(const Subject& subject, const ModelState& state, const BasisSpec& basis);

/// Log-density of the subject's stacked response under the marginal
/// (latents integrated out) 2n_i-dimensional skew-t law.
double marginal_loglik_subject(const Subject& subject, const ModelState& state,
                               const BasisSpec& basis);

/// Per-observation residuals Y - theta - 1 b_i, split into the two streams.
struct ResidualStreams {
  Eigen::VectorXd pd;
  Eigen::VectorXd cal;
};
ResidualStreams residuals(const PanelDataset& data, const ModelState& state,
                          const BasisSpec& basis);

}  // namespace stgp
