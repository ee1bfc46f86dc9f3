#pragma once

#include <Eigen/Dense>
#include <vector>

#include "stgp/model.hpp"
#include "stgp/rng.hpp"

namespace stgp {

enum class Scenario { Sim1, Sim2, Sim3 };

struct SimScenario {
  Scenario which = Scenario::Sim1;
  int N = 100;
  // generating parameters
  double a = 1.5;
  double delta = 0.6;
  double d2 = 0.1;
  double sigma2 = 0.5;
  double nu = 5.89;
  Eigen::VectorXd beta_raw;  // defaults to (1,1,1,1,1,1,0,0,0,0)
  // selection-scenario extras
  double mu_z = 0.0;
  double sigma2_z = 0.6;
  double rho = 36.0;
  double zeta0 = -1.8;
  double zeta1 = 0.1;

  SimScenario();
};

/// True index function g(u) = 5 Phi(5u).
double true_index(double u);

/// Per-subject tooth count and raw (unscaled) 10-column design, with
/// subject-level covariates replicated across the subject's teeth.
struct RawCovariates {
  int n_teeth;
  Eigen::MatrixXd X;
};
std::vector<RawCovariates> gen_covariates(int N, Rng& rng);

/// The canonical horseshoe grouping for the 10-column design: columns
/// 1-2 get plain normal priors; {3,4}, {5}, {6}, {7,8}, {9}, {10} are
/// the grouped-shrinkage blocks (0-based in the returned structure).
void default_groups(PanelDataset& data);

PanelDataset gen_sim1(const SimScenario& sc, Rng& rng);

/// Population with the selection variable Z, the selection outcome, and
/// the selected (weighted) sample.
struct SimSelection {
  PanelDataset population;
  Eigen::VectorXd z;
  std::vector<int> selected;
  PanelDataset sample;
};
SimSelection gen_sim2(const SimScenario& sc, Rng& rng);
SimSelection gen_sim3(const SimScenario& sc, Rng& rng);

}  // namespace stgp
