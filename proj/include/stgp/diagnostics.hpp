#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "stgp/model.hpp"
#include "stgp/monobasis.hpp"
#include "stgp/sampler.hpp"

namespace stgp {

struct WaicResult {
  double waic;
  double p_waic;
  double lppd;
};

/// WAIC from the pointwise (per-subject) log-likelihood matrix.
WaicResult waic(const Eigen::MatrixXd& loglik);

/// Posterior-mean index function on a uniform grid over [-1, 1]:
/// columns are (u, posterior mean, 2.5% quantile, 97.5% quantile).
Eigen::MatrixXd index_grid(const PosteriorDraws& draws, const BasisSpec& basis, int grid_points);

/// Mean squared error of the posterior-mean index function against the
/// truth on the uniform grid.
double index_mse(const PosteriorDraws& draws, const BasisSpec& basis,
                 const std::function<double(double)>& truth, int grid_points = 1000);

/// Moment-based consistency check: forward moments at the posterior-mean
/// (delta, sigma2 + d2, round(nu)), then delta recovered by the cubic.
struct DeltaCheck {
  bool skipped = false;
  std::string note;
  int nu_rounded = 0;
  double delta_mean = 0.0;
  double delta_recovered = 0.0;
  double abs_error = 0.0;
};
DeltaCheck delta_moment_selfcheck(const PosteriorDraws& draws);

/// Per-stream residual summaries at the posterior-mean state.
struct ResidualSummary {
  std::string stream;  // "pd" or "cal"
  double median, q25, q75;
  double std_q05, std_q95;  // quantiles of residual / sd(residual)
};
std::vector<ResidualSummary> residual_report(const PanelDataset& data,
                                             const PosteriorDraws& draws,
                                             const BasisSpec& basis);

/// Coordinate-wise posterior mean of the draws (beta averaged after
/// normalization).
ModelState posterior_mean_state(const PosteriorDraws& draws);

}  // namespace stgp
