#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "stgp/model.hpp"
#include "stgp/rng.hpp"
#include "stgp/sampler.hpp"

namespace stgp {

/// A weighted sample drawn from a finite population of size population_size.
struct WeightedSample {
  std::vector<std::string> items;
  Eigen::VectorXd weights;  // w_i >= 1, sum ~ population_size
  long population_size = 0;

  int n() const { return static_cast<int>(items.size()); }
  /// Scales weights so they sum to population_size.
  void rescale_weights();
  void validate() const;
};

/// Weighted finite-population Bayesian bootstrap: Polya-urn pseudo
/// population, then a uniform size-n subsample (with replacement).
/// Returns indices into the sample; population_size == n is the
/// degenerate case and returns the original sample unchanged.
std::vector<int> wfpbb_indices(const WeightedSample& sample, Rng& rng);
std::vector<std::string> wfpbb(const WeightedSample& sample, Rng& rng);

/// Parallel MCMC over J WFPBB replicates; draws pooled with replicate
/// labels. Replicate j uses the RNG stream derived from (cfg.seed, j+1),
/// so results do not depend on execution order.
PosteriorDraws mcmc_prs(const PanelDataset& data, const FitConfig& cfg, int bootstrap_J,
                        int threads = 1);

}  // namespace stgp
