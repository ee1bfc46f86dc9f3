#pragma once

#include <Eigen/Dense>
#include <functional>
#include <utility>
#include <vector>

#include "stgp/model.hpp"
#include "stgp/monobasis.hpp"
#include "stgp/rng.hpp"

namespace stgp {

enum class Variant { StGp, SnGp, NGp };

struct FitConfig {
  int iterations = 20000;
  int burn_in = 10000;
  int thin = 10;
  int L = 25;
  double sigma2_a = 1000.0;
  double sigma2_delta = 1000.0;
  double normal_prior_var = 10.0;
  double ig_a_sigma2 = 5.0;
  double ig_b_sigma2 = 5.0;
  double ig_a_d2 = 5.0;
  double ig_b_d2 = 5.0;
  std::uint64_t seed = 1;
  int ess_max_shrink = 1000;
  Variant variant = Variant::StGp;

  void validate() const;
};

struct PosteriorDraws {
  std::vector<ModelState> states;
  Eigen::MatrixXd loglik;           // draws x subjects
  std::vector<int> replicate;       // resampling replicate label per draw
  long ess_target_evals = 0;

  int num_draws() const { return static_cast<int>(states.size()); }
};

// Closed-form conditionals (Gibbs steps). Each returns the new draw; the
// sweep assigns it into the state.
double update_a(const ModelState& state, const PanelDataset& data, const BasisSpec& basis,
                const FitConfig& cfg, Rng& rng);
Eigen::VectorXd update_xi(const ModelState& state, const PanelDataset& data,
                          const BasisSpec& basis, const KernelParams& kp, Rng& rng);
double update_delta(const ModelState& state, const PanelDataset& data, const BasisSpec& basis,
                    const FitConfig& cfg, Rng& rng);
double update_s_i(const ModelState& state, const Subject& subject, int i, const BasisSpec& basis,
                  Rng& rng);
double update_u_i(const ModelState& state, const Subject& subject, int i, const BasisSpec& basis,
                  Rng& rng);
double update_b_i(const ModelState& state, const Subject& subject, int i, const BasisSpec& basis,
                  Rng& rng);
double update_sigma2(const ModelState& state, const PanelDataset& data, const BasisSpec& basis,
                     const FitConfig& cfg, Rng& rng);
double update_d2(const ModelState& state, const PanelDataset& data, const FitConfig& cfg,
                 Rng& rng);

/// One elliptical slice sampling transition for a parameter block with a
/// centered Gaussian prior (Cholesky factor prior_chol, lower triangular).
/// Invariant distribution: prior x exp(target). Returns the new point and
/// the number of target evaluations.
std::pair<Eigen::VectorXd, int> ess_update(
    const std::function<double(const Eigen::VectorXd&)>& target, const Eigen::VectorXd& current,
    const Eigen::MatrixXd& prior_chol, Rng& rng, int max_shrink = 1000);

Eigen::VectorXd update_beta(const ModelState& state, const PanelDataset& data,
                            const BasisSpec& basis, const FitConfig& cfg, Rng& rng,
                            long* evals = nullptr);
double update_nu(const ModelState& state, const PanelDataset& data, const FitConfig& cfg,
                 Rng& rng, long* evals = nullptr);
std::pair<double, double> update_gp_hyper(const ModelState& state, const BasisSpec& basis,
                                          const FitConfig& cfg, Rng& rng, long* evals = nullptr);
std::pair<Eigen::VectorXd, double> update_horseshoe(const ModelState& state,
                                                    const PanelDataset& data, Rng& rng);

/// Default chain initialization.
ModelState init_state(const PanelDataset& data, const FitConfig& cfg, Rng& rng);

/// One full sweep in the fixed update order; mutates the state.
void gibbs_sweep(ModelState& state, const PanelDataset& data, const BasisSpec& basis,
                 const FitConfig& cfg, Rng& rng, long* ess_evals = nullptr);

/// Full MCMC run with burn-in and thinning; stores the pointwise
/// (per-subject) log-likelihood for every retained draw.
PosteriorDraws run_chain(const PanelDataset& data, const FitConfig& cfg, Rng& rng);

}  // namespace stgp
