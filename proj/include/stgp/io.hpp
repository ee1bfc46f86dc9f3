#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "stgp/model.hpp"
#include "stgp/sampler.hpp"

namespace stgp {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kDefaultPrsReplicates = 50;

/// Flat key=value config file; '#' starts a comment.
struct Config {
  std::map<std::string, std::string> kv;

  bool has(const std::string& key) const { return kv.count(key) > 0; }
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_num(const std::string& key, double fallback) const;
};

Config load_config(const std::string& path);

/// FNV-1a hash over the sorted canonical key=value lines.
std::uint64_t config_hash(const Config& cfg);

/// Builds a FitConfig plus the column structure from a config file.
/// Column lists are 1-based in the file ("normal_prior_columns = 1,2";
/// "groups = 3,4; 5; 6").
FitConfig fit_config_from(const Config& cfg);
void apply_column_structure(const Config& cfg, PanelDataset& data);

/// Audit header written as the first line of every output file.
std::string audit_line(std::uint64_t seed, std::uint64_t cfg_hash);

/// Long-form dataset CSV: subject_id,tooth_id,pd,cal,weight,x1..xP.
PanelDataset load_dataset(const std::string& path, bool scale = true);
void save_dataset(const std::string& path, const PanelDataset& data, const std::string& audit);

/// Draws CSV: replicate,a,delta,sigma2,d2,nu,rho1_sq,rho2,tau,
/// beta1..betaP,lambda1..lambdaG,xi0..xiL.
void save_draws(const std::string& path, const PosteriorDraws& draws, const std::string& audit);
PosteriorDraws load_draws(const std::string& path);

void save_loglik(const std::string& path, const Eigen::MatrixXd& loglik,
                 const std::string& audit);

/// Truth sidecar for simulated data: generating parameters and the true
/// index function on a 1000-point grid.
void save_truth(const std::string& path, const std::map<std::string, double>& params,
                const std::string& audit);

}  // namespace stgp
