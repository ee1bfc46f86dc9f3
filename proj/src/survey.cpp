#include "stgp/survey.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>

namespace stgp {

void WeightedSample::rescale_weights() {
  const double total = weights.sum();
  if (!(total > 0.0)) throw std::invalid_argument("WeightedSample: nonpositive weight total");
  weights *= static_cast<double>(population_size) / total;
  // The Polya urn needs every unit to represent at least itself (w >= 1).
  // Clamp sub-unit weights to 1 and rescale the remainder until stable.
  for (int pass = 0; pass < 64 && weights.minCoeff() < 1.0; ++pass) {
    double clamped = 0.0, free = 0.0;
    for (int i = 0; i < weights.size(); ++i) {
      if (weights[i] <= 1.0) {
        weights[i] = 1.0;
        clamped += 1.0;
      } else {
        free += weights[i];
      }
    }
    const double target = static_cast<double>(population_size) - clamped;
    if (!(free > 0.0) || target < 0.0) break;
    for (int i = 0; i < weights.size(); ++i)
      if (weights[i] > 1.0) weights[i] *= target / free;
  }
}

void WeightedSample::validate() const {
  if (weights.size() != n()) throw std::invalid_argument("WeightedSample: size mismatch");
  if (population_size < n())
    throw std::invalid_argument("WeightedSample: population smaller than sample");
  if (weights.minCoeff() < 1.0)
    throw std::invalid_argument("WeightedSample: weights must be >= 1 (rescale first)");
  const double total = weights.sum();
  if (std::abs(total - population_size) > 1e-6 * population_size)
    throw std::invalid_argument("WeightedSample: weights must sum to the population size");
}

std::vector<int> wfpbb_indices(const WeightedSample& sample, Rng& rng) {
  sample.validate();
  const int n = sample.n();
  const long N = sample.population_size;
  std::vector<int> out(n);
  if (N == n) {
    for (int i = 0; i < n; ++i) out[i] = i;
    return out;
  }
  const double nstar = static_cast<double>(N - n) / n;
  Eigen::VectorXd l = Eigen::VectorXd::Zero(n);
  for (long k = 1; k <= N - n; ++k) {
    const double denom = (N - n) + (k - 1) * nstar;
    double cum = 0.0;
    const double v = rng.uniform() * denom;
    int pick = n - 1;
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      const double p = sample.weights[i] - 1.0 + l[i] * nstar;
      if (p < 0.0) throw std::runtime_error("wfpbb: negative urn probability");
      total += p;
      if (cum <= v && v < cum + p) pick = i;
      cum += p;
    }
    if (std::abs(total - denom) > 1e-10 * denom)
      throw std::runtime_error("wfpbb: urn probabilities do not sum to one");
    l[pick] += 1.0;
  }
  // pseudo population holds unit i with multiplicity 1 + l_i; final uniform
  // subsample of size n, with replacement
  Eigen::VectorXd count = l.array() + 1.0;
  for (int j = 0; j < n; ++j) {
    const double v = rng.uniform() * N;
    double cum = 0.0;
    int pick = n - 1;
    for (int i = 0; i < n; ++i) {
      if (cum <= v && v < cum + count[i]) {
        pick = i;
        break;
      }
      cum += count[i];
    }
    out[j] = pick;
  }
  return out;
}

std::vector<std::string> wfpbb(const WeightedSample& sample, Rng& rng) {
  std::vector<std::string> ids;
  ids.reserve(sample.n());
  for (int i : wfpbb_indices(sample, rng)) ids.push_back(sample.items[i]);
  return ids;
}

PosteriorDraws mcmc_prs(const PanelDataset& data, const FitConfig& cfg, int bootstrap_J,
                        int threads) {
  if (bootstrap_J < 1) throw std::invalid_argument("mcmc_prs: need J >= 1");
  WeightedSample ws;
  ws.weights.resize(data.N());
  for (int i = 0; i < data.N(); ++i) {
    ws.items.push_back(data.subjects[i].id);
    ws.weights[i] = data.subjects[i].weight;
  }
  ws.population_size = std::lround(ws.weights.sum());
  ws.rescale_weights();

  std::vector<PosteriorDraws> parts(bootstrap_J);
  std::vector<std::string> errors(bootstrap_J);
  auto worker = [&](int j) {
    try {
      Rng rng = Rng::derive(cfg.seed, static_cast<std::uint64_t>(j) + 1);
      PanelDataset resampled = data;
      if (ws.population_size != data.N()) {
        resampled.subjects.clear();
        for (int idx : wfpbb_indices(ws, rng)) resampled.subjects.push_back(data.subjects[idx]);
      }
      parts[j] = run_chain(resampled, cfg, rng);
    } catch (const std::exception& e) {
      errors[j] = e.what();
    }
  };
  if (threads <= 1) {
    for (int j = 0; j < bootstrap_J; ++j) worker(j);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        for (int j = t; j < bootstrap_J; j += threads) worker(j);
      });
    for (auto& th : pool) th.join();
  }
  for (int j = 0; j < bootstrap_J; ++j)
    if (!errors[j].empty())
      throw std::runtime_error("mcmc_prs: replicate " + std::to_string(j) +
                               " failed: " + errors[j]);

  PosteriorDraws pooled;
  int rows = 0;
  for (const auto& p : parts) rows += p.num_draws();
  pooled.loglik.resize(rows, data.N());
  int at = 0;
  for (int j = 0; j < bootstrap_J; ++j) {
    for (int k = 0; k < parts[j].num_draws(); ++k) {
      pooled.states.push_back(parts[j].states[k]);
      pooled.replicate.push_back(j);
      pooled.loglik.row(at++) = parts[j].loglik.row(k);
    }
    pooled.ess_target_evals += parts[j].ess_target_evals;
  }
  return pooled;
}

}  // namespace stgp
