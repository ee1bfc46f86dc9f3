#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "stgp/simlab.hpp"
#include "stgp/survey.hpp"
#include "testutil.hpp"

using namespace stgp;

TEST_CASE("wfpbb validation and degenerate case") {
  WeightedSample ws;
  ws.items = {"a", "b", "c"};
  ws.weights = Eigen::Vector3d(1.0, 1.0, 1.0);
  ws.population_size = 3;
  Rng rng(1);
  const auto idx = wfpbb_indices(ws, rng);
  CHECK(idx == std::vector<int>({0, 1, 2}));  // N == n: original sample

  WeightedSample bad = ws;
  bad.weights[0] = 0.5;
  bad.population_size = 4;
  CHECK_THROWS(wfpbb_indices(bad, rng));

  WeightedSample mismatch = ws;
  mismatch.population_size = 10;  // weights no longer sum to N
  CHECK_THROWS(wfpbb_indices(mismatch, rng));
  mismatch.rescale_weights();
  CHECK(mismatch.weights.sum() == doctest::Approx(10.0));
  const auto ids = wfpbb(mismatch, rng);
  CHECK(ids.size() == 3);
  for (const auto& id : ids) CHECK((id == "a" || id == "b" || id == "c"));
}

TEST_CASE("wfpbb pseudo-population frequencies track the weights") {
  WeightedSample ws;
  const int n = 5;
  ws.weights.resize(n);
  ws.weights << 1.0, 2.0, 3.0, 4.0, 5.0;
  ws.population_size = 15;
  for (int i = 0; i < n; ++i) ws.items.push_back(std::to_string(i));

  Rng rng(7);
  const int reps = 10000;
  Eigen::VectorXd freq = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd freq2 = Eigen::VectorXd::Zero(n);
  for (int r = 0; r < reps; ++r) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
    for (int i : wfpbb_indices(ws, rng)) c[i] += 1.0;
    freq += c;
    freq2 += c.cwiseProduct(c);
  }
  for (int i = 0; i < n; ++i) {
    const double mean = freq[i] / reps;
    const double var = freq2[i] / reps - mean * mean;
    const double se = std::sqrt(var / reps);
    // expected count in the size-n resample: n * w_i / N = w_i / 3
    CHECK(std::abs(mean - ws.weights[i] / 3.0) < 4.0 * se + 1e-9);
  }
}

TEST_CASE("mcmc_prs pooling, determinism, degenerate J=1") {
  SimScenario sc;
  sc.N = 8;
  Rng gen(11);
  PanelDataset data = gen_sim1(sc, gen);

  FitConfig cfg;
  cfg.iterations = 30;
  cfg.burn_in = 10;
  cfg.thin = 5;
  cfg.L = 4;
  cfg.seed = 42;

  // uniform weights, N_pop = n: replicate 0 is a plain chain on the data
  PosteriorDraws prs = mcmc_prs(data, cfg, 1);
  Rng plain = Rng::derive(cfg.seed, 1);
  PosteriorDraws direct = run_chain(data, cfg, plain);
  REQUIRE(prs.num_draws() == direct.num_draws());
  for (int k = 0; k < prs.num_draws(); ++k) {
    CHECK(prs.states[k].a == direct.states[k].a);
    CHECK(prs.states[k].xi.isApprox(direct.states[k].xi));
  }

  // pooled draw count and thread-order independence
  for (auto& s : data.subjects) s.weight = 2.0;  // implies N_pop = 2n
  PosteriorDraws p1 = mcmc_prs(data, cfg, 3, 1);
  PosteriorDraws p3 = mcmc_prs(data, cfg, 3, 3);
  CHECK(p1.num_draws() == 3 * ((cfg.iterations - cfg.burn_in) / cfg.thin));
  REQUIRE(p1.num_draws() == p3.num_draws());
  for (int k = 0; k < p1.num_draws(); ++k) {
    CHECK(p1.replicate[k] == p3.replicate[k]);
    CHECK(p1.states[k].a == p3.states[k].a);
    CHECK(p1.states[k].delta == p3.states[k].delta);
  }
}
