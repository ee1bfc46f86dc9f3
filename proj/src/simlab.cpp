#include "stgp/simlab.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "stgp/special.hpp"
#include "stgp/stdist.hpp"

namespace stgp {

SimScenario::SimScenario() {
  beta_raw.resize(10);
  beta_raw << 1, 1, 1, 1, 1, 1, 0, 0, 0, 0;
}

double true_index(double u) { return 5.0 * normal_cdf(5.0 * u); }

std::vector<RawCovariates> gen_covariates(int N, Rng& rng) {
  std::vector<RawCovariates> out;
  out.reserve(N);
  for (int i = 0; i < N; ++i) {
    RawCovariates rc;
    rc.n_teeth = 2 + rng.poisson(8.0);
    Eigen::RowVectorXd row(10);
    row[0] = rng.uniform() < 0.5 ? 1.0 : 0.0;
    row[1] = rng.uniform() < 0.13 ? 1.0 : 0.0;
    const int lvl1 = rng.uniform_int(1, 3);
    row[2] = lvl1 == 2 ? 1.0 : 0.0;
    row[3] = lvl1 == 3 ? 1.0 : 0.0;
    row[4] = rng.uniform() < 0.5 ? 1.0 : 0.0;
    row[5] = rng.normal(row[4] > 0.5 ? 1.0 : -1.0, 1.0);
    const int lvl2 = rng.uniform_int(1, 3);
    row[6] = lvl2 == 2 ? 1.0 : 0.0;
    row[7] = lvl2 == 3 ? 1.0 : 0.0;
    row[8] = rng.uniform() < 0.5 ? 1.0 : 0.0;
    row[9] = rng.normal(row[8] > 0.5 ? 1.0 : -1.0, 1.0);
    rc.X = row.replicate(rc.n_teeth, 1);
    out.push_back(std::move(rc));
  }
  return out;
}

void default_groups(PanelDataset& data) {
  data.P = 10;
  data.normal_prior_columns = {0, 1};
  data.group_map = {{2, 3}, {4}, {5}, {6, 7}, {8}, {9}};
}

namespace {

// Subject skeletons with scaled covariates and theta precomputed.
PanelDataset build_frame(const SimScenario& sc, Rng& rng, std::vector<Eigen::VectorXd>* thetas) {
  PanelDataset data;
  default_groups(data);
  const Eigen::VectorXd beta = sc.beta_raw / sc.beta_raw.norm();
  auto covs = gen_covariates(sc.N, rng);
  for (int i = 0; i < sc.N; ++i) {
    Subject s;
    s.id = "subj" + std::to_string(i + 1);
    s.n_teeth = covs[i].n_teeth;
    s.X = covs[i].X;
    s.weight = 1.0;
    s.y_pd = Eigen::VectorXd::Zero(s.n_teeth);
    s.y_cal = Eigen::VectorXd::Zero(s.n_teeth);
    data.subjects.push_back(std::move(s));
  }
  scale_rows(data);
  thetas->clear();
  for (const auto& s : data.subjects) {
    const Eigen::VectorXd idx = s.X * beta;
    Eigen::VectorXd th(2 * s.n_teeth);
    for (int j = 0; j < s.n_teeth; ++j) {
      const double g = true_index(idx[j]);
      th[j] = g;
      th[s.n_teeth + j] = sc.a * g;
    }
    thetas->push_back(std::move(th));
  }
  return data;
}

struct StLatents {
  double u, s, wtilde;  // wtilde: Gaussian intercept innovation, var d2
};

// Fills one subject's responses from the skew-t hierarchy and returns the
// latents used.
StLatents fill_st_responses(Subject& subj, const Eigen::VectorXd& theta, const SimScenario& sc,
                            Rng& rng) {
  StLatents lat;
  const double h = h_of_nu(sc.nu);
  lat.u = rng.gamma(0.5 * sc.nu, 0.5 * sc.nu);
  lat.s = std::abs(rng.normal()) / std::sqrt(lat.u);
  lat.wtilde = rng.normal(0.0, std::sqrt(sc.d2));
  const double b = sc.delta * (h + lat.s) + lat.wtilde / std::sqrt(lat.u);
  const double esd = std::sqrt(sc.sigma2 / lat.u);
  for (int j = 0; j < subj.n_teeth; ++j) {
    subj.y_pd[j] = theta[j] + b + rng.normal(0.0, esd);
    subj.y_cal[j] = theta[subj.n_teeth + j] + b + rng.normal(0.0, esd);
  }
  return lat;
}

// Selection per the logistic rule; builds the weighted sample.
SimSelection apply_selection(PanelDataset population, Eigen::VectorXd z, const SimScenario& sc,
                             Rng& rng) {
  SimSelection out;
  out.z = std::move(z);
  out.population = std::move(population);
  Eigen::VectorXd pi(sc.N);
  for (int i = 0; i < sc.N; ++i) {
    pi[i] = 1.0 / (1.0 + std::exp(-(sc.zeta0 + sc.zeta1 * out.z[i])));
    if (rng.uniform() < pi[i]) out.selected.push_back(i);
  }
  default_groups(out.sample);
  double wsum = 0.0;
  for (int i : out.selected) wsum += 1.0 / pi[i];
  for (int i : out.selected) {
    Subject s = out.population.subjects[i];
    s.weight = (1.0 / pi[i]) * sc.N / wsum;
    out.sample.subjects.push_back(std::move(s));
  }
  return out;
}

}  // namespace

PanelDataset gen_sim1(const SimScenario& sc, Rng& rng) {
  std::vector<Eigen::VectorXd> thetas;
  PanelDataset data = build_frame(sc, rng, &thetas);
  for (int i = 0; i < sc.N; ++i) fill_st_responses(data.subjects[i], thetas[i], sc, rng);
  return data;
}

SimSelection gen_sim2(const SimScenario& sc, Rng& rng) {
  std::vector<Eigen::VectorXd> thetas;
  PanelDataset pop = build_frame(sc, rng, &thetas);
  Eigen::VectorXd ybar(sc.N), noise(sc.N);
  for (int i = 0; i < sc.N; ++i) {
    const StLatents lat = fill_st_responses(pop.subjects[i], thetas[i], sc, rng);
    const Subject& s = pop.subjects[i];
    ybar[i] = (s.y_pd.sum() + s.y_cal.sum()) / (2.0 * s.n_teeth);
    noise[i] = rng.normal(0.0, std::sqrt(sc.sigma2_z)) / std::sqrt(lat.u);
  }
  // The stated joint scale matrix is not positive definite at these (rho,
  // sigma2_z), so Z couples to the subject's realized outcome level instead,
  // with regression coefficient sqrt(rho) on the centered mean response; this
  // makes selection genuinely outcome-dependent.
  const double m = ybar.mean();
  Eigen::VectorXd z = (sc.mu_z + std::sqrt(sc.rho) * (ybar.array() - m) + noise.array()).matrix();
  return apply_selection(std::move(pop), std::move(z), sc, rng);
}

SimSelection gen_sim3(const SimScenario& sc, Rng& rng) {
  SimScenario sc3 = sc;
  sc3.sigma2 = sc.sigma2_z;  // paper sets both residual scales to 0.6
  std::vector<Eigen::VectorXd> thetas;
  PanelDataset pop = build_frame(sc3, rng, &thetas);
  Eigen::VectorXd ybar(sc3.N), noise(sc3.N);
  for (int i = 0; i < sc3.N; ++i) {
    Subject& s = pop.subjects[i];
    const double b = rng.gamma(1.0, 1.0);
    const double w = rng.exponential(1.0);  // Laplace = Gaussian scale mixture
    const double esd = std::sqrt(w * sc3.sigma2);
    for (int j = 0; j < s.n_teeth; ++j) {
      s.y_pd[j] = thetas[i][j] + b + rng.normal(0.0, esd);
      s.y_cal[j] = thetas[i][s.n_teeth + j] + b + rng.normal(0.0, esd);
    }
    ybar[i] = (s.y_pd.sum() + s.y_cal.sum()) / (2.0 * s.n_teeth);
    noise[i] = rng.normal(0.0, std::sqrt(w * sc3.sigma2_z));
  }
  // Same outcome-level coupling as sim-2 (the stated joint is likewise not PD).
  const double m = ybar.mean();
  Eigen::VectorXd z =
      (sc3.mu_z + std::sqrt(sc3.rho) * (ybar.array() - m) + noise.array()).matrix();
  return apply_selection(std::move(pop), std::move(z), sc3, rng);
}

}  // namespace stgp
