#include "stgp/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "stgp/stdist.hpp"

namespace stgp {

namespace {
double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double idx = q * (v.size() - 1);
  const size_t lo = static_cast<size_t>(idx);
  const size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (idx - lo) * (v[hi] - v[lo]);
}
}  // namespace

WaicResult waic(const Eigen::MatrixXd& loglik) {
  const int D = static_cast<int>(loglik.rows());
  const int n = static_cast<int>(loglik.cols());
  if (D < 2) throw std::invalid_argument("waic: need at least 2 draws");
  if (!loglik.allFinite()) throw std::invalid_argument("waic: nonfinite log-likelihood entries");
  double lppd = 0.0, p = 0.0;
  for (int j = 0; j < n; ++j) {
    const Eigen::VectorXd col = loglik.col(j);
    const double m = col.maxCoeff();
    lppd += m + std::log((col.array() - m).exp().mean());
    const double mean = col.mean();
    p += (col.array() - mean).square().sum() / (D - 1);
  }
  return {-2.0 * (lppd - p), p, lppd};
}

Eigen::MatrixXd index_grid(const PosteriorDraws& draws, const BasisSpec& basis,
                           int grid_points) {
  if (draws.num_draws() < 1) throw std::invalid_argument("index_grid: no draws");
  const int D = draws.num_draws();
  Eigen::MatrixXd out(grid_points, 4);
  std::vector<double> vals(D);
  for (int g = 0; g < grid_points; ++g) {
    const double u = -1.0 + 2.0 * g / (grid_points - 1);
    double sum = 0.0;
    for (int d = 0; d < D; ++d) {
      vals[d] = evaluate_index(u, draws.states[d].xi, basis);
      sum += vals[d];
    }
    out(g, 0) = u;
    out(g, 1) = sum / D;
    out(g, 2) = quantile(vals, 0.025);
    out(g, 3) = quantile(vals, 0.975);
  }
  return out;
}

double index_mse(const PosteriorDraws& draws, const BasisSpec& basis,
                 const std::function<double(double)>& truth, int grid_points) {
  const Eigen::MatrixXd grid = index_grid(draws, basis, grid_points);
  double mse = 0.0;
  for (int g = 0; g < grid_points; ++g) {
    const double diff = grid(g, 1) - truth(grid(g, 0));
    mse += diff * diff;
  }
  return mse / grid_points;
}

ModelState posterior_mean_state(const PosteriorDraws& draws) {
  if (draws.num_draws() < 1) throw std::invalid_argument("posterior_mean_state: no draws");
  ModelState m = draws.states[0];
  m.beta_raw = draws.states[0].beta();
  const int D = draws.num_draws();
  for (int d = 1; d < D; ++d) {
    const ModelState& s = draws.states[d];
    m.a += s.a;
    m.beta_raw += s.beta();
    m.xi += s.xi;
    m.delta += s.delta;
    m.sigma2 += s.sigma2;
    m.d2 += s.d2;
    m.nu += s.nu;
    m.rho1_sq += s.rho1_sq;
    m.rho2 += s.rho2;
    m.lambda += s.lambda;
    m.tau += s.tau;
    m.b += s.b;
    m.s += s.s;
    m.u += s.u;
  }
  m.a /= D;
  m.beta_raw /= D;
  m.xi /= D;
  m.delta /= D;
  m.sigma2 /= D;
  m.d2 /= D;
  m.nu /= D;
  m.rho1_sq /= D;
  m.rho2 /= D;
  m.lambda /= D;
  m.tau /= D;
  m.b /= D;
  m.s /= D;
  m.u /= D;
  return m;
}

DeltaCheck delta_moment_selfcheck(const PosteriorDraws& draws) {
  DeltaCheck out;
  const ModelState m = posterior_mean_state(draws);
  out.delta_mean = m.delta;
  out.nu_rounded = static_cast<int>(std::lround(m.nu));
  if (out.nu_rounded < 4 || out.nu_rounded > 100) {
    out.skipped = true;
    out.note = "nu outside [4,100] after rounding; check skipped";
    return out;
  }
  const auto [m2, m3] = st_moments_23(m.delta, m.sigma2 + m.d2, out.nu_rounded);
  out.delta_recovered = recover_delta_cardano(m2, m3, out.nu_rounded);
  out.abs_error = std::abs(out.delta_recovered - out.delta_mean);
  return out;
}

std::vector<ResidualSummary> residual_report(const PanelDataset& data,
                                             const PosteriorDraws& draws,
                                             const BasisSpec& basis) {
  ModelState m = posterior_mean_state(draws);
  // Draws reloaded from disk carry no subject latents; fall back to b = 0.
  if (m.b.size() != data.N()) m.b = Eigen::VectorXd::Zero(data.N());
  const ResidualStreams r = residuals(data, m, basis);
  std::vector<ResidualSummary> out;
  for (const auto& [name, vec] : {std::pair<std::string, const Eigen::VectorXd*>{"pd", &r.pd},
                                  {"cal", &r.cal}}) {
    std::vector<double> v(vec->data(), vec->data() + vec->size());
    ResidualSummary s;
    s.stream = name;
    s.median = quantile(v, 0.5);
    s.q25 = quantile(v, 0.25);
    s.q75 = quantile(v, 0.75);
    const double mu = vec->mean();
    const double sd = std::sqrt((vec->array() - mu).square().sum() / (vec->size() - 1));
    std::vector<double> z(v.size());
    for (size_t i = 0; i < v.size(); ++i) z[i] = v[i] / (sd > 0.0 ? sd : 1.0);
    s.std_q05 = quantile(z, 0.05);
    s.std_q95 = quantile(z, 0.95);
    out.push_back(s);
  }
  return out;
}

}  // namespace stgp
