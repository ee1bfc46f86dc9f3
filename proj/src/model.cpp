#include "stgp/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "stgp/special.hpp"
#include "stgp/stdist.hpp"

namespace stgp {

void Subject::validate() const {
  if (n_teeth < 1) throw std::invalid_argument("Subject " + id + ": n_teeth must be >= 1");
  if (y_pd.size() != n_teeth || y_cal.size() != n_teeth || X.rows() != n_teeth)
    throw std::invalid_argument("Subject " + id + ": inconsistent lengths");
  if (!(weight > 0.0)) throw std::invalid_argument("Subject " + id + ": weight must be > 0");
  for (int j = 0; j < n_teeth; ++j)
    if (X.row(j).norm() > 1.0 + 1e-9)
      throw std::invalid_argument("Subject " + id + ": X row L2 norm exceeds 1 (scale first)");
}

Eigen::VectorXd Subject::stacked_y() const {
  Eigen::VectorXd y(2 * n_teeth);
  y << y_pd, y_cal;
  return y;
}

void PanelDataset::validate() const {
  if (N() < 2) throw std::invalid_argument("PanelDataset: need at least 2 subjects");
  std::vector<int> seen(P, 0);
  for (int c : normal_prior_columns) {
    if (c < 0 || c >= P) throw std::invalid_argument("PanelDataset: column index out of range");
    ++seen[c];
  }
  for (const auto& g : group_map)
    for (int c : g) {
      if (c < 0 || c >= P) throw std::invalid_argument("PanelDataset: column index out of range");
      ++seen[c];
    }
  for (int c = 0; c < P; ++c)
    if (seen[c] != 1)
      throw std::invalid_argument(
          "PanelDataset: group map and normal-prior columns must partition 1..P");
  for (const auto& s : subjects) {
    s.validate();
    if (s.X.cols() != P) throw std::invalid_argument("PanelDataset: covariate width mismatch");
  }
}

double scale_rows(PanelDataset& data) {
  double max_norm = 0.0;
  for (const auto& s : data.subjects)
    for (int j = 0; j < s.n_teeth; ++j) max_norm = std::max(max_norm, s.X.row(j).norm());
  if (max_norm == 0.0) return 1.0;
  const double div = (1.0 + 1e-9) * max_norm;
  for (auto& s : data.subjects) s.X /= div;
  return div;
}

Eigen::VectorXd ModelState::beta() const {
  const double nrm = beta_raw.norm();
  if (nrm == 0.0) throw std::runtime_error("ModelState: beta_raw has zero norm");
  return beta_raw / nrm;
}

CompoundSymmetry::CompoundSymmetry(int n2, double r2, double v) : n(n2), rank1(r2), diag(v) {
  if (n < 1) throw std::invalid_argument("CompoundSymmetry: dimension must be >= 1");
  if (r2 < 0.0 || !(v > 0.0))
    throw std::invalid_argument("CompoundSymmetry: need rank1 >= 0 and diag > 0");
}

double CompoundSymmetry::logdet() const {
  return n * std::log(diag) + std::log1p(n * rank1 / diag);
}

Eigen::VectorXd CompoundSymmetry::solve(const Eigen::VectorXd& x) const {
  const double c = rank1 / (diag * (diag + n * rank1));
  return x / diag - Eigen::VectorXd::Constant(n, c * x.sum());
}

double CompoundSymmetry::quad(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
  const double c = rank1 / (diag * (diag + n * rank1));
  return x.dot(y) / diag - c * x.sum() * y.sum();
}

double CompoundSymmetry::one_quad(const Eigen::VectorXd& x) const {
  return x.sum() / (diag + n * rank1);
}

double CompoundSymmetry::one_one() const { return n / (diag + n * rank1); }

Eigen::MatrixXd CompoundSymmetry::dense() const {
  return Eigen::MatrixXd::Constant(n, n, rank1) + diag * Eigen::MatrixXd::Identity(n, n);
}

Eigen::VectorXd theta_i(const Subject& subject, const ModelState& state, const BasisSpec& basis) {
  const Eigen::VectorXd idx = subject.X * state.beta();
  Eigen::VectorXd theta(2 * subject.n_teeth);
  for (int j = 0; j < subject.n_teeth; ++j) {
    double x = idx[j];
    if (x < -1.0 || x > 1.0) {
      if (std::abs(x) > 1.0 + 1e-9)
        throw std::domain_error("theta_i: index value outside [-1, 1]");
      x = std::clamp(x, -1.0, 1.0);
    }
    const double g = evaluate_index(x, state.xi, basis);
    theta[j] = g;
    theta[subject.n_teeth + j] = state.a * g;
  }
  return theta;
}

double marginal_loglik_subject(const Subject& subject, const ModelState& state,
                               const BasisSpec& basis) {
  const int p = 2 * subject.n_teeth;
  const double nu = state.nu;
  const bool sn = std::isinf(nu);
  const double h = h_of_nu(nu);
  const Eigen::VectorXd r =
      subject.stacked_y() - theta_i(subject, state, basis) -
      Eigen::VectorXd::Constant(p, h * state.delta);
  const CompoundSymmetry sig(p, state.d2 + state.delta * state.delta, state.sigma2);
  const double dq = sig.quad(r, r);
  const double w = state.delta * sig.one_quad(r);
  const double lambda = 1.0 - state.delta * state.delta * sig.one_one();
  if (!(lambda > 0.0)) throw std::runtime_error("marginal_loglik_subject: Lambda <= 0");

  double log_t;       // log density of the symmetric part
  double skew_logcdf;  // log of the skewing cdf factor
  if (sn) {
    log_t = -0.5 * (p * std::log(2.0 * M_PI) + sig.logdet() + dq);
    skew_logcdf = std::log(normal_cdf(w / std::sqrt(lambda)));
  } else {
    log_t = std::lgamma(0.5 * (nu + p)) - std::lgamma(0.5 * nu) - 0.5 * p * std::log(nu * M_PI) -
            0.5 * sig.logdet() - 0.5 * (nu + p) * std::log1p(dq / nu);
    const double t_arg = w * std::sqrt((nu + p) / (nu + dq)) / std::sqrt(lambda);
    skew_logcdf = std::log(student_t_cdf(t_arg, nu + p));
  }
  const double ll = std::log(2.0) + log_t + skew_logcdf;
  if (!std::isfinite(ll)) throw std::runtime_error("marginal_loglik_subject: nonfinite value");
  return ll;
}

ResidualStreams residuals(const PanelDataset& data, const ModelState& state,
                          const BasisSpec& basis) {
  int total = 0;
  for (const auto& s : data.subjects) total += s.n_teeth;
  ResidualStreams out;
  out.pd.resize(total);
  out.cal.resize(total);
  int pos = 0;
  for (int i = 0; i < data.N(); ++i) {
    const Subject& s = data.subjects[i];
    const Eigen::VectorXd th = theta_i(s, state, basis);
    for (int j = 0; j < s.n_teeth; ++j) {
      out.pd[pos + j] = s.y_pd[j] - th[j] - state.b[i];
      out.cal[pos + j] = s.y_cal[j] - th[s.n_teeth + j] - state.b[i];
    }
    pos += s.n_teeth;
  }
  return out;
}

}  // namespace stgp
