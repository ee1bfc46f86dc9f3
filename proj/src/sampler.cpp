#include "stgp/sampler.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "stgp/special.hpp"
#include "stgp/stdist.hpp"

namespace stgp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd g_values(const Subject& subject, const ModelState& state,
                         const BasisSpec& basis) {
  const Eigen::VectorXd idx = subject.X * state.beta();
  Eigen::VectorXd g(subject.n_teeth);
  for (int j = 0; j < subject.n_teeth; ++j)
    g[j] = evaluate_index(std::clamp(idx[j], -1.0, 1.0), state.xi, basis);
  return g;
}

void check_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw std::runtime_error(std::string(what) + ": nonfinite draw");
}

// Truncated gamma draw on (lo, hi] by cdf inversion; returns fallback when
// the interval carries no numerically resolvable mass.
double truncated_gamma(double shape, double rate, double lo, double hi, double fallback,
                       Rng& rng) {
  const double plo = lo > 0.0 ? reg_lower_gamma(shape, rate * lo) : 0.0;
  const double phi = reg_lower_gamma(shape, rate * hi);
  if (!(phi - plo > 1e-14)) return fallback;
  const double v = rng.uniform(plo, phi);
  return inv_reg_lower_gamma(shape, v) / rate;
}
}  // namespace

void FitConfig::validate() const {
  if (burn_in >= iterations) throw std::invalid_argument("FitConfig: burn_in < iterations");
  if (thin < 1) throw std::invalid_argument("FitConfig: thin >= 1");
  if (L < 2) throw std::invalid_argument("FitConfig: L >= 2");
}

double update_a(const ModelState& state, const PanelDataset& data, const BasisSpec& basis,
                const FitConfig& cfg, Rng& rng) {
  double prec = 1.0 / cfg.sigma2_a;
  double rhs = 0.0;
  for (int i = 0; i < data.N(); ++i) {
    const Subject& s = data.subjects[i];
    const Eigen::VectorXd g = g_values(s, state, basis);
    const Eigen::VectorXd ystar = s.y_cal.array() - state.b[i];
    const double w = state.u[i] / state.sigma2;
    prec += w * g.squaredNorm();
    rhs += w * g.dot(ystar);
  }
  const double draw = rng.normal(rhs / prec, std::sqrt(1.0 / prec));
  check_finite(draw, "update_a");
  return draw;
}

Eigen::VectorXd update_xi(const ModelState& state, const PanelDataset& data,
                          const BasisSpec& basis, const KernelParams& kp, Rng& rng) {
  if (std::abs(state.a) < 1e-8)
    throw std::runtime_error("update_xi: slope a is numerically zero");
  const int m = basis.num_basis();
  const Eigen::MatrixXd K = kernel_matrix(basis, kp);
  Eigen::LLT<Eigen::MatrixXd> kllt(K);
  Eigen::MatrixXd prec = kllt.solve(Eigen::MatrixXd::Identity(m, m));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  const double h = h_of_nu(state.nu);
  for (int i = 0; i < data.N(); ++i) {
    const Subject& s = data.subjects[i];
    const int n2 = 2 * s.n_teeth;
    const Eigen::MatrixXd phi = design_matrix(
        (s.X * state.beta()).cwiseMax(-1.0).cwiseMin(1.0), basis);
    Eigen::MatrixXd C(n2, m);
    C << phi, state.a * phi;
    // u_i C' Psi^-1 C and u_i C' Psi^-1 y* via the compound-symmetry inverse
    const double c = state.d2 / (state.sigma2 * (state.sigma2 + n2 * state.d2));
    const Eigen::VectorXd colsum = C.colwise().sum().transpose();
    const Eigen::VectorXd ystar =
        s.stacked_y() - Eigen::VectorXd::Constant(n2, state.delta * (h + state.s[i]));
    prec += state.u[i] * (C.transpose() * C / state.sigma2 - c * colsum * colsum.transpose());
    rhs += state.u[i] * (C.transpose() * ystar / state.sigma2 - c * ystar.sum() * colsum);
  }
  Eigen::LLT<Eigen::MatrixXd> pllt(0.5 * (prec + prec.transpose()));
  if (pllt.info() != Eigen::Success)
    throw std::runtime_error("update_xi: posterior precision not positive definite");
  const Eigen::MatrixXd cov = pllt.solve(Eigen::MatrixXd::Identity(m, m));
  const Eigen::VectorXd mean = pllt.solve(rhs);
  return sample_truncated_mvn_positive(mean, 0.5 * (cov + cov.transpose()), rng, state.xi);
}

double update_delta(const ModelState& state, const PanelDataset& data, const BasisSpec& basis,
                    const FitConfig& cfg, Rng& rng) {
  const double h = h_of_nu(state.nu);
  double prec = 1.0 / cfg.sigma2_delta;
  double rhs = 0.0;
  for (int i = 0; i < data.N(); ++i) {
    const Subject& s = data.subjects[i];
    const CompoundSymmetry psi(2 * s.n_teeth, state.d2, state.sigma2);
    const Eigen::VectorXd ystar = s.stacked_y() - theta_i(s, state, basis);
    const double coef = h + state.s[i];
    prec += coef * coef * state.u[i] * psi.one_one();
    rhs += coef * state.u[i] * psi.one_quad(ystar);
  }
  const double draw = rng.normal(rhs / prec, std::sqrt(1.0 / prec));
  check_finite(draw, "update_delta");
  return draw;
}

double update_s_i(const ModelState& state, const Subject& subject, int i, const BasisSpec& basis,
                  Rng& rng) {
  const int n2 = 2 * subject.n_teeth;
  const double h = h_of_nu(state.nu);
  const CompoundSymmetry psi(n2, state.d2, state.sigma2);
  const Eigen::VectorXd ystar = subject.stacked_y() - theta_i(subject, state, basis) -
                                Eigen::VectorXd::Constant(n2, h * state.delta);
  const double prec = state.u[i] * (1.0 + state.delta * state.delta * psi.one_one());
  const double mean = state.delta * state.u[i] * psi.one_quad(ystar) / prec;
  return rng.truncated_normal_lower(mean, std::sqrt(1.0 / prec), 0.0);
}

double update_u_i(const ModelState& state, const Subject& subject, int i, const BasisSpec& basis,
                  Rng& rng) {
  const int n2 = 2 * subject.n_teeth;
  const double h = h_of_nu(state.nu);
  const CompoundSymmetry psi(n2, state.d2, state.sigma2);
  const Eigen::VectorXd ystar = subject.stacked_y() - theta_i(subject, state, basis) -
                                Eigen::VectorXd::Constant(n2, state.delta * (h + state.s[i]));
  const double shape = 0.5 * (n2 + state.nu + 1.0);
  const double rate = 0.5 * (psi.quad(ystar, ystar) + state.s[i] * state.s[i] + state.nu);
  if (!(rate > 0.0)) throw std::runtime_error("update_u_i: nonpositive rate");
  return rng.gamma(shape, rate);
}

double update_b_i(const ModelState& state, const Subject& subject, int i, const BasisSpec& basis,
                  Rng& rng) {
  const int n2 = 2 * subject.n_teeth;
  const double h = h_of_nu(state.nu);
  const Eigen::VectorXd ystar = subject.stacked_y() - theta_i(subject, state, basis);
  const double prec0 = n2 / state.sigma2 + 1.0 / state.d2;
  const double mean =
      (ystar.sum() / state.sigma2 + state.delta * (h + state.s[i]) / state.d2) / prec0;
  const double var = 1.0 / (state.u[i] * prec0);
  return rng.normal(mean, std::sqrt(var));
}

double update_sigma2(const ModelState& state, const PanelDataset& data, const BasisSpec& basis,
                     const FitConfig& cfg, Rng& rng) {
  double shape = cfg.ig_a_sigma2;
  double scale = cfg.ig_b_sigma2;
  for (int i = 0; i < data.N(); ++i) {
    const Subject& s = data.subjects[i];
    shape += s.n_teeth;
    const Eigen::VectorXd ystar = s.stacked_y() - theta_i(s, state, basis) -
                                  Eigen::VectorXd::Constant(2 * s.n_teeth, state.b[i]);
    scale += 0.5 * state.u[i] * ystar.squaredNorm();
  }
  return rng.inverse_gamma(shape, scale);
}

double update_d2(const ModelState& state, const PanelDataset& data, const FitConfig& cfg,
                 Rng& rng) {
  const double h = h_of_nu(state.nu);
  double shape = cfg.ig_a_d2 + 0.5 * data.N();
  double scale = cfg.ig_b_d2;
  for (int i = 0; i < data.N(); ++i) {
    const double r = state.b[i] - state.delta * (h + state.s[i]);
    scale += 0.5 * state.u[i] * r * r;
  }
  return rng.inverse_gamma(shape, scale);
}

std::pair<Eigen::VectorXd, int> ess_update(
    const std::function<double(const Eigen::VectorXd&)>& target, const Eigen::VectorXd& current,
    const Eigen::MatrixXd& prior_chol, Rng& rng, int max_shrink) {
  const int d = static_cast<int>(current.size());
  const double t0 = target(current);
  int evals = 1;
  if (!std::isfinite(t0)) throw std::runtime_error("ess_update: nonfinite target at current");
  Eigen::VectorXd z(d);
  for (int i = 0; i < d; ++i) z[i] = rng.normal();
  const Eigen::VectorXd aux = prior_chol.triangularView<Eigen::Lower>() * z;
  const double logy = t0 + std::log(rng.uniform());
  double theta = rng.uniform(0.0, 2.0 * M_PI);
  double lo = theta - 2.0 * M_PI, hi = theta;
  for (int it = 0; it < max_shrink; ++it) {
    const Eigen::VectorXd prop = current * std::cos(theta) + aux * std::sin(theta);
    ++evals;
    if (target(prop) > logy) return {prop, evals};
    if (theta < 0.0)
      lo = theta;
    else
      hi = theta;
    theta = rng.uniform(lo, hi);
  }
  throw std::runtime_error("ess_update: shrinkage loop failed to accept");
}

Eigen::VectorXd update_beta(const ModelState& state, const PanelDataset& data,
                            const BasisSpec& basis, const FitConfig& cfg, Rng& rng, long* evals) {
  Eigen::VectorXd sd = Eigen::VectorXd::Zero(data.P);
  for (int c : data.normal_prior_columns) sd[c] = std::sqrt(cfg.normal_prior_var);
  for (size_t j = 0; j < data.group_map.size(); ++j)
    for (int c : data.group_map[j]) sd[c] = state.lambda[j] * state.tau;
  auto target = [&](const Eigen::VectorXd& bt) -> double {
    if (bt.norm() < 1e-12) return -kInf;
    ModelState tmp = state;
    tmp.beta_raw = bt;
    double ll = 0.0;
    for (const auto& s : data.subjects) ll += marginal_loglik_subject(s, tmp, basis);
    return ll;
  };
  auto [draw, n] = ess_update(target, state.beta_raw, sd.asDiagonal(), rng, cfg.ess_max_shrink);
  if (evals) *evals += n;
  return draw;
}

double update_nu(const ModelState& state, const PanelDataset& data, const FitConfig& cfg,
                 Rng& rng, long* evals) {
  auto target = [&](const Eigen::VectorXd& eta) -> double {
    const double nu = 2.0 + std::exp(eta[0]);
    if (!std::isfinite(nu)) return -kInf;
    const double h = h_of_nu(nu);
    double ll = 0.0;
    for (int i = 0; i < data.N(); ++i) {
      ll += gamma_logpdf(state.u[i], 0.5 * nu, 0.5 * nu);
      ll += normal_logpdf(state.b[i], state.delta * (h + state.s[i]), state.d2 / state.u[i]);
    }
    return ll;
  };
  Eigen::VectorXd cur(1);
  cur[0] = std::log(state.nu - 2.0);
  auto [draw, n] =
      ess_update(target, cur, Eigen::MatrixXd::Identity(1, 1), rng, cfg.ess_max_shrink);
  if (evals) *evals += n;
  return 2.0 + std::exp(draw[0]);
}

std::pair<double, double> update_gp_hyper(const ModelState& state, const BasisSpec& basis,
                                          const FitConfig& cfg, Rng& rng, long* evals) {
  const int m = basis.num_basis();
  auto target = [&](const Eigen::VectorXd& eta) -> double {
    KernelParams kp{std::exp(eta[0]), std::exp(eta[1])};
    if (!std::isfinite(kp.rho1_sq) || !std::isfinite(kp.rho2) || kp.rho1_sq <= 0.0 ||
        kp.rho2 <= 0.0)
      return -kInf;
    Eigen::MatrixXd K;
    try {
      K = kernel_matrix(basis, kp);
    } catch (const std::exception&) {
      return -kInf;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(K);
    if (llt.info() != Eigen::Success) return -kInf;
    double logdet = 0.0;
    for (int i = 0; i < m; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
    const double q = llt.matrixL().solve(state.xi).squaredNorm();
    return -0.5 * (m * std::log(2.0 * M_PI) + logdet + q);
  };
  Eigen::VectorXd cur(2);
  cur << std::log(state.rho1_sq), std::log(state.rho2);
  auto [draw, n] =
      ess_update(target, cur, Eigen::MatrixXd::Identity(2, 2), rng, cfg.ess_max_shrink);
  if (evals) *evals += n;
  return {std::exp(draw[0]), std::exp(draw[1])};
}

std::pair<Eigen::VectorXd, double> update_horseshoe(const ModelState& state,
                                                    const PanelDataset& data, Rng& rng) {
  const int G = static_cast<int>(data.group_map.size());
  Eigen::VectorXd lambda(G);
  const double tau2 = state.tau * state.tau;
  for (int j = 0; j < G; ++j) {
    const int mj = static_cast<int>(data.group_map[j].size());
    double bj = 0.0;
    for (int c : data.group_map[j]) bj += state.beta_raw[c] * state.beta_raw[c];
    // eta = 1/lambda^2; conditional ~ eta^{(m-1)/2} exp(-B eta / (2 tau^2)) / (1 + eta)
    double eta = 1.0 / (state.lambda[j] * state.lambda[j]);
    const double uslice = rng.uniform(0.0, 1.0 / (1.0 + eta));
    const double ub = (1.0 - uslice) / uslice;
    const double shape = 0.5 * (mj + 1.0);
    const double rate = bj / (2.0 * tau2);
    if (rate > 0.0) {
      eta = truncated_gamma(shape, rate, 0.0, ub, eta, rng);
    } else {
      // density ~ eta^{(m-1)/2} on (0, ub]
      eta = ub * std::pow(rng.uniform(), 1.0 / shape);
    }
    lambda[j] = std::max(1.0 / std::sqrt(eta), 1e-12);
  }

  int M = 0;
  double c_sum = 0.0;
  for (int j = 0; j < G; ++j) {
    M += static_cast<int>(data.group_map[j].size());
    double bj = 0.0;
    for (int c : data.group_map[j]) bj += state.beta_raw[c] * state.beta_raw[c];
    c_sum += bj / (lambda[j] * lambda[j]);
  }
  // tau in (0,1) => eta = 1/tau^2 > 1; same slice scheme truncated below at 1
  double eta = 1.0 / (state.tau * state.tau);
  const double uslice = rng.uniform(0.0, 1.0 / (1.0 + eta));
  const double ub = (1.0 - uslice) / uslice;
  const double shape = 0.5 * (M + 1.0);
  const double rate = 0.5 * c_sum;
  if (rate > 0.0) {
    eta = truncated_gamma(shape, rate, 1.0, ub, eta, rng);
  } else if (ub > 1.0) {
    // density ~ eta^{(M-1)/2} on (1, ub]
    const double w = rng.uniform();
    eta = std::pow(1.0 + w * (std::pow(ub, shape) - 1.0), 1.0 / shape);
  }
  const double tau = std::clamp(1.0 / std::sqrt(eta), 1e-12, 1.0 - 1e-12);
  return {lambda, tau};
}

ModelState init_state(const PanelDataset& data, const FitConfig& cfg, Rng& rng) {
  ModelState st;
  // Start the index at the data scale: with xi = c 1 the index is
  // g(u) = c (u + 1), mean c, so match c to the PD stream level and the
  // slope a to the CAL/PD level ratio. A generic small start leaves the
  // chain in a huge-a / tiny-g region for thousands of sweeps.
  double pd_mean = 0.0, cal_mean = 0.0;
  long n_obs = 0;
  for (const auto& s : data.subjects) {
    pd_mean += s.y_pd.sum();
    cal_mean += s.y_cal.sum();
    n_obs += s.n_teeth;
  }
  pd_mean /= n_obs;
  cal_mean /= n_obs;
  const double xi0 = std::max(0.1, std::abs(pd_mean));
  st.a = std::abs(pd_mean) > 0.1 ? std::clamp(cal_mean / pd_mean, -10.0, 10.0) : 1.0;
  if (std::abs(st.a) < 0.1) st.a = st.a < 0.0 ? -0.1 : 0.1;
  // Index direction from a subject-level least-squares fit of the mean PD
  // response; a random direction gives the index no signal, letting xi
  // collapse toward a flat index the chain is slow to escape.
  Eigen::MatrixXd xs(data.N(), data.P);
  Eigen::VectorXd ys(data.N());
  for (int i = 0; i < data.N(); ++i) {
    xs.row(i) = data.subjects[i].X.colwise().mean();
    ys[i] = data.subjects[i].y_pd.mean();
  }
  xs.rowwise() -= xs.colwise().mean();
  ys.array() -= ys.mean();
  Eigen::MatrixXd gram = xs.transpose() * xs;
  gram.diagonal().array() += 1e-6;
  st.beta_raw = gram.llt().solve(xs.transpose() * ys);
  if (!(st.beta_raw.norm() > 1e-8) || !st.beta_raw.allFinite())
    for (int c = 0; c < data.P; ++c) st.beta_raw[c] = rng.normal();
  st.xi = Eigen::VectorXd::Constant(cfg.L + 1, xi0);
  st.delta = 0.0;
  st.sigma2 = 1.0;
  st.d2 = 1.0;
  st.nu = cfg.variant == Variant::StGp ? 5.0 : kInf;
  st.rho1_sq = 1.0;
  st.rho2 = 1.0;
  st.lambda = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(data.group_map.size()));
  st.tau = 0.5;
  st.u = Eigen::VectorXd::Ones(data.N());
  st.s.resize(data.N());
  for (int i = 0; i < data.N(); ++i)
    st.s[i] = cfg.variant == Variant::NGp ? 0.0 : std::abs(rng.normal());
  st.b = Eigen::VectorXd::Zero(data.N());
  return st;
}

void gibbs_sweep(ModelState& state, const PanelDataset& data, const BasisSpec& basis,
                 const FitConfig& cfg, Rng& rng, long* ess_evals) {
  const char* step = "";
  try {
    step = "horseshoe";
    auto [lambda, tau] = update_horseshoe(state, data, rng);
    state.lambda = lambda;
    state.tau = tau;
    // Collapsed draws (beta marginalizes s, u, b; xi marginalizes b) must be
    // followed by a refresh of the marginalized latents before any update
    // conditions on them, or the sweep loses the posterior as its invariant
    // distribution (partially collapsed Gibbs ordering rule).
    auto refresh_latents = [&](bool with_su) {
      for (int i = 0; i < data.N(); ++i) {
        const Subject& s = data.subjects[i];
        if (with_su) {
          if (cfg.variant != Variant::NGp) state.s[i] = update_s_i(state, s, i, basis, rng);
          if (cfg.variant == Variant::StGp) state.u[i] = update_u_i(state, s, i, basis, rng);
        }
        state.b[i] = update_b_i(state, s, i, basis, rng);
      }
    };
    step = "beta";
    state.beta_raw = update_beta(state, data, basis, cfg, rng, ess_evals);
    step = "latents";
    refresh_latents(true);
    step = "xi";
    state.xi = update_xi(state, data, basis, KernelParams{state.rho1_sq, state.rho2}, rng);
    step = "latents";
    refresh_latents(false);
    step = "a";
    state.a = update_a(state, data, basis, cfg, rng);
    if (cfg.variant != Variant::NGp) {
      step = "delta";
      state.delta = update_delta(state, data, basis, cfg, rng);
    }
    step = "latents";
    for (int i = 0; i < data.N(); ++i) {
      const Subject& s = data.subjects[i];
      if (cfg.variant != Variant::NGp) state.s[i] = update_s_i(state, s, i, basis, rng);
      if (cfg.variant == Variant::StGp) state.u[i] = update_u_i(state, s, i, basis, rng);
      state.b[i] = update_b_i(state, s, i, basis, rng);
    }
    step = "sigma2";
    state.sigma2 = update_sigma2(state, data, basis, cfg, rng);
    step = "d2";
    state.d2 = update_d2(state, data, cfg, rng);
    if (cfg.variant == Variant::StGp) {
      step = "nu";
      state.nu = update_nu(state, data, cfg, rng, ess_evals);
    }
    step = "gp_hyper";
    auto [r1, r2] = update_gp_hyper(state, basis, cfg, rng, ess_evals);
    state.rho1_sq = r1;
    state.rho2 = r2;
  } catch (const std::exception& e) {
    throw std::runtime_error("gibbs_sweep[" + std::string(step) + "]: " + e.what());
  }
}

PosteriorDraws run_chain(const PanelDataset& data, const FitConfig& cfg, Rng& rng) {
  cfg.validate();
  const BasisSpec basis(cfg.L);
  ModelState state = init_state(data, cfg, rng);
  const int retained = (cfg.iterations - cfg.burn_in) / cfg.thin;
  PosteriorDraws out;
  out.states.reserve(retained);
  out.loglik.resize(retained, data.N());
  int kept = 0;
  for (int t = 1; t <= cfg.iterations; ++t) {
    gibbs_sweep(state, data, basis, cfg, rng, &out.ess_target_evals);
    if (t > cfg.burn_in && (t - cfg.burn_in) % cfg.thin == 0 && kept < retained) {
      for (int i = 0; i < data.N(); ++i)
        out.loglik(kept, i) = marginal_loglik_subject(data.subjects[i], state, basis);
      out.states.push_back(state);
      out.replicate.push_back(0);
      ++kept;
    }
  }
  out.loglik.conservativeResize(kept, data.N());
  return out;
}

}  // namespace stgp
