#include "stgp/stdist.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "stgp/special.hpp"

namespace stgp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// C1..C4 from the gamma moments; coefficients of the skew-t moment
// equations E Y^2 = C1 d^2 + C2 s2, E Y^3 = C3 d^3 + C4 s2 d.
struct MomentCoeffs {
  double c1, c2, c3, c4;
};

MomentCoeffs moment_coeffs(double nu) {
  const GammaMoments m = gamma_neg_moments(nu);
  if (!m.has_m3) throw std::domain_error("st moments: nu must exceed 3");
  const double two_over_pi = 2.0 / M_PI;
  const double s = std::sqrt(two_over_pi);
  MomentCoeffs c;
  c.c1 = m.m2 - m.m1 * m.m1 * two_over_pi;
  c.c2 = m.m2;
  c.c3 = 2.0 * m.m1 * m.m1 * m.m1 * two_over_pi * s + 2.0 * m.m3 * s - 3.0 * m.m1 * m.m2 * s;
  c.c4 = 3.0 * (m.m3 - m.m1 * m.m2) * s;
  return c;
}
}  // namespace

void StParams::validate() const {
  const int p = dim();
  if (p < 1) throw std::invalid_argument("StParams: dimension must be >= 1");
  if (omega.rows() != p || omega.cols() != p || delta.size() != p)
    throw std::invalid_argument("StParams: inconsistent dimensions");
  if (!(nu > 2.0)) throw std::domain_error("StParams: nu must be > 2");
  if (!omega.isApprox(omega.transpose(), 1e-10))
    throw std::invalid_argument("StParams: omega must be symmetric");
}

double h_of_nu(double nu) {
  if (!(nu > 1.0)) throw std::domain_error("h_of_nu: nu must be > 1");
  if (nu == kInf) return -std::sqrt(2.0 / M_PI);
  return -std::sqrt(nu / M_PI) *
         std::exp(std::lgamma(0.5 * (nu - 1.0)) - std::lgamma(0.5 * nu));
}

GammaMoments gamma_neg_moments(double nu) {
  GammaMoments g;
  g.nu = nu;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (nu == kInf) {
    g.m1 = g.m2 = g.m3 = 1.0;
    g.has_m1 = g.has_m2 = g.has_m3 = true;
    return g;
  }
  const double half = 0.5 * nu;
  g.has_m1 = nu > 1.0;
  g.has_m2 = nu > 2.0;
  g.has_m3 = nu > 3.0;
  g.m1 = g.has_m1 ? std::sqrt(half) * std::exp(std::lgamma(half - 0.5) - std::lgamma(half)) : nan;
  g.m2 = g.has_m2 ? half / (half - 1.0) : nan;
  g.m3 = g.has_m3 ? half * std::sqrt(half) * std::exp(std::lgamma(half - 1.5) - std::lgamma(half))
                  : nan;
  return g;
}

Eigen::VectorXd sample_st(const StParams& params, Rng& rng) {
  params.validate();
  Eigen::LLT<Eigen::MatrixXd> llt(params.omega);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("sample_st: omega is not positive definite");
  const int p = params.dim();
  Eigen::VectorXd z(p);
  for (int i = 0; i < p; ++i) z[i] = rng.normal();
  const double x0 = std::abs(rng.normal());
  const double u = params.nu == kInf ? 1.0 : rng.gamma(0.5 * params.nu, 0.5 * params.nu);
  return params.mu + (params.delta * x0 + llt.matrixL() * z) / std::sqrt(u);
}

double mvt_logpdf(const Eigen::VectorXd& y, const Eigen::VectorXd& mu,
                  const Eigen::MatrixXd& sigma, double nu) {
  const int p = static_cast<int>(y.size());
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("mvt_logpdf: scale matrix is not positive definite");
  double logdet = 0.0;
  for (int i = 0; i < p; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
  const Eigen::VectorXd w = llt.matrixL().solve(y - mu);
  const double d = w.squaredNorm();
  return std::lgamma(0.5 * (nu + p)) - std::lgamma(0.5 * nu) - 0.5 * p * std::log(nu * M_PI) -
         0.5 * logdet - 0.5 * (nu + p) * std::log1p(d / nu);
}

double st_logpdf(const Eigen::VectorXd& y, const StParams& params) {
  params.validate();
  const int p = params.dim();
  const Eigen::MatrixXd sigma = params.omega + params.delta * params.delta.transpose();
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("st_logpdf: omega + delta delta^T is not positive definite");
  const Eigen::VectorXd r = y - params.mu;
  const Eigen::VectorXd sol_r = llt.solve(r);
  const Eigen::VectorXd sol_d = llt.solve(params.delta);
  const double d = r.dot(sol_r);
  const double w = params.delta.dot(sol_r);
  const double lambda = 1.0 - params.delta.dot(sol_d);
  if (!(lambda > 0.0)) throw std::runtime_error("st_logpdf: Lambda <= 0");
  const double t_arg = w * std::sqrt((params.nu + p) / (params.nu + d)) / std::sqrt(lambda);
  return std::log(2.0) + mvt_logpdf(y, params.mu, sigma, params.nu) +
         std::log(student_t_cdf(t_arg, params.nu + p));
}

StParams st_linear_transform(const StParams& params, const Eigen::MatrixXd& A,
                             const Eigen::VectorXd& b) {
  params.validate();
  if (A.cols() != params.dim() || b.size() != A.rows())
    throw std::invalid_argument("st_linear_transform: nonconformable A or b");
  StParams out;
  out.mu = A * params.mu + b;
  out.omega = A * params.omega * A.transpose();
  out.delta = A * params.delta;
  out.nu = params.nu;
  if (Eigen::LLT<Eigen::MatrixXd>(out.omega).info() != Eigen::Success)
    throw std::runtime_error("st_linear_transform: A omega A^T is singular");
  return out;
}

std::pair<double, double> st_moments_23(double delta, double sigma2, double nu) {
  const MomentCoeffs c = moment_coeffs(nu);
  const double m2 = c.c1 * delta * delta + c.c2 * sigma2;
  const double m3 = c.c3 * delta * delta * delta + c.c4 * sigma2 * delta;
  return {m2, m3};
}

double recover_delta_cardano(double m2, double m3, int nu) {
  if (nu < 4 || nu > 100) throw std::domain_error("recover_delta_cardano: nu must be in [4, 100]");
  const MomentCoeffs c = moment_coeffs(static_cast<double>(nu));
  const double denom = c.c2 * c.c3 - c.c1 * c.c4;
  if (!(c.c4 / denom > 0.0))
    throw std::runtime_error("recover_delta_cardano: coefficient ratio not positive");
  const double p = c.c4 * m2 / denom;
  const double q = -c.c2 * m3 / denom;
  const double disc = 0.25 * q * q + p * p * p / 27.0;
  if (!(disc >= 0.0)) throw std::runtime_error("recover_delta_cardano: negative discriminant");
  const double root = std::sqrt(disc);
  return std::cbrt(-0.5 * q + root) + std::cbrt(-0.5 * q - root);
}

Eigen::VectorXd sample_truncated_mvn_positive(const Eigen::VectorXd& mean,
                                              const Eigen::MatrixXd& cov, Rng& rng,
                                              const Eigen::VectorXd& start, int periods,
                                              long max_wall_hits) {
  const int q = static_cast<int>(mean.size());
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("sample_truncated_mvn_positive: covariance not positive definite");
  const Eigen::MatrixXd L = llt.matrixL();

  Eigen::VectorXd x;
  if (start.size() == q) {
    x = start;
    for (int i = 0; i < q; ++i)
      if (!(x[i] > 0.0))
        throw std::invalid_argument("sample_truncated_mvn_positive: start not in the orthant");
  } else {
    x.resize(q);
    for (int i = 0; i < q; ++i) x[i] = std::max(mean[i], 0.1 * std::sqrt(cov(i, i)));
  }

  long hits = 0;
  constexpr double kTimeTol = 1e-9;
  const double travel = 0.5 * M_PI;

  for (int period = 0; period < periods; ++period) {
    // position/velocity in whitened coordinates; x(t) = mean + L (a sin t + b cos t)
    Eigen::VectorXd b = L.triangularView<Eigen::Lower>().solve(x - mean);
    Eigen::VectorXd a(q);
    for (int i = 0; i < q; ++i) a[i] = rng.normal();
    Eigen::VectorXd va = L * a, vb = L * b;

    double remaining = travel;
    while (remaining > kTimeTol) {
      // earliest wall hit within the remaining leg
      double t_hit = remaining;
      int wall = -1;
      for (int j = 0; j < q; ++j) {
        const double r = std::hypot(va[j], vb[j]);
        if (r < -mean[j] || r == 0.0) continue;  // wall unreachable
        const double cj = -mean[j] / r;
        if (cj < -1.0 || cj > 1.0) continue;
        const double phi = std::atan2(va[j], vb[j]);
        const double u0 = std::acos(cj);
        for (const double tc : {phi - u0, phi + u0}) {
          double t = std::fmod(tc, 2.0 * M_PI);
          if (t < 0.0) t += 2.0 * M_PI;
          if (t > kTimeTol && t < t_hit) {
            t_hit = t;
            wall = j;
          }
        }
      }
      const double ct = std::cos(t_hit), st = std::sin(t_hit);
      const Eigen::VectorXd b_new = a * st + b * ct;
      if (wall < 0) {
        b = b_new;
        remaining = 0.0;
        break;
      }
      if (++hits > max_wall_hits) {
        std::ostringstream msg;
        msg << "sample_truncated_mvn_positive: exceeded " << max_wall_hits
            << " wall hits (dim=" << q << ", period=" << period << ")";
        throw std::runtime_error(msg.str());
      }
      Eigen::VectorXd adot = a * ct - b * st;
      const Eigen::VectorXd n = L.row(wall).transpose();
      adot -= (2.0 * n.dot(adot) / n.squaredNorm()) * n;
      a = adot;
      b = b_new;
      va = L * a;
      vb = L * b;
      remaining -= t_hit;
    }
    const Eigen::VectorXd x_new = mean + L * b;
    bool feasible = true;
    for (int i = 0; i < q; ++i)
      if (!(x_new[i] > 0.0)) feasible = false;
    if (feasible) x = x_new;
    // infeasible endpoint (numerical grazing): keep the previous point
    // and retry the leg with a fresh velocity.
  }
  return x;
}

}  // namespace stgp
