#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "stgp/model.hpp"
#include "stgp/rng.hpp"
#include "stgp/stdist.hpp"

using namespace stgp;

namespace {

ModelState base_state(int P, int L, int N) {
  ModelState st;
  st.beta_raw = Eigen::VectorXd::Ones(P);
  st.xi = Eigen::VectorXd::Constant(L + 1, 0.1);
  st.lambda = Eigen::VectorXd::Ones(1);
  st.b = Eigen::VectorXd::Zero(N);
  st.s = Eigen::VectorXd::Zero(N);
  st.u = Eigen::VectorXd::Ones(N);
  return st;
}

Subject make_subject(int n, int P, Rng& rng) {
  Subject s;
  s.id = "s";
  s.n_teeth = n;
  s.y_pd.resize(n);
  s.y_cal.resize(n);
  s.X.resize(n, P);
  for (int j = 0; j < n; ++j) {
    s.y_pd[j] = rng.normal(2.0, 1.0);
    s.y_cal[j] = rng.normal(3.0, 1.0);
    for (int c = 0; c < P; ++c) s.X(j, c) = rng.normal() / (2.0 * std::sqrt(P));
  }
  return s;
}

}  // namespace

TEST_CASE("compound symmetry matches dense algebra") {
  CompoundSymmetry m2(2, 0.1, 0.5);
  CHECK(std::exp(m2.logdet()) == doctest::Approx(0.35).epsilon(1e-12));

  Rng rng(21);
  for (int n2 : {2, 20, 60}) {
    const double d2 = rng.exponential(1.0), s2 = 0.1 + rng.exponential(1.0);
    CompoundSymmetry cs(n2, d2, s2);
    const Eigen::MatrixXd psi = cs.dense();
    Eigen::VectorXd x(n2), y(n2);
    for (int i = 0; i < n2; ++i) {
      x[i] = rng.normal();
      y[i] = rng.normal();
    }
    const Eigen::MatrixXd dense_inv = psi.inverse();
    Eigen::MatrixXd inv_via_solve(n2, n2);
    for (int c = 0; c < n2; ++c) inv_via_solve.col(c) = cs.solve(psi.col(c));
    CHECK((inv_via_solve - Eigen::MatrixXd::Identity(n2, n2)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(cs.logdet() ==
          doctest::Approx(std::log(psi.determinant())).epsilon(1e-10));
    CHECK(cs.quad(x, y) == doctest::Approx(x.dot(dense_inv * y)).epsilon(1e-10));
    CHECK(cs.one_quad(x) ==
          doctest::Approx(Eigen::VectorXd::Ones(n2).dot(dense_inv * x)).epsilon(1e-10));
    CHECK(cs.one_one() ==
          doctest::Approx(Eigen::VectorXd::Ones(n2).dot(dense_inv * Eigen::VectorXd::Ones(n2)))
              .epsilon(1e-10));
  }
  CHECK_THROWS(CompoundSymmetry(2, 0.1, 0.0));
}

TEST_CASE("theta_i stacking") {
  BasisSpec basis(2);
  Rng rng(3);
  Subject s = make_subject(3, 4, rng);
  ModelState st = base_state(4, 2, 1);

  st.xi.setZero();
  CHECK(theta_i(s, st, basis).cwiseAbs().maxCoeff() == 0.0);

  st.xi.setConstant(0.5);
  st.a = 0.0;
  const Eigen::VectorXd th0 = theta_i(s, st, basis);
  CHECK(th0.tail(3).cwiseAbs().maxCoeff() == 0.0);

  // single tooth, X beta = 1, xi = 1 vector, a = 2 -> (2, 4)
  Subject one;
  one.id = "o";
  one.n_teeth = 1;
  one.y_pd = Eigen::VectorXd::Zero(1);
  one.y_cal = Eigen::VectorXd::Zero(1);
  one.X = Eigen::MatrixXd::Constant(1, 4, 0.5);  // row norm 1, X beta = 1 for beta = 1/2 each
  ModelState st2 = base_state(4, 2, 1);
  st2.xi.setOnes();
  st2.a = 2.0;
  const Eigen::VectorXd th = theta_i(one, st2, basis);
  CHECK(th[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(th[1] == doctest::Approx(4.0).epsilon(1e-12));

  // lower block is exactly a times the upper block
  st.a = -1.3;
  const Eigen::VectorXd thg = theta_i(s, st, basis);
  CHECK((thg.tail(3) - st.a * thg.head(3)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("marginal log-likelihood vs dense skew-t oracle") {
  BasisSpec basis(5);
  Rng rng(7);
  ModelState st = base_state(4, 5, 1);
  st.a = 1.5;
  st.delta = 0.6;
  st.sigma2 = 0.5;
  st.d2 = 0.1;
  st.nu = 5.89;

  // n_i = 1 subject against brute-force dense st_logpdf
  Subject one = make_subject(1, 4, rng);
  const Eigen::VectorXd th = theta_i(one, st, basis);
  StParams p;
  p.mu = th + Eigen::VectorXd::Constant(2, h_of_nu(st.nu) * st.delta);
  p.omega = CompoundSymmetry(2, st.d2, st.sigma2).dense();
  p.delta = Eigen::VectorXd::Constant(2, st.delta);
  p.nu = st.nu;
  CHECK(marginal_loglik_subject(one, st, basis) ==
        doctest::Approx(st_logpdf(one.stacked_y(), p)).epsilon(1e-10));

  // also for a larger subject
  Subject big = make_subject(6, 4, rng);
  const Eigen::VectorXd thb = theta_i(big, st, basis);
  StParams pb;
  pb.mu = thb + Eigen::VectorXd::Constant(12, h_of_nu(st.nu) * st.delta);
  pb.omega = CompoundSymmetry(12, st.d2, st.sigma2).dense();
  pb.delta = Eigen::VectorXd::Constant(12, st.delta);
  pb.nu = st.nu;
  CHECK(marginal_loglik_subject(big, st, basis) ==
        doctest::Approx(st_logpdf(big.stacked_y(), pb)).epsilon(1e-10));

  // delta = 0, d2 = 0 reduces to multivariate t with scale sigma2 I
  ModelState red = st;
  red.delta = 0.0;
  red.d2 = 0.0;
  const Eigen::VectorXd thr = theta_i(big, red, basis);
  CHECK(marginal_loglik_subject(big, red, basis) ==
        doctest::Approx(mvt_logpdf(big.stacked_y(), thr,
                                   red.sigma2 * Eigen::MatrixXd::Identity(12, 12), red.nu))
            .epsilon(1e-10));

  // invariance to rescaling beta_raw
  ModelState sc = st;
  sc.beta_raw *= 7.3;
  CHECK(marginal_loglik_subject(big, sc, basis) ==
        doctest::Approx(marginal_loglik_subject(big, st, basis)).epsilon(1e-12));

  // moving theta toward Y raises the likelihood (symmetric case: the
  // density peaks at theta = Y, so a small xi perturbation must lose)
  ModelState near = st, far = st;
  near.delta = far.delta = 0.0;
  near.xi.setConstant(0.2);
  big.y_pd = theta_i(big, near, basis).head(6);
  big.y_cal = theta_i(big, near, basis).tail(6);
  far.xi.setConstant(0.21);
  CHECK(marginal_loglik_subject(big, near, basis) > marginal_loglik_subject(big, far, basis));
}

TEST_CASE("marginal log-likelihood skew-normal limit") {
  BasisSpec basis(5);
  Rng rng(13);
  ModelState st = base_state(4, 5, 1);
  st.delta = 0.8;
  st.sigma2 = 0.7;
  st.d2 = 0.2;
  Subject subj = make_subject(2, 4, rng);

  // nu -> inf converges to the dedicated skew-normal branch
  ModelState lim = st;
  lim.nu = std::numeric_limits<double>::infinity();
  ModelState huge = st;
  huge.nu = 1e9;
  CHECK(marginal_loglik_subject(subj, lim, basis) ==
        doctest::Approx(marginal_loglik_subject(subj, huge, basis)).epsilon(1e-6));
}

TEST_CASE("residual streams") {
  BasisSpec basis(4);
  Rng rng(31);
  PanelDataset data;
  data.P = 3;
  data.group_map = {{1, 2}};
  data.normal_prior_columns = {0};
  for (int i = 0; i < 3; ++i) {
    Subject s = make_subject(2 + i, 3, rng);
    s.id = "s" + std::to_string(i);
    data.subjects.push_back(s);
  }
  data.validate();

  ModelState st = base_state(3, 4, 3);
  st.a = 1.2;
  st.b << 0.3, -0.1, 0.5;

  // zero-noise construction: responses equal theta + b
  for (int i = 0; i < 3; ++i) {
    Subject& s = data.subjects[i];
    const Eigen::VectorXd th = theta_i(s, st, basis);
    s.y_pd = th.head(s.n_teeth).array() + st.b[i];
    s.y_cal = th.tail(s.n_teeth).array() + st.b[i];
  }
  const ResidualStreams r = residuals(data, st, basis);
  CHECK(r.pd.size() + r.cal.size() == 2 * (2 + 3 + 4));
  CHECK(r.pd.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(r.cal.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("dataset validation and row scaling") {
  Rng rng(41);
  PanelDataset data;
  data.P = 3;
  data.group_map = {{1, 2}};
  data.normal_prior_columns = {0};
  for (int i = 0; i < 2; ++i) {
    Subject s = make_subject(2, 3, rng);
    s.X *= 10.0;  // unscaled
    data.subjects.push_back(s);
  }
  const double div = scale_rows(data);
  CHECK(div > 0.0);
  double max_norm = 0.0;
  for (const auto& s : data.subjects)
    for (int j = 0; j < s.n_teeth; ++j) max_norm = std::max(max_norm, s.X.row(j).norm());
  CHECK(max_norm <= 1.0);
  CHECK(max_norm == doctest::Approx(1.0).epsilon(1e-8));
  data.validate();

  PanelDataset bad = data;
  bad.normal_prior_columns = {0, 1};  // overlaps group {1,2}
  CHECK_THROWS(bad.validate());
}
