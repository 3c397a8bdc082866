#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>

#include "cql/cql_eval.hpp"
#include "cql/generators.hpp"
#include "cql/linear_fa.hpp"
#include "cql/mdp_core.hpp"
#include "cql/rng.hpp"

using namespace cql;

namespace {

// single state, two self-loop actions: the minimal stage for projection effects
TabularMdp loop_mdp() {
  Matrix t(2, 1);
  t << 1.0, 1.0;
  Matrix r = Matrix::Zero(1, 2);
  Vector rho0(1);
  rho0 << 1.0;
  return TabularMdp(1, 2, t, r, 0.9, rho0, 1.0, "loop");
}

LinearQModel identity_features(const TabularMdp& mdp) {
  int n = mdp.n_states * mdp.n_actions;
  return {Matrix::Identity(n, n), Vector::Zero(n)};
}

Matrix skew_rows(double p) {
  Matrix m(2, 2);
  m << p, 1.0 - p, 1.0 - p, p;
  return m;
}

}  // namespace

TEST_CASE("weights and features reshape into the flat-index table") {
  TabularMdp mdp = chain2();
  LinearQModel fa = identity_features(mdp);
  fa.w << 1.0, 2.0, 3.0, 4.0;
  QTable q = fa.q_table(2, 2);
  CHECK(q.q(0, 0) == 1.0);
  CHECK(q.q(0, 1) == 2.0);
  CHECK(q.q(1, 0) == 3.0);
  CHECK(q.q(1, 1) == 4.0);
}

TEST_CASE("data distribution splits the state marginal over behavior actions") {
  TabularMdp mdp = chain2();
  Vector d = sa_distribution(mdp, uniform_policy(2, 2));
  CHECK(d(0) == doctest::Approx(0.275).epsilon(1e-12));
  CHECK(d(1) == doctest::Approx(0.275).epsilon(1e-12));
  CHECK(d(2) == doctest::Approx(0.225).epsilon(1e-12));
  CHECK(d.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("identity features reduce the penalized fit to the tabular iterate") {
  TabularMdp mdp = chain2();
  Policy beta = uniform_policy(2, 2);
  Policy target{skew_rows(0.7)};
  LinearQModel fa = identity_features(mdp);
  Matrix raw(2, 2);
  raw << 0.3, -0.2, 1.1, 0.4;
  QTable q_prev{raw};

  CqlEvalConfig cfg;
  cfg.alpha = 0.5;
  cfg.mu = target;
  EvalInput input = EvalInput::exact(mdp, beta);
  QTable tabular = cql_eq2_iterate(cfg, input, target, q_prev);
  LinearQModel fit = cql_linear_iterate(fa, mdp, beta, target, 0.5, q_prev);
  CHECK((fit.q_table(2, 2).q - tabular.q).cwiseAbs().maxCoeff() <= 1e-9);

  // alpha = 0 is exactly the least-squares evaluation step, here the backup itself
  LinearQModel plain = lstdq_iterate(fa, mdp, beta, target, q_prev);
  QTable backup = bellman_policy_op(mdp, target, q_prev);
  CHECK((plain.q_table(2, 2).q - backup.q).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("full-rank projection leaves the ratio penalty intact") {
  TabularMdp mdp = chain2();
  Policy beta = uniform_policy(2, 2);
  Policy pi{skew_rows(0.8)};
  LinearQModel fa = identity_features(mdp);
  Vector f = projection_penalty(fa, mdp, beta, pi);
  Vector d = d_cql(pi, beta);
  CHECK((f - d).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(f(0) == doctest::Approx(0.36).epsilon(1e-9));

  // no penalty direction at the behavior policy, whatever the features
  Matrix narrow = random_features(2, 2, 2, 3);
  Vector zero = projection_penalty({narrow, Vector::Zero(2)}, mdp, beta, beta);
  CHECK(zero.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("a one-dimensional subspace flips the penalty sign") {
  TabularMdp mdp = loop_mdp();
  Policy beta = uniform_policy(1, 2);
  Matrix p(1, 2);
  p << 0.25, 0.75;
  Policy pi{p};
  Matrix f(2, 1);
  f << 1.0, 0.0;  // the span only sees the action the target avoids
  LinearQModel fa{f, Vector::Zero(1)};

  Vector pen = projection_penalty(fa, mdp, beta, pi);
  CHECK(pen(0) == doctest::Approx(-0.125).epsilon(1e-12));

  // no nonnegative multiplier can exploit a penalty pointing the wrong way
  QTable q_prev(1, 2);
  CHECK(std::isinf(alpha_threshold_linear(fa, mdp, beta, pi, q_prev)));
}

TEST_CASE("certified linear alpha equalizes the weighted averages") {
  TabularMdp mdp = chain2();
  Policy beta = uniform_policy(2, 2);
  Vector d_state = discounted_state_marginal(mdp, beta);
  Rng rng(415);
  int finite = 0;
  for (int i = 0; i < 40; ++i) {
    int dim = 1 + static_cast<int>(rng.uniform() * 3.0);
    LinearQModel fa{random_features(2, 2, dim, 6000 + i), Vector::Zero(dim)};
    Policy target = random_policy(2, 2, rng);
    Matrix raw(2, 2);
    raw << rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5),
        rng.uniform(-5, 5);
    QTable q_prev{raw};

    double alpha;
    try {
      alpha = alpha_threshold_linear(fa, mdp, beta, target, q_prev);
    } catch (const std::runtime_error&) {
      continue;  // ill-conditioned draw
    }
    if (!std::isfinite(alpha)) continue;
    ++finite;

    QTable backup = bellman_policy_op(mdp, target, q_prev);
    Vector v_backup = value_from_q(backup, target).v;
    auto averaged = [&](double a) {
      LinearQModel fit = cql_linear_iterate(fa, mdp, beta, target, a, q_prev);
      Vector v = value_from_q(fit.q_table(2, 2), target).v;
      return d_state.dot(v - v_backup);
    };
    CHECK(averaged(alpha) <= 1e-8);
    if (alpha > 0.0) CHECK(std::abs(averaged(alpha)) <= 1e-8);  // exactly binding
    CHECK(averaged(alpha + 0.1) < averaged(alpha) + 1e-10);     // margin helps
  }
  CHECK(finite >= 20);
}

TEST_CASE("kernel step matches its two-term closed form") {
  TabularMdp mdp = chain2();
  Policy beta = uniform_policy(2, 2);
  Policy target{skew_rows(0.7)};
  Matrix f = random_features(2, 2, 3, 29);
  LinearQModel fa{f, Vector::Zero(3)};
  Matrix raw(2, 2);
  raw << 0.5, -1.0, 0.25, 2.0;
  QTable q_prev{raw};
  double eta = 0.1;

  // alpha = 0: plain semi-gradient q + eta M D (b - q), assembled by hand
  Vector d = sa_distribution(mdp, beta);
  Vector q_flat(4), b_flat(4);
  QTable backup = bellman_policy_op(mdp, target, q_prev);
  for (int s = 0; s < 2; ++s)
    for (int a = 0; a < 2; ++a) {
      q_flat(sa_index(s, a, 2)) = q_prev.q(s, a);
      b_flat(sa_index(s, a, 2)) = backup.q(s, a);
    }
  Matrix kernel = f * f.transpose();
  Vector expected = q_flat + eta * (kernel * (d.asDiagonal() * (b_flat - q_flat)));
  QTable stepped = ntk_gradient_step(fa, mdp, beta, target, 0.0, eta, q_prev);
  for (int s = 0; s < 2; ++s)
    for (int a = 0; a < 2; ++a)
      CHECK(stepped.q(s, a) ==
            doctest::Approx(expected(sa_index(s, a, 2))).epsilon(1e-12));

  // the penalty contribution is linear in alpha with slope -eta M D u
  QTable pen_step = ntk_gradient_step(fa, mdp, beta, target, 2.0, eta, q_prev);
  Vector u(4);
  for (int s = 0; s < 2; ++s)
    for (int a = 0; a < 2; ++a)
      u(sa_index(s, a, 2)) =
          (target.probs(s, a) - beta.probs(s, a)) / beta.probs(s, a);
  Vector slope = kernel * (d.asDiagonal() * u);
  for (int s = 0; s < 2; ++s)
    for (int a = 0; a < 2; ++a)
      CHECK(pen_step.q(s, a) - stepped.q(s, a) ==
            doctest::Approx(-eta * 2.0 * slope(sa_index(s, a, 2))).epsilon(1e-10));
}

TEST_CASE("kernel penalty opposes the ratio direction but not every policy average") {
  // the D-weighted quadratic form is nonnegative for any feature kernel
  Rng rng(88);
  TabularMdp mdp = chain2();
  Policy beta = uniform_policy(2, 2);
  for (int i = 0; i < 50; ++i) {
    int dim = 1 + static_cast<int>(rng.uniform() * 4.0);
    Matrix f = random_features(2, 2, dim, 7000 + i);
    Policy pi = random_policy(2, 2, rng);
    Vector d = sa_distribution(mdp, beta);
    Vector u(4);
    for (int s = 0; s < 2; ++s)
      for (int a = 0; a < 2; ++a)
        u(sa_index(s, a, 2)) = (pi.probs(s, a) - 0.5) / 0.5;
    Vector du = d.asDiagonal() * u;
    CHECK(du.dot(f * (f.transpose() * du)) >= -1e-12);
  }

  // yet on the one-dimensional stage the target-average moves up, not down
  TabularMdp loop = loop_mdp();
  Policy lbeta = uniform_policy(1, 2);
  Matrix p(1, 2);
  p << 0.25, 0.75;
  Policy pi{p};
  Matrix f(2, 1);
  f << 1.0, 0.0;
  LinearQModel fa{f, Vector::Zero(1)};
  QTable q_prev(1, 2);
  QTable plain = ntk_gradient_step(fa, loop, lbeta, pi, 0.0, 1.0, q_prev);
  QTable pen = ntk_gradient_step(fa, loop, lbeta, pi, 1.0, 1.0, q_prev);
  double shift = value_from_q(pen, pi).v(0) - value_from_q(plain, pi).v(0);
  CHECK(shift == doctest::Approx(0.0625).epsilon(1e-12));
}

TEST_CASE("feature generation is reproducible, full rank, and bounded") {
  Matrix a = random_features(3, 2, 4, 11);
  Matrix b = random_features(3, 2, 4, 11);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.rows() == 6);
  CHECK(Eigen::ColPivHouseholderQR<Matrix>(a).rank() == 4);
  CHECK_THROWS_AS(random_features(2, 2, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(random_features(2, 2, 5, 1), std::invalid_argument);
}

TEST_CASE("degenerate setups are reported, not silently solved") {
  TabularMdp mdp = chain2();
  Policy beta = uniform_policy(2, 2);
  Policy target{skew_rows(0.7)};
  QTable q_prev(2, 2);

  Matrix dup(4, 2);
  dup << 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0;  // rank-one normal matrix
  CHECK_THROWS_AS(cql_linear_iterate({dup, Vector::Zero(2)}, mdp, beta, target, 0.1,
                                     q_prev),
                  std::runtime_error);

  Matrix det(2, 2);
  det << 1.0, 0.0, 1.0, 0.0;
  Policy no_support{det};
  LinearQModel fa{random_features(2, 2, 2, 5), Vector::Zero(2)};
  CHECK_THROWS_AS(projection_penalty(fa, mdp, no_support, target),
                  std::invalid_argument);

  Matrix wrong_rows(3, 1);
  wrong_rows << 1.0, 0.0, 0.0;
  CHECK_THROWS_AS(projection_penalty({wrong_rows, Vector::Zero(1)}, mdp, beta, target),
                  std::invalid_argument);
}
