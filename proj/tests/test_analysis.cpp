#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "cql/analysis.hpp"
#include "cql/cql_learn.hpp"
#include "cql/generators.hpp"
#include "cql/mdp_core.hpp"
#include "cql/rng.hpp"

using namespace cql;

namespace {

Policy rows(double p) {
  Matrix m(2, 2);
  m << p, 1.0 - p, p, 1.0 - p;
  return Policy{m};
}

QTable table(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return QTable{m};
}

}  // namespace

TEST_CASE("split comparison is vacuous exactly when mu matches the behavior") {
  TabularMdp mdp = chain2();
  Policy beta = uniform_policy(2, 2);
  GapReport rep = gap_expanding_check(mdp, beta, table(1, 0, -1, 2), table(0, 0, 0, 0),
                                      beta, 3.0);
  CHECK(rep.holds);
  for (int s = 0; s < 2; ++s) {
    CHECK(rep.vacuous[s]);
    CHECK(rep.alpha_required(s) == 0.0);
    CHECK(rep.delta_hat(s) == 0.0);
    CHECK(rep.lhs(s) == 0.0);  // the split weights themselves vanish
    CHECK(rep.rhs(s) == 0.0);
  }
  CHECK_THROWS_AS(gap_expanding_check(mdp, beta, table(1, 0, -1, 2),
                                      table(0, 0, 0, 0), beta, -1.0),
                  std::invalid_argument);
}

TEST_CASE("split widening decomposes into alpha mass minus the backup opponent") {
  Rng rng(230);
  RandomMdpSpec spec;
  spec.n_states = 3;
  spec.n_actions = 2;
  for (int i = 0; i < 25; ++i) {
    TabularMdp mdp = random_mdp(spec, 4000 + i);
    Policy beta = random_policy(3, 2, rng, 3.0);
    Policy mu = random_policy(3, 2, rng);
    Matrix qh(3, 2), qp(3, 2);
    for (int s = 0; s < 3; ++s)
      for (int a = 0; a < 2; ++a) {
        qh(s, a) = rng.uniform(-5, 5);
        qp(s, a) = rng.uniform(-5, 5);
      }
    double alpha = rng.uniform(0, 2);
    GapReport rep = gap_expanding_check(mdp, beta, QTable{qh}, QTable{qp}, mu, alpha);

    Policy pi_k = soft_policy_from_q(QTable{qh}, 1.0);
    QTable b_hat = bellman_policy_op(mdp, pi_k, QTable{qh});
    QTable b_plain = bellman_policy_op(mdp, pi_k, QTable{qp});
    for (int s = 0; s < 3; ++s) {
      double opponent = 0.0;
      for (int a = 0; a < 2; ++a)
        opponent -= (beta.probs(s, a) - mu.probs(s, a)) *
                    (b_hat.q(s, a) - b_plain.q(s, a));
      double predicted = alpha * rep.delta_hat(s) - opponent;
      CHECK(rep.lhs(s) - rep.rhs(s) == doctest::Approx(predicted).epsilon(1e-10));
      if (!rep.vacuous[s])
        CHECK(rep.alpha_required(s) ==
              doctest::Approx(std::max(opponent / rep.delta_hat(s), 0.0))
                  .epsilon(1e-12));
    }
  }
}

TEST_CASE("alpha above the per-state requirement always widens the split") {
  Rng rng(301);
  RandomMdpSpec spec;
  spec.n_states = 3;
  spec.n_actions = 2;
  int forced = 0;
  for (int i = 0; i < 25; ++i) {
    TabularMdp mdp = random_mdp(spec, 5000 + i);
    Policy beta = random_policy(3, 2, rng, 3.0);
    Policy mu = random_policy(3, 2, rng);
    Matrix qh(3, 2), qp(3, 2);
    for (int s = 0; s < 3; ++s)
      for (int a = 0; a < 2; ++a) {
        qh(s, a) = rng.uniform(-5, 5);
        qp(s, a) = rng.uniform(-5, 5);
      }
    GapReport probe =
        gap_expanding_check(mdp, beta, QTable{qh}, QTable{qp}, mu, 0.0);
    double needed = probe.alpha_required.maxCoeff();
    if (needed > 0.05 && !probe.holds) ++forced;  // zero alpha genuinely fails here
    GapReport rep = gap_expanding_check(mdp, beta, QTable{qh}, QTable{qp}, mu,
                                        needed + 0.1);
    CHECK(rep.holds);
  }
  CHECK(forced >= 1);
}

TEST_CASE("computable alpha bound dominates the oracle requirement") {
  Rng rng(512);
  RandomMdpSpec spec;
  spec.n_states = 3;
  spec.n_actions = 2;
  for (int i = 0; i < 25; ++i) {
    TabularMdp mdp = random_mdp(spec, 6100 + i);
    Policy beta = random_policy(3, 2, rng, 3.0);
    Policy mu = random_policy(3, 2, rng);
    Matrix qh(3, 2), qp(3, 2);
    for (int s = 0; s < 3; ++s)
      for (int a = 0; a < 2; ++a) {
        qh(s, a) = rng.uniform(-5, 5);
        qp(s, a) = rng.uniform(-1, 1);  // keeps the plain backup inside r_max/(1-gamma)
      }
    GapReport rep = gap_expanding_check(mdp, beta, QTable{qh}, QTable{qp}, mu, 0.0);
    Vector worst = worst_case_alpha(mdp, beta, QTable{qh}, mu);
    for (int s = 0; s < 3; ++s) {
      if (rep.vacuous[s]) continue;
      CHECK(worst(s) >= rep.alpha_required(s) - 1e-12);
    }
  }
}

TEST_CASE("both penalized objective forms agree across a policy grid") {
  TabularMdp mdp = chain2_bernoulli();
  Policy beta = uniform_policy(2, 2);
  TransitionDataset d = sample_dataset(mdp, beta, 1200, 60, 17,
                                       {RewardNoiseKind::Bernoulli, 0.0});
  EmpiricalModel m = build_empirical_model(d, shape_of(mdp));
  REQUIRE(m.unvisited_pairs.empty());
  TabularMdp hat = empirical_mdp(m, mdp.initial_dist);

  ObjectiveEquivalenceReport rep =
      objective_equivalence_check(hat, m.pi_beta_hat, 1.0, mdp.initial_dist, 0.1);
  CHECK(rep.n_grid == 121);
  CHECK(rep.max_pointwise_diff <= 1e-8);
  CHECK(std::abs(rep.lhs_best - rep.rhs_best) <= 1e-9);
  CHECK((rep.match || rep.grid_ambiguous));
  if (rep.match && !rep.grid_ambiguous)
    CHECK((rep.argmax_lhs.probs - rep.argmax_rhs.probs).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("grid comparison rejects shapes it cannot enumerate") {
  RandomMdpSpec spec3;
  spec3.n_states = 2;
  spec3.n_actions = 3;
  TabularMdp three_actions = random_mdp(spec3, 1);
  CHECK_THROWS_AS(objective_equivalence_check(three_actions, uniform_policy(2, 3), 1.0,
                                              three_actions.initial_dist),
                  std::invalid_argument);

  RandomMdpSpec spec4;
  spec4.n_states = 4;
  spec4.n_actions = 2;
  TabularMdp four_states = random_mdp(spec4, 1);
  CHECK_THROWS_AS(objective_equivalence_check(four_states, uniform_policy(4, 2), 1.0,
                                              four_states.initial_dist),
                  std::invalid_argument);

  TabularMdp ok = chain2();
  CHECK_THROWS_AS(objective_equivalence_check(ok, uniform_policy(2, 2), 1.0,
                                              ok.initial_dist, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(objective_equivalence_check(ok, uniform_policy(2, 2), 1.0,
                                              ok.initial_dist, 0.7),
                  std::invalid_argument);
  Matrix det(2, 2);
  det << 1.0, 0.0, 0.5, 0.5;
  CHECK_THROWS_AS(objective_equivalence_check(ok, Policy{det}, 1.0, ok.initial_dist),
                  std::invalid_argument);
  Vector short_rho(1);
  short_rho << 1.0;
  CHECK_THROWS_AS(objective_equivalence_check(ok, uniform_policy(2, 2), 1.0, short_rho),
                  std::invalid_argument);
}

TEST_CASE("safe-improvement certificate pieces fit together on covered data") {
  TabularMdp mdp = chain2_bernoulli();
  Policy beta = uniform_policy(2, 2);
  RewardNoise noise{RewardNoiseKind::Bernoulli, 0.0};
  ConcentrationConfig cfg = estimate_concentration(mdp, beta, 4000, 100, 100, 0.1,
                                                   2100, noise);
  TransitionDataset d = sample_dataset(mdp, beta, 4000, 100, 9100, noise);
  EmpiricalModel m = build_empirical_model(d, shape_of(mdp));
  REQUIRE(m.unvisited_pairs.empty());

  Policy pi_star = mask_to_support(rows(0.7), m);
  SafeImprovementReport rep = zeta_bound(mdp, m, pi_star, cfg, 1.0);

  CHECK(rep.alpha == 1.0);
  CHECK(rep.sentinel_states == 0);
  CHECK(rep.sampling_term ==
        doctest::Approx(2.0 * rep.per_policy_bound_pi_star).epsilon(1e-15));
  CHECK(rep.zeta ==
        doctest::Approx(rep.sampling_term - rep.improvement_term).epsilon(1e-12));
  CHECK(rep.improvement_term ==
        doctest::Approx(rep.j_pi_star_hat - rep.j_beta_hat).epsilon(1e-12));
  CHECK(rep.holds == (rep.j_pi_star_m >= rep.j_beta_m - rep.zeta - 1e-12));
  CHECK(rep.holds);

  // the one-policy deviation bounds actually cover this draw
  CHECK(std::abs(rep.j_pi_star_hat - rep.j_pi_star_m) <=
        rep.per_policy_bound_pi_star + 1e-12);
  CHECK(std::abs(rep.j_beta_hat - rep.j_beta_m) <= rep.per_policy_bound_beta + 1e-12);

  GridworldSpec gw;
  TabularMdp grid = gridworld(gw);
  CHECK_THROWS_AS(zeta_bound(grid, m, pi_star, cfg, 1.0), std::invalid_argument);
}

TEST_CASE("charging any distribution other than the behavior admits a negative penalty") {
  Policy beta = uniform_policy(2, 2);
  NuNecessityResult same = nu_necessity_search(beta, beta);
  CHECK(same.min_penalty == 0.0);
  CHECK((same.witness.probs - beta.probs).cwiseAbs().maxCoeff() == 0.0);

  Matrix det(2, 2);
  det << 1.0, 0.0, 1.0, 0.0;
  NuNecessityResult res = nu_necessity_search(beta, Policy{det});
  CHECK(res.witness.probs(0, 0) == doctest::Approx(0.75));
  CHECK(res.witness.probs(0, 1) == doctest::Approx(0.25));
  CHECK(res.min_penalty == doctest::Approx(-0.25).epsilon(1e-12));

  // dense scan over pi = (p, 1-p) confirms the stationary point is the minimum
  double grid_min = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    double p = i / 1000.0;
    double val = p * (p - 1.0) / 0.5 + (1.0 - p) * (1.0 - p) / 0.5;
    grid_min = std::min(grid_min, val);
  }
  CHECK(grid_min >= res.min_penalty - 1e-9);
  CHECK(grid_min == doctest::Approx(-0.25).epsilon(1e-5));

  CHECK_THROWS_AS(nu_necessity_search(Policy{det}, beta), std::invalid_argument);
  CHECK_THROWS_AS(nu_necessity_search(beta, uniform_policy(2, 3)),
                  std::invalid_argument);
}

TEST_CASE("penalized fixed point equals plain evaluation of a reward-shifted MDP") {
  TabularMdp mdp = chain2();
  Policy beta = uniform_policy(2, 2);
  Policy target = rows(0.8);

  CqlEvalConfig cfg;
  cfg.alpha = 1.0;
  cfg.mu = target;
  cfg.variant = CqlVariant::Eq2;
  QTable penalized =
      cql_fixed_point(cfg, EvalInput::exact(mdp, beta), target).q;

  Matrix shifted = mdp.reward;
  for (int s = 0; s < 2; ++s)
    for (int a = 0; a < 2; ++a)
      shifted(s, a) -= cfg.alpha *
                       (target.probs(s, a) - beta.probs(s, a)) / beta.probs(s, a);
  TabularMdp altered(2, 2, mdp.transition, shifted, mdp.gamma, mdp.initial_dist,
                     2.0, "shifted");
  QTable plain = exact_q(altered, target);
  CHECK((penalized.q - plain.q).cwiseAbs().maxCoeff() <= 1e-9);
}
