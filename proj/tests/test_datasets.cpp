#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "cql/datasets.hpp"
#include "cql/generators.hpp"
#include "cql/mdp_core.hpp"

using namespace cql;

namespace {

TransitionDataset manual_dataset() {
  TransitionDataset d;
  d.source_mdp_id = "manual";
  d.rng_seed = 42;
  d.tuples = {{0, 0, 0.5, 1}, {0, 0, 0.25, 0}, {1, 1, 1.0, 1}, {0, 0, 0.75, 1}};
  return d;
}

const MdpShape kShape{2, 2, 0.9, 1.0};

}  // namespace

TEST_CASE("sampling is reproducible from the seed alone") {
  TabularMdp mdp = chain2_bernoulli();
  Policy beta = uniform_policy(2, 2);
  TransitionDataset a = sample_dataset(mdp, beta, 500, 50, 11);
  TransitionDataset b = sample_dataset(mdp, beta, 500, 50, 11);
  REQUIRE(a.tuples.size() == 500);
  CHECK(a.source_mdp_id == mdp.id);
  CHECK(a.rng_seed == 11);
  bool identical = true;
  for (size_t i = 0; i < a.tuples.size(); ++i)
    identical = identical && a.tuples[i].s == b.tuples[i].s &&
                a.tuples[i].a == b.tuples[i].a && a.tuples[i].r == b.tuples[i].r &&
                a.tuples[i].s_next == b.tuples[i].s_next;
  CHECK(identical);

  TransitionDataset c = sample_dataset(mdp, beta, 500, 50, 12);
  bool differs = false;
  for (size_t i = 0; i < a.tuples.size() && !differs; ++i)
    differs = a.tuples[i].s != c.tuples[i].s || a.tuples[i].a != c.tuples[i].a ||
              a.tuples[i].r != c.tuples[i].r || a.tuples[i].s_next != c.tuples[i].s_next;
  CHECK(differs);
}

TEST_CASE("horizon cuts episodes at the stated length") {
  // chain2 starts deterministically in state 0, so horizon 1 forces every
  // tuple to begin there regardless of where the previous one landed
  TabularMdp mdp = chain2();
  TransitionDataset d = sample_dataset(mdp, uniform_policy(2, 2), 200, 1, 3);
  for (const Transition& tr : d.tuples) CHECK(tr.s == 0);
}

TEST_CASE("reward noise models emit what they promise and reject bad setups") {
  TabularMdp mdp = chain2_bernoulli();
  Policy beta = uniform_policy(2, 2);

  RewardNoise bern{RewardNoiseKind::Bernoulli, 0.0};
  TransitionDataset d = sample_dataset(mdp, beta, 3000, 100, 5, bern);
  for (const Transition& tr : d.tuples) CHECK((tr.r == 0.0 || tr.r == 1.0));

  RewardNoise unif{RewardNoiseKind::Uniform, 0.1};
  TransitionDataset du = sample_dataset(mdp, beta, 1000, 100, 5, unif);
  for (const Transition& tr : du.tuples) {
    CHECK(tr.r <= mdp.reward(tr.s, tr.a) + 0.1);
    CHECK(tr.r >= mdp.reward(tr.s, tr.a) - 0.1);
  }

  RandomMdpSpec neg;
  neg.reward_lo = -0.5;
  neg.reward_hi = 0.5;
  TabularMdp signed_mdp = random_mdp(neg, 9);
  CHECK_THROWS_AS(sample_dataset(signed_mdp, uniform_policy(5, 3), 10, 10, 1, bern),
                  std::invalid_argument);

  RewardNoise wide{RewardNoiseKind::Uniform, 0.5};
  CHECK_THROWS_AS(sample_dataset(chain2(), beta, 10, 10, 1, wide),
                  std::invalid_argument);
  RewardNoise negative_width{RewardNoiseKind::Uniform, -0.1};
  CHECK_THROWS_AS(sample_dataset(chain2(), beta, 10, 10, 1, negative_width),
                  std::invalid_argument);

  CHECK_THROWS_AS(sample_dataset(mdp, beta, 0, 10, 1), std::invalid_argument);
  CHECK_THROWS_AS(sample_dataset(mdp, beta, 10, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(sample_dataset(mdp, uniform_policy(3, 2), 10, 10, 1),
                  std::invalid_argument);
}

TEST_CASE("empirical model matches a by-hand recount") {
  EmpiricalModel m = build_empirical_model(manual_dataset(), kShape);

  CHECK(m.counts(0, 0) == 3.0);
  CHECK(m.counts(0, 1) == 0.0);
  CHECK(m.counts(1, 0) == 0.0);
  CHECK(m.counts(1, 1) == 1.0);
  CHECK(m.state_counts(0) == 3.0);
  CHECK(m.state_counts(1) == 1.0);

  CHECK(m.r_hat(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(m.r_hat(1, 1) == 1.0);
  CHECK(m.r_hat(0, 1) == 0.0);
  CHECK(m.r_hat(1, 0) == 0.0);

  CHECK(m.t_hat(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(m.t_hat(0, 1) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(m.t_hat(1, 0) == 1.0);  // unvisited (0,1) self-loops
  CHECK(m.t_hat(2, 1) == 1.0);  // unvisited (1,0) self-loops
  CHECK(m.t_hat(3, 1) == 1.0);

  CHECK(m.pi_beta_hat.probs(0, 0) == 1.0);
  CHECK(m.pi_beta_hat.probs(0, 1) == 0.0);
  CHECK(m.pi_beta_hat.probs(1, 1) == 1.0);

  CHECK(m.inv_sqrt_counts(0, 0) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));
  CHECK(m.inv_sqrt_counts(1, 1) == 1.0);
  CHECK(m.sentinel == doctest::Approx(20.0));
  CHECK(m.inv_sqrt_counts(0, 1) == doctest::Approx(20.0));

  REQUIRE(m.unvisited_pairs.size() == 2);
  CHECK(m.unvisited_pairs[0] == std::pair<int, int>{0, 1});
  CHECK(m.unvisited_pairs[1] == std::pair<int, int>{1, 0});
  CHECK(m.unvisited_states.empty());
  CHECK(m.visited(0, 0));
  CHECK_FALSE(m.visited(0, 1));
  CHECK(m.visited_state(1));
}

TEST_CASE("empirical model rejects bad tuples, shapes and sentinels") {
  TransitionDataset d = manual_dataset();
  CHECK_THROWS_AS(build_empirical_model(d, kShape, 10.0), std::invalid_argument);
  EmpiricalModel loose = build_empirical_model(d, kShape, 25.0);
  CHECK(loose.sentinel == 25.0);

  TransitionDataset out_of_range = d;
  out_of_range.tuples.push_back({2, 0, 0.0, 0});
  CHECK_THROWS_AS(build_empirical_model(out_of_range, kShape), std::invalid_argument);

  TransitionDataset big_reward = d;
  big_reward.tuples.push_back({0, 0, 1.5, 0});
  CHECK_THROWS_AS(build_empirical_model(big_reward, kShape), std::invalid_argument);

  MdpShape bad = kShape;
  bad.gamma = 1.0;
  CHECK_THROWS_AS(build_empirical_model(d, bad), std::invalid_argument);
}

TEST_CASE("empirical backups use estimates at visited pairs and the floor elsewhere") {
  EmpiricalModel m = build_empirical_model(manual_dataset(), kShape);
  Matrix raw(2, 2);
  raw << 1.0, 2.0, 3.0, 4.0;
  QTable q{raw};
  Policy pi = uniform_policy(2, 2);

  QTable out = empirical_bellman_policy_op(m, pi, q);
  // v = (1.5, 3.5); row (0,0) mixes v with weights (1/3, 2/3)
  CHECK(out.q(0, 0) ==
        doctest::Approx(0.5 + 0.9 * (1.5 / 3.0 + 3.5 * 2.0 / 3.0)).epsilon(1e-12));
  CHECK(out.q(1, 1) == doctest::Approx(1.0 + 0.9 * 3.5).epsilon(1e-12));
  CHECK(out.q(0, 1) == doctest::Approx(-20.0));
  CHECK(out.q(1, 0) == doctest::Approx(-20.0));

  QTable opt = empirical_bellman_optimality_op(m, q);
  // max over actions gives v = (2, 4)
  CHECK(opt.q(0, 0) ==
        doctest::Approx(0.5 + 0.9 * (2.0 / 3.0 + 4.0 * 2.0 / 3.0)).epsilon(1e-12));
  CHECK(opt.q(1, 1) == doctest::Approx(1.0 + 0.9 * 4.0).epsilon(1e-12));
  CHECK(opt.q(0, 1) == doctest::Approx(-20.0));
}

TEST_CASE("deviation scales combine and spread as 1/sqrt(n)") {
  ConcentrationConfig cfg{1.0, 1.0, 0.1};
  CHECK(composite_concentration(cfg, 0.9, 1.0) == doctest::Approx(19.0).epsilon(1e-15));

  TransitionDataset d;
  d.tuples.assign(100, Transition{0, 0, 0.5, 1});
  EmpiricalModel m = build_empirical_model(d, kShape);
  Matrix bound = overestimation_bound(m, cfg, 0.9, 1.0);
  CHECK(bound(0, 0) == doctest::Approx(1.9).epsilon(1e-15));
  CHECK(bound(0, 1) == doctest::Approx(20.0));  // sentinel at unvisited pairs
}

TEST_CASE("conformal calibration needs enough datasets for its order statistic") {
  TabularMdp mdp = chain2_bernoulli();
  Policy beta = uniform_policy(2, 2);
  CHECK_THROWS_AS(estimate_concentration(mdp, beta, 100, 50, 10, 0.05, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(estimate_concentration(mdp, beta, 100, 50, 10, 0.0, 1),
                  std::invalid_argument);
}

TEST_CASE("calibrated scales cover fresh datasets at roughly the stated rate") {
  TabularMdp mdp = chain2_bernoulli();
  Policy beta = uniform_policy(2, 2);
  RewardNoise noise{RewardNoiseKind::Bernoulli, 0.0};
  ConcentrationConfig cfg =
      estimate_concentration(mdp, beta, 400, 100, 100, 0.1, 100, noise);
  CHECK(cfg.c_r > 0.0);
  // deterministic transitions are recovered exactly, so their scale is zero
  CHECK(cfg.c_t == 0.0);
  CHECK(cfg.delta == 0.1);

  int cover_r = 0, cover_t = 0;
  const int fresh = 200;
  for (int k = 0; k < fresh; ++k) {
    TransitionDataset d = sample_dataset(mdp, beta, 400, 100, 5000 + k, noise);
    EmpiricalModel m = build_empirical_model(d, shape_of(mdp));
    double wr = 0.0, wt = 0.0;
    for (int s = 0; s < mdp.n_states; ++s)
      for (int a = 0; a < mdp.n_actions; ++a) {
        if (!m.visited(s, a)) continue;
        double root_n = std::sqrt(m.counts(s, a));
        wr = std::max(wr, root_n * std::abs(m.r_hat(s, a) - mdp.reward(s, a)));
        int row = sa_index(s, a, mdp.n_actions);
        wt = std::max(wt, root_n * (m.t_hat.row(row) - mdp.transition.row(row))
                                       .cwiseAbs()
                                       .sum());
      }
    cover_r += wr <= cfg.c_r;
    cover_t += wt <= cfg.c_t;
  }
  CHECK(cover_r >= static_cast<int>(0.85 * fresh));
  CHECK(cover_t == fresh);  // zero scale covers the always-zero statistic

  GridworldSpec gw;
  gw.width = 2;
  gw.height = 2;
  TabularMdp slippery = gridworld(gw);
  ConcentrationConfig gcfg = estimate_concentration(
      slippery, uniform_policy(slippery.n_states, slippery.n_actions), 400, 50,
      40, 0.1, 7);
  CHECK(gcfg.c_t > 0.0);
}

TEST_CASE("induced empirical MDP is valid and absorbs unvisited pairs") {
  EmpiricalModel m = build_empirical_model(manual_dataset(), kShape);
  Vector rho0(2);
  rho0 << 1.0, 0.0;
  TabularMdp hat = empirical_mdp(m, rho0, "hat");
  CHECK_NOTHROW(hat.validate());
  CHECK(hat.id == "hat");
  CHECK(hat.gamma == 0.9);
  CHECK(hat.reward(0, 0) == doctest::Approx(0.5));
  CHECK(hat.reward(0, 1) == 0.0);
  CHECK(hat.transition(1, 0) == 1.0);  // unvisited (0,1) self-loop
  CHECK(hat.transition(2, 1) == 1.0);  // unvisited (1,0) self-loop
  CHECK(hat.transition(0, 1) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("support masking renormalizes visited states and spares unvisited ones") {
  TransitionDataset d;
  d.tuples = {{0, 0, 0.5, 1}};  // state 1 never acts
  EmpiricalModel m = build_empirical_model(d, kShape);
  REQUIRE(m.unvisited_states.size() == 1);

  Policy masked = mask_to_support(uniform_policy(2, 2), m);
  CHECK(masked.probs(0, 0) == 1.0);
  CHECK(masked.probs(0, 1) == 0.0);
  CHECK(masked.probs(1, 0) == 0.5);  // unvisited state keeps its row

  Matrix unsupported(2, 2);
  unsupported << 0.0, 1.0, 0.5, 0.5;
  CHECK_THROWS_AS(mask_to_support(Policy{unsupported}, m), std::invalid_argument);
  CHECK_THROWS_AS(mask_to_support(uniform_policy(3, 2), m), std::invalid_argument);
}
