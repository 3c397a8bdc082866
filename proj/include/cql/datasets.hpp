#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cql/types.hpp"

namespace cql {

struct Transition {
  int s = 0;
  int a = 0;
  double r = 0.0;
  int s_next = 0;
};

struct TransitionDataset {
  std::vector<Transition> tuples;
  std::string source_mdp_id;
  std::uint64_t rng_seed = 0;
};

struct MdpShape {
  int n_states = 0;
  int n_actions = 0;
  double gamma = 0.0;
  double r_max = 1.0;
};

inline MdpShape shape_of(const TabularMdp& mdp) {
  return {mdp.n_states, mdp.n_actions, mdp.gamma, mdp.r_max};
}

enum class RewardNoiseKind { None, Bernoulli, Uniform };

// Reward sampling model. None records expected rewards directly. Bernoulli
// treats reward(s,a) as the success probability of a 0/1 payout (requires
// rewards in [0,1] and r_max >= 1). Uniform adds U(-half_width, half_width)
// and requires |reward| + half_width <= r_max.
struct RewardNoise {
  RewardNoiseKind kind = RewardNoiseKind::None;
  double half_width = 0.0;
};

// Rolls trajectories: start ~ initial_dist, actions ~ behavior, episode is cut
// at `horizon` steps, restarts until n_transitions tuples are collected.
TransitionDataset sample_dataset(const TabularMdp& mdp, const Policy& behavior,
                                 int n_transitions, int horizon,
                                 std::uint64_t seed,
                                 const RewardNoise& noise = {});

struct EmpiricalModel {
  MdpShape shape;
  Matrix counts;         // S x A
  Vector state_counts;   // S
  Matrix r_hat;          // S x A; 0 at unvisited pairs
  Matrix t_hat;          // (S*A) x S; unvisited pairs are self-loops
  Policy pi_beta_hat;    // counts(s,a)/n(s); uniform at unvisited states
  Matrix inv_sqrt_counts;  // 1/sqrt(n(s,a)); `sentinel` at zero counts
  double sentinel = 0.0;
  std::vector<int> unvisited_states;
  std::vector<std::pair<int, int>> unvisited_pairs;

  bool visited(int s, int a) const { return counts(s, a) > 0.0; }
  bool visited_state(int s) const { return state_counts(s) > 0.0; }
};

// Maximum-likelihood estimates from counts. sentinel <= 0 selects the default
// 2 r_max / (1 - gamma); anything smaller than that is rejected.
EmpiricalModel build_empirical_model(const TransitionDataset& data,
                                     const MdpShape& shape,
                                     double sentinel = 0.0);

// (B-hat^pi q)(s,a) = r_hat + gamma E_{t_hat}[E_pi q] at visited pairs; the
// pessimistic floor -2 r_max/(1-gamma) at unvisited ones.
QTable empirical_bellman_policy_op(const EmpiricalModel& model, const Policy& pi,
                                   const QTable& q);

// Optimality-backup analogue with the same unvisited floor.
QTable empirical_bellman_optimality_op(const EmpiricalModel& model, const QTable& q);

// High-probability deviation scales for the empirical model.
struct ConcentrationConfig {
  double c_r = 0.0;     // reward scale: |r_hat - r| <= c_r / sqrt(n)
  double c_t = 0.0;     // transition scale: ||t_hat - t||_1 <= c_t / sqrt(n)
  double delta = 0.1;   // failure probability both scales are calibrated at
};

// Combined reward-plus-transition deviation scale propagated through one
// backup: c_r + gamma * c_t * 2 r_max / (1 - gamma).
double composite_concentration(const ConcentrationConfig& cfg, double gamma,
                               double r_max);

// Per-pair bound on |B-hat Q - B Q|: composite / sqrt(n(s,a)) at visited
// pairs, the model sentinel at unvisited ones.
Matrix overestimation_bound(const EmpiricalModel& model,
                            const ConcentrationConfig& cfg, double gamma,
                            double r_max);

// Conformal calibration of c_r and c_t: draws n_datasets fresh datasets from
// the true MDP, records the worst sqrt(n)-scaled deviation per dataset, and
// returns the ceil((1-delta)(K+1))-th order statistic. Needs
// n_datasets >= ceil(1/delta) so that the order statistic exists.
ConcentrationConfig estimate_concentration(const TabularMdp& mdp,
                                           const Policy& behavior,
                                           int n_transitions, int horizon,
                                           int n_datasets, double delta,
                                           std::uint64_t seed,
                                           const RewardNoise& noise = {});

// Empirical MDP induced by the model: estimated dynamics and rewards at
// visited pairs, absorbing zero-reward self-loops at unvisited ones.
TabularMdp empirical_mdp(const EmpiricalModel& model, const Vector& initial_dist,
                         const std::string& id = "empirical");

// Restricts pi to the empirically supported actions at visited states and
// renormalizes. Unvisited states keep the original row. Errors if some
// visited state has zero mass left.
Policy mask_to_support(const Policy& pi, const EmpiricalModel& model);

}  // namespace cql
