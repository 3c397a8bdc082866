#pragma once

#include <vector>

#include "cql/cql_eval.hpp"
#include "cql/datasets.hpp"
#include "cql/types.hpp"

namespace cql {

// Per-state comparison of the behavior-vs-mu value split between penalized
// and plain iterates. lhs(s) = (beta - mu) . Qhat^{k+1}(s,.), rhs(s) the same
// under the unpenalized iterate; the penalized split must be strictly wider.
struct GapReport {
  Vector lhs;
  Vector rhs;
  Vector delta_hat;        // sum_a (mu - beta)^2 / beta per state
  Vector alpha_required;   // smallest alpha widening the split; 0 where vacuous
  std::vector<bool> vacuous;  // delta_hat == 0 (mu matches behavior)
  bool holds = false;         // lhs - rhs > 1e-12 at every nonvacuous state
};

// One penalized iterate from q_hat_k vs one plain iterate from q_k, both
// backed up under backup_policy (softmax of q_hat_k at temperature 1 when
// omitted, the learning iteration's actor target).
GapReport gap_expanding_check(const TabularMdp& mdp, const Policy& behavior,
                              const QTable& q_hat_k, const QTable& q_k,
                              const Policy& mu_k, double alpha_k,
                              const Policy* backup_policy = nullptr);

// Loose sufficient alpha that avoids the unknown plain iterate: bounds its
// contribution via |B q| <= r_max/(1-gamma) and an L1 Hoelder step, leaving
// only computable quantities.
Vector worst_case_alpha(const TabularMdp& mdp, const Policy& behavior,
                        const QTable& q_hat_k, const Policy& mu_k,
                        const Policy* backup_policy = nullptr);

struct ObjectiveEquivalenceReport {
  Policy argmax_lhs;
  Policy argmax_rhs;
  bool match = false;
  double max_pointwise_diff = 0.0;
  double lhs_best = 0.0;
  double rhs_best = 0.0;
  // Top two objective values are closer than numeric slack, so the argmax
  // comparison is not informative at this grid resolution.
  bool grid_ambiguous = false;
  long n_grid = 0;
};

// Enumerates a per-state simplex grid (2 actions, at most 3 states) and
// evaluates both forms of the penalized objective at every grid policy:
// lhs = rho0 . V-hat (penalized fixed point with mu = pi), rhs = the model
// return minus alpha/(1-gamma) times the marginal-weighted penalty mass.
ObjectiveEquivalenceReport objective_equivalence_check(
    const TabularMdp& mdp_hat, const Policy& pi_beta_hat, double alpha,
    const Vector& rho0, double policy_grid_resolution = 0.05);

struct SafeImprovementReport {
  double zeta = 0.0;
  double sampling_term = 0.0;
  double improvement_term = 0.0;  // model return of pi_star minus behavior's
  double j_pi_star_m = 0.0;
  double j_beta_m = 0.0;
  double j_pi_star_hat = 0.0;
  double j_beta_hat = 0.0;
  bool holds = false;  // j_pi_star_m >= j_beta_m - zeta
  // One-policy deviation bounds |J(pi, model) - J(pi, true)| for each policy.
  double per_policy_bound_pi_star = 0.0;
  double per_policy_bound_beta = 0.0;
  int sentinel_states = 0;  // unvisited states carrying marginal mass
  double alpha = 0.0;
};

SafeImprovementReport zeta_bound(const TabularMdp& mdp, const EmpiricalModel& model,
                                 const Policy& pi_star,
                                 const ConcentrationConfig& cfg, double alpha);

struct NuNecessityResult {
  double min_penalty = 0.0;
  Policy witness;
  Vector per_state;
};

// Evaluates the penalty term E_pi[(pi - nu)/pi_beta] at the adversarial
// policy pi = (nu + pi_beta)/2, per state. The minimum is 0 exactly when
// nu = pi_beta and strictly negative otherwise, which is why the maximizing
// distribution must be the behavior estimate for the value bound to survive.
NuNecessityResult nu_necessity_search(const Policy& pi_beta_hat, const Policy& nu);

}  // namespace cql
