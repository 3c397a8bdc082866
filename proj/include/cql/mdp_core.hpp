#pragma once

#include "cql/types.hpp"

namespace cql {

// State-to-state transition matrix under pi: P(s' | s) = sum_a pi(a|s) T(s,a,s').
Matrix state_transition_matrix(const TabularMdp& mdp, const Policy& pi);

// State-action transition matrix under pi: P(s',a' | s,a) = T(s,a,s') pi(a'|s').
Matrix sa_transition_matrix(const TabularMdp& mdp, const Policy& pi);

// (B^pi Q)(s,a) = r(s,a) + gamma * E_{s'}[ E_{a' ~ pi}[ Q(s',a') ] ].
QTable bellman_policy_op(const TabularMdp& mdp, const Policy& pi, const QTable& q);

// (B* Q)(s,a) = r(s,a) + gamma * E_{s'}[ max_{a'} Q(s',a') ].
QTable bellman_optimality_op(const TabularMdp& mdp, const QTable& q);

// Q^pi as the solution of (I - gamma P^pi) q = r, with an iterative fallback
// when the direct solve leaves a residual above 1e-9.
QTable exact_q(const TabularMdp& mdp, const Policy& pi);

// V^pi(s) = E_{a ~ pi}[ Q^pi(s,a) ].
ValueTable policy_value(const TabularMdp& mdp, const Policy& pi);

// E_{a ~ pi}[ q(s,a) ] for an arbitrary table, per state.
ValueTable value_from_q(const QTable& q, const Policy& pi);

// J(pi) = initial_dist . V^pi  (undiscounted by any extra normalization).
double return_j(const TabularMdp& mdp, const Policy& pi);

// d^pi(s) = (1 - gamma) * sum_t gamma^t Pr(s_t = s); sums to 1 within 1e-9.
Vector discounted_state_marginal(const TabularMdp& mdp, const Policy& pi);

// Row-wise softmax of q / temperature with max subtraction; temperature must
// be positive.
Policy soft_policy_from_q(const QTable& q, double temperature);

// Deterministic argmax policy; ties resolve to the lowest action index.
Policy greedy_policy_from_q(const QTable& q);

// Per-state total variation, 1/2 * sum_a |p(a|s) - q(a|s)|.
Vector total_variation(const Policy& p, const Policy& q);

}  // namespace cql
