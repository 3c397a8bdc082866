#pragma once

#include <cstdint>

#include "cql/types.hpp"

namespace cql {

// Q(s,a) = features.row(sa_index(s,a)) . w
struct LinearQModel {
  Matrix features;  // (S*A) x d
  Vector w;         // d

  QTable q_table(int n_states, int n_actions) const;
};

// Data distribution the projected objectives weight by: D(sa) =
// d^behavior(s) * behavior(a|s), computed exactly from the MDP.
Vector sa_distribution(const TabularMdp& mdp, const Policy& behavior);

// w solving the D-weighted least squares fit of B^target q_prev; the iterate
// of least-squares temporal difference policy evaluation.
LinearQModel lstdq_iterate(const LinearQModel& fa, const TabularMdp& mdp,
                           const Policy& behavior, const Policy& target,
                           const QTable& q_prev);

// Penalized fit: (F^T D F) w = F^T D (B^target q_prev)
//                - alpha_k F^T [ d^behavior(s) (target - behavior)(a|s) ].
LinearQModel cql_linear_iterate(const LinearQModel& fa, const TabularMdp& mdp,
                                const Policy& behavior, const Policy& target,
                                double alpha_k, const QTable& q_prev);

// Per-state value of the projected ratio penalty:
// f(pi)(s) = pi(.|s)^T [ P_F u ](s,.), with u = (pi - behavior)/behavior and
// P_F = F (F^T D F)^{-1} F^T D the D-weighted projection onto the feature
// span. Sign-indefinite for proper feature subspaces; see the tests.
Vector projection_penalty(const LinearQModel& fa, const TabularMdp& mdp,
                          const Policy& behavior, const Policy& pi);

// Smallest alpha making the D-weighted average of the penalized value iterate
// sit below the unpenalized one:
//   alpha = max( E_d[V_lstd - V^{k+1}] / E_d[f(pi)], 0 ).
// Returns +infinity when the penalty average E_d[f(pi)] is not positive: no
// nonnegative alpha can push the fit down through a penalty pointing the
// wrong way.
double alpha_threshold_linear(const LinearQModel& fa, const TabularMdp& mdp,
                              const Policy& behavior, const Policy& target,
                              const QTable& q_prev);

// One step of penalized semi-gradient descent in function space with the
// neural-tangent-style kernel M = F F^T:
//   q <- q - eta alpha M D u + eta M D (B^target q - q).
QTable ntk_gradient_step(const LinearQModel& fa, const TabularMdp& mdp,
                         const Policy& behavior, const Policy& target,
                         double alpha_k, double eta, const QTable& q_prev);

// Standard-normal feature matrix, redrawn (bounded retries) until full column
// rank.
Matrix random_features(int n_states, int n_actions, int dim, std::uint64_t seed);

}  // namespace cql
