#include "cql/mdp_core.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace cql {

namespace {

Vector flatten_rewards(const TabularMdp& mdp) {
  const int S = mdp.n_states, A = mdp.n_actions;
  Vector r(S * A);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) r(sa_index(s, a, A)) = mdp.reward(s, a);
  return r;
}

QTable unflatten(const Vector& q_flat, int S, int A) {
  QTable out(S, A);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) out.q(s, a) = q_flat(sa_index(s, a, A));
  return out;
}

void check_shapes(const TabularMdp& mdp, const Policy& pi) {
  if (pi.n_states() != mdp.n_states || pi.n_actions() != mdp.n_actions)
    throw std::invalid_argument("policy shape does not match MDP");
}

}  // namespace

Matrix state_transition_matrix(const TabularMdp& mdp, const Policy& pi) {
  check_shapes(mdp, pi);
  const int S = mdp.n_states, A = mdp.n_actions;
  Matrix p = Matrix::Zero(S, S);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a)
      p.row(s) += pi.probs(s, a) * mdp.transition.row(sa_index(s, a, A));
  return p;
}

Matrix sa_transition_matrix(const TabularMdp& mdp, const Policy& pi) {
  check_shapes(mdp, pi);
  const int S = mdp.n_states, A = mdp.n_actions;
  Matrix p = Matrix::Zero(S * A, S * A);
  for (int row = 0; row < S * A; ++row)
    for (int s2 = 0; s2 < S; ++s2) {
      double t = mdp.transition(row, s2);
      if (t == 0.0) continue;
      for (int a2 = 0; a2 < A; ++a2)
        p(row, sa_index(s2, a2, A)) = t * pi.probs(s2, a2);
    }
  return p;
}

QTable bellman_policy_op(const TabularMdp& mdp, const Policy& pi, const QTable& q) {
  check_shapes(mdp, pi);
  const int S = mdp.n_states, A = mdp.n_actions;
  if (q.q.rows() != S || q.q.cols() != A)
    throw std::invalid_argument("q table shape does not match MDP");
  Vector v = (q.q.array() * pi.probs.array()).rowwise().sum();
  Vector next = mdp.transition * v;  // length S*A
  QTable out(S, A);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a)
      out.q(s, a) = mdp.reward(s, a) + mdp.gamma * next(sa_index(s, a, A));
  return out;
}

QTable bellman_optimality_op(const TabularMdp& mdp, const QTable& q) {
  const int S = mdp.n_states, A = mdp.n_actions;
  if (q.q.rows() != S || q.q.cols() != A)
    throw std::invalid_argument("q table shape does not match MDP");
  Vector v = q.q.rowwise().maxCoeff();
  Vector next = mdp.transition * v;
  QTable out(S, A);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a)
      out.q(s, a) = mdp.reward(s, a) + mdp.gamma * next(sa_index(s, a, A));
  return out;
}

QTable exact_q(const TabularMdp& mdp, const Policy& pi) {
  const int S = mdp.n_states, A = mdp.n_actions;
  Matrix p = sa_transition_matrix(mdp, pi);
  Vector r = flatten_rewards(mdp);
  Matrix lhs = Matrix::Identity(S * A, S * A) - mdp.gamma * p;
  Vector q_flat = lhs.partialPivLu().solve(r);
  double residual = (lhs * q_flat - r).cwiseAbs().maxCoeff();
  if (residual > 1e-9) {
    // Ill-conditioned solve: fall back to plain policy evaluation sweeps.
    q_flat.setZero();
    for (long sweep = 0; sweep < 1000000; ++sweep) {
      Vector next = r + mdp.gamma * (p * q_flat);
      double delta = (next - q_flat).cwiseAbs().maxCoeff();
      q_flat = next;
      if (delta <= 1e-12) break;
    }
    residual = (lhs * q_flat - r).cwiseAbs().maxCoeff();
    if (residual > 1e-9)
      throw std::runtime_error("exact_q: residual " + std::to_string(residual) +
                               " above 1e-9 after fallback sweeps");
  }
  return unflatten(q_flat, S, A);
}

ValueTable policy_value(const TabularMdp& mdp, const Policy& pi) {
  return value_from_q(exact_q(mdp, pi), pi);
}

ValueTable value_from_q(const QTable& q, const Policy& pi) {
  if (q.q.rows() != pi.probs.rows() || q.q.cols() != pi.probs.cols())
    throw std::invalid_argument("value_from_q: shape mismatch");
  return ValueTable((q.q.array() * pi.probs.array()).rowwise().sum());
}

double return_j(const TabularMdp& mdp, const Policy& pi) {
  return mdp.initial_dist.dot(policy_value(mdp, pi).v);
}

Vector discounted_state_marginal(const TabularMdp& mdp, const Policy& pi) {
  const int S = mdp.n_states;
  Matrix p = state_transition_matrix(mdp, pi);
  Matrix lhs = Matrix::Identity(S, S) - mdp.gamma * p.transpose();
  Vector occ = lhs.partialPivLu().solve(mdp.initial_dist);
  Vector d = (1.0 - mdp.gamma) * occ;
  for (int s = 0; s < S; ++s) {
    if (d(s) < 0.0) {
      if (d(s) < -1e-9)
        throw std::runtime_error("discounted_state_marginal: negative mass at state " +
                                 std::to_string(s));
      d(s) = 0.0;
    }
  }
  if (std::abs(d.sum() - 1.0) > 1e-9)
    throw std::runtime_error("discounted_state_marginal: mass sums to " +
                             std::to_string(d.sum()));
  return d;
}

Policy soft_policy_from_q(const QTable& q, double temperature) {
  if (!(temperature > 0.0))
    throw std::invalid_argument("soft_policy_from_q: temperature must be positive");
  const int S = static_cast<int>(q.q.rows()), A = static_cast<int>(q.q.cols());
  Matrix probs(S, A);
  for (int s = 0; s < S; ++s) {
    double m = q.q.row(s).maxCoeff();
    Eigen::RowVectorXd e = ((q.q.row(s).array() - m) / temperature).exp();
    probs.row(s) = e / e.sum();
  }
  return Policy(std::move(probs));
}

Policy greedy_policy_from_q(const QTable& q) {
  const int S = static_cast<int>(q.q.rows()), A = static_cast<int>(q.q.cols());
  Matrix probs = Matrix::Zero(S, A);
  for (int s = 0; s < S; ++s) {
    int best = 0;
    for (int a = 1; a < A; ++a)
      if (q.q(s, a) > q.q(s, best)) best = a;
    probs(s, best) = 1.0;
  }
  return Policy(std::move(probs));
}

Vector total_variation(const Policy& p, const Policy& q) {
  if (p.probs.rows() != q.probs.rows() || p.probs.cols() != q.probs.cols())
    throw std::invalid_argument("total_variation: shape mismatch");
  return 0.5 * (p.probs - q.probs).cwiseAbs().rowwise().sum();
}

}  // namespace cql
