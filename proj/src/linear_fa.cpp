#include "cql/linear_fa.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "cql/mdp_core.hpp"
#include "cql/rng.hpp"

namespace cql {

namespace {

void check_features(const LinearQModel& fa, const TabularMdp& mdp) {
  if (fa.features.rows() != static_cast<long>(mdp.n_states) * mdp.n_actions)
    throw std::invalid_argument("linear_fa: features must have S*A rows");
  if (fa.features.cols() <= 0)
    throw std::invalid_argument("linear_fa: empty feature matrix");
}

Vector flatten(const Matrix& table, int S, int A) {
  Vector out(S * A);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) out(sa_index(s, a, A)) = table(s, a);
  return out;
}

// Ratio direction u = (pi - behavior)/behavior on the flat index.
Vector ratio_direction(const TabularMdp& mdp, const Policy& behavior,
                       const Policy& pi) {
  const int S = mdp.n_states, A = mdp.n_actions;
  Vector u(S * A);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      double b = behavior.probs(s, a);
      if (b <= 0.0)
        throw std::invalid_argument("linear_fa: behavior support hole at state " +
                                    std::to_string(s));
      u(sa_index(s, a, A)) = (pi.probs(s, a) - b) / b;
    }
  return u;
}

// Solves (F^T D F) x = rhs with a singularity guard on the normal matrix.
Vector solve_normal(const Matrix& f, const Vector& d_diag, const Vector& rhs_vec) {
  Matrix fdf = f.transpose() * d_diag.asDiagonal() * f;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(fdf);
  double lo = eig.eigenvalues().minCoeff();
  double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > 1e12)
    throw std::runtime_error(
        "linear_fa: normal matrix condition above 1e12 (eigenvalues " +
        std::to_string(lo) + " .. " + std::to_string(hi) + ")");
  return fdf.ldlt().solve(rhs_vec);
}

}  // namespace

QTable LinearQModel::q_table(int n_states, int n_actions) const {
  Vector q_flat = features * w;
  QTable out(n_states, n_actions);
  for (int s = 0; s < n_states; ++s)
    for (int a = 0; a < n_actions; ++a)
      out.q(s, a) = q_flat(sa_index(s, a, n_actions));
  return out;
}

Vector sa_distribution(const TabularMdp& mdp, const Policy& behavior) {
  Vector d_state = discounted_state_marginal(mdp, behavior);
  const int S = mdp.n_states, A = mdp.n_actions;
  Vector d(S * A);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a)
      d(sa_index(s, a, A)) = d_state(s) * behavior.probs(s, a);
  return d;
}

LinearQModel lstdq_iterate(const LinearQModel& fa, const TabularMdp& mdp,
                           const Policy& behavior, const Policy& target,
                           const QTable& q_prev) {
  return cql_linear_iterate(fa, mdp, behavior, target, 0.0, q_prev);
}

LinearQModel cql_linear_iterate(const LinearQModel& fa, const TabularMdp& mdp,
                                const Policy& behavior, const Policy& target,
                                double alpha_k, const QTable& q_prev) {
  check_features(fa, mdp);
  const int S = mdp.n_states, A = mdp.n_actions;
  Vector d = sa_distribution(mdp, behavior);
  Vector b = flatten(bellman_policy_op(mdp, target, q_prev).q, S, A);
  Vector rhs = fa.features.transpose() * (d.asDiagonal() * b);
  if (alpha_k != 0.0) {
    Vector d_state = discounted_state_marginal(mdp, behavior);
    Vector pen(S * A);
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a)
        pen(sa_index(s, a, A)) =
            d_state(s) * (target.probs(s, a) - behavior.probs(s, a));
    rhs -= alpha_k * (fa.features.transpose() * pen);
  }
  LinearQModel out = fa;
  out.w = solve_normal(fa.features, d, rhs);
  return out;
}

Vector projection_penalty(const LinearQModel& fa, const TabularMdp& mdp,
                          const Policy& behavior, const Policy& pi) {
  check_features(fa, mdp);
  const int S = mdp.n_states, A = mdp.n_actions;
  Vector d = sa_distribution(mdp, behavior);
  Vector u = ratio_direction(mdp, behavior, pi);
  Vector proj = fa.features * solve_normal(fa.features, d,
                                           fa.features.transpose() *
                                               (d.asDiagonal() * u));
  Vector out(S);
  for (int s = 0; s < S; ++s) {
    double acc = 0.0;
    for (int a = 0; a < A; ++a) acc += pi.probs(s, a) * proj(sa_index(s, a, A));
    out(s) = acc;
  }
  return out;
}

double alpha_threshold_linear(const LinearQModel& fa, const TabularMdp& mdp,
                              const Policy& behavior, const Policy& target,
                              const QTable& q_prev) {
  check_features(fa, mdp);
  const int S = mdp.n_states, A = mdp.n_actions;
  Vector d_state = discounted_state_marginal(mdp, behavior);
  Vector b = flatten(bellman_policy_op(mdp, target, q_prev).q, S, A);
  Vector d = sa_distribution(mdp, behavior);
  Vector proj_b = fa.features * solve_normal(fa.features, d,
                                             fa.features.transpose() *
                                                 (d.asDiagonal() * b));
  // E_d[V_lstd - V] with V(s) = E_target[b(s,.)], V_lstd from the projected fit.
  double num = 0.0;
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a)
      num += d_state(s) * target.probs(s, a) *
             (proj_b(sa_index(s, a, A)) - b(sa_index(s, a, A)));
  Vector f_pi = projection_penalty(fa, mdp, behavior, target);
  double den = d_state.dot(f_pi);
  if (den <= 1e-12) return std::numeric_limits<double>::infinity();
  return std::max(num / den, 0.0);
}

QTable ntk_gradient_step(const LinearQModel& fa, const TabularMdp& mdp,
                         const Policy& behavior, const Policy& target,
                         double alpha_k, double eta, const QTable& q_prev) {
  check_features(fa, mdp);
  const int S = mdp.n_states, A = mdp.n_actions;
  Vector d = sa_distribution(mdp, behavior);
  Vector u = ratio_direction(mdp, behavior, target);
  Vector q = flatten(q_prev.q, S, A);
  Vector b = flatten(bellman_policy_op(mdp, target, q_prev).q, S, A);
  Matrix kernel = fa.features * fa.features.transpose();
  Vector next = q - eta * alpha_k * (kernel * (d.asDiagonal() * u)) +
                eta * (kernel * (d.asDiagonal() * (b - q)));
  QTable out(S, A);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) out.q(s, a) = next(sa_index(s, a, A));
  return out;
}

Matrix random_features(int n_states, int n_actions, int dim, std::uint64_t seed) {
  const int rows = n_states * n_actions;
  if (dim <= 0 || dim > rows)
    throw std::invalid_argument("random_features: need 0 < dim <= S*A");
  Rng rng(seed);
  for (int attempt = 0; attempt < 10; ++attempt) {
    Matrix f(rows, dim);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < dim; ++j) f(i, j) = rng.normal();
    if (Eigen::ColPivHouseholderQR<Matrix>(f).rank() == dim) return f;
  }
  throw std::runtime_error("random_features: rank-deficient after 10 redraws");
}

}  // namespace cql
