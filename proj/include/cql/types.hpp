#pragma once

#include <Eigen/Dense>
#include <string>

namespace cql {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Flat state-action index used everywhere: row(s, a) = s * n_actions + a.
inline int sa_index(int s, int a, int n_actions) { return s * n_actions + a; }

struct TabularMdp {
  int n_states = 0;
  int n_actions = 0;
  // transition is (n_states * n_actions) x n_states; row sa gives P(. | s, a).
  Matrix transition;
  // reward is n_states x n_actions; entries are expected rewards in [-r_max, r_max].
  Matrix reward;
  double gamma = 0.0;
  Vector initial_dist;
  double r_max = 1.0;
  std::string id;

  TabularMdp() = default;
  TabularMdp(int states, int actions, Matrix t, Matrix r, double g, Vector rho0,
             double rmax, std::string mdp_id = "");

  // Throws std::invalid_argument on any malformed field: non-stochastic rows,
  // rewards outside [-r_max, r_max], gamma outside (0, 1), bad initial_dist.
  void validate() const;
};

struct Policy {
  Matrix probs;  // n_states x n_actions, rows on the simplex

  Policy() = default;
  explicit Policy(Matrix p);

  int n_states() const { return static_cast<int>(probs.rows()); }
  int n_actions() const { return static_cast<int>(probs.cols()); }
  void validate() const;
};

struct QTable {
  Matrix q;  // n_states x n_actions

  QTable() = default;
  explicit QTable(Matrix m) : q(std::move(m)) {}
  QTable(int n_states, int n_actions) : q(Matrix::Zero(n_states, n_actions)) {}
};

struct ValueTable {
  Vector v;  // n_states

  ValueTable() = default;
  explicit ValueTable(Vector x) : v(std::move(x)) {}
};

Policy uniform_policy(int n_states, int n_actions);

// Largest magnitude any value iterate can legitimately reach, used as the
// optional clamp range and as the pessimistic floor for unvisited pairs.
inline double value_clamp_limit(double r_max, double gamma) {
  return 2.0 * r_max / (1.0 - gamma);
}

QTable clamp_q(const QTable& q, double r_max, double gamma);

}  // namespace cql
