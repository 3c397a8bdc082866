#include "cql/generators.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

namespace cql {

TabularMdp chain2() {
  Matrix t(4, 2);
  t << 1, 0,  // (s0, stay)
      0, 1,   // (s0, switch)
      0, 1,   // (s1, stay)
      1, 0;   // (s1, switch)
  Matrix r(2, 2);
  r << 0, 0, 1, 1;
  Vector rho0(2);
  rho0 << 1, 0;
  return TabularMdp(2, 2, t, r, 0.9, rho0, 1.0, "chain2");
}

TabularMdp chain2_bernoulli() {
  TabularMdp m = chain2();
  m.reward << 0.2, 0.4, 0.9, 0.7;
  m.id = "chain2-bernoulli";
  m.validate();
  return m;
}

TabularMdp gridworld(const GridworldSpec& spec) {
  const int w = spec.width, h = spec.height;
  if (w < 2 || h < 2) throw std::invalid_argument("gridworld: need at least 2x2");
  if (!(spec.slip >= 0.0 && spec.slip < 1.0))
    throw std::invalid_argument("gridworld: slip must lie in [0, 1)");
  const int S = w * h, A = 4;
  auto idx = [w](int x, int y) { return y * w + x; };
  const int dx[4] = {0, 0, -1, 1};  // up, down, left, right
  const int dy[4] = {-1, 1, 0, 0};
  Matrix t = Matrix::Zero(S * A, S);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      int s = idx(x, y);
      for (int a = 0; a < A; ++a)
        for (int a2 = 0; a2 < A; ++a2) {
          double p = (a2 == a) ? 1.0 - spec.slip : spec.slip / 3.0;
          int nx = std::clamp(x + dx[a2], 0, w - 1);
          int ny = std::clamp(y + dy[a2], 0, h - 1);
          t(sa_index(s, a, A), idx(nx, ny)) += p;
        }
    }
  Matrix r = Matrix::Zero(S, A);
  r.row(S - 1).setConstant(spec.goal_reward);
  Vector rho0 = Vector::Zero(S);
  rho0(0) = 1.0;
  std::string id = "gridworld-" + std::to_string(w) + "x" + std::to_string(h);
  return TabularMdp(S, A, t, r, spec.gamma, rho0, 1.0, id);
}

TabularMdp random_mdp(const RandomMdpSpec& spec, std::uint64_t seed) {
  const int S = spec.n_states, A = spec.n_actions;
  if (S <= 0 || A <= 0) throw std::invalid_argument("random_mdp: bad shape");
  int branching = spec.branching <= 0 ? S : std::min(spec.branching, S);
  if (std::abs(spec.reward_lo) > spec.r_max + 1e-12 ||
      std::abs(spec.reward_hi) > spec.r_max + 1e-12 ||
      spec.reward_lo > spec.reward_hi)
    throw std::invalid_argument("random_mdp: reward range outside [-r_max, r_max]");
  Rng rng(seed);
  Matrix t = Matrix::Zero(S * A, S);
  std::vector<int> succ(S);
  for (int row = 0; row < S * A; ++row) {
    for (int s = 0; s < S; ++s) succ[s] = s;
    // Partial Fisher-Yates picks `branching` distinct successors.
    for (int i = 0; i < branching; ++i) {
      int j = i + static_cast<int>(rng.uniform() * (S - i));
      if (j >= S) j = S - 1;
      std::swap(succ[i], succ[j]);
    }
    std::vector<double> row_probs = rng.dirichlet(branching, spec.dirichlet_concentration);
    for (int i = 0; i < branching; ++i) t(row, succ[i]) = row_probs[i];
  }
  Matrix r(S, A);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) r(s, a) = rng.uniform(spec.reward_lo, spec.reward_hi);
  Vector rho0;
  if (spec.uniform_initial) {
    rho0 = Vector::Constant(S, 1.0 / S);
  } else {
    std::vector<double> d = rng.dirichlet(S, 1.0);
    rho0 = Eigen::Map<Vector>(d.data(), S);
  }
  std::string id = "random-" + std::to_string(S) + "x" + std::to_string(A) + "-seed" +
                   std::to_string(seed);
  return TabularMdp(S, A, t, r, spec.gamma, rho0, spec.r_max, id);
}

Policy random_policy(int n_states, int n_actions, Rng& rng, double concentration) {
  Matrix probs(n_states, n_actions);
  for (int s = 0; s < n_states; ++s) {
    std::vector<double> row = rng.dirichlet(n_actions, concentration);
    for (int a = 0; a < n_actions; ++a) probs(s, a) = row[a];
  }
  return Policy(std::move(probs));
}

}  // namespace cql
