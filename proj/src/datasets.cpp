#include "cql/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "cql/rng.hpp"

namespace cql {

namespace {

double sample_reward(const TabularMdp& mdp, int s, int a, const RewardNoise& noise,
                     Rng& rng) {
  double mean = mdp.reward(s, a);
  switch (noise.kind) {
    case RewardNoiseKind::None:
      return mean;
    case RewardNoiseKind::Bernoulli:
      return rng.bernoulli(mean) ? 1.0 : 0.0;
    case RewardNoiseKind::Uniform:
      return mean + rng.uniform(-noise.half_width, noise.half_width);
  }
  return mean;
}

void validate_noise(const TabularMdp& mdp, const RewardNoise& noise) {
  if (noise.kind == RewardNoiseKind::Bernoulli) {
    if (mdp.r_max < 1.0)
      throw std::invalid_argument("sample_dataset: Bernoulli rewards need r_max >= 1");
    if (mdp.reward.minCoeff() < 0.0 || mdp.reward.maxCoeff() > 1.0)
      throw std::invalid_argument(
          "sample_dataset: Bernoulli rewards need means in [0, 1]");
  } else if (noise.kind == RewardNoiseKind::Uniform) {
    if (noise.half_width < 0.0)
      throw std::invalid_argument("sample_dataset: negative noise half_width");
    if (mdp.reward.cwiseAbs().maxCoeff() + noise.half_width > mdp.r_max + 1e-12)
      throw std::invalid_argument(
          "sample_dataset: uniform noise can exceed r_max");
  }
}

}  // namespace

TransitionDataset sample_dataset(const TabularMdp& mdp, const Policy& behavior,
                                 int n_transitions, int horizon,
                                 std::uint64_t seed, const RewardNoise& noise) {
  if (n_transitions <= 0 || horizon <= 0)
    throw std::invalid_argument("sample_dataset: need positive n_transitions and horizon");
  if (behavior.n_states() != mdp.n_states || behavior.n_actions() != mdp.n_actions)
    throw std::invalid_argument("sample_dataset: behavior shape mismatch");
  validate_noise(mdp, noise);
  const int A = mdp.n_actions;
  Rng rng(seed);
  TransitionDataset out;
  out.tuples.reserve(n_transitions);
  out.source_mdp_id = mdp.id;
  out.rng_seed = seed;
  int s = -1, t = 0;
  while (static_cast<int>(out.tuples.size()) < n_transitions) {
    if (s < 0 || t >= horizon) {
      s = rng.categorical(mdp.initial_dist, mdp.n_states);
      t = 0;
    }
    int a = rng.categorical(behavior.probs.row(s), A);
    double r = sample_reward(mdp, s, a, noise, rng);
    int s2 = rng.categorical(mdp.transition.row(sa_index(s, a, A)), mdp.n_states);
    out.tuples.push_back({s, a, r, s2});
    s = s2;
    ++t;
  }
  return out;
}

EmpiricalModel build_empirical_model(const TransitionDataset& data,
                                     const MdpShape& shape, double sentinel) {
  const int S = shape.n_states, A = shape.n_actions;
  if (S <= 0 || A <= 0 || !(shape.gamma > 0.0 && shape.gamma < 1.0) ||
      !(shape.r_max > 0.0))
    throw std::invalid_argument("build_empirical_model: malformed shape");
  double default_sentinel = value_clamp_limit(shape.r_max, shape.gamma);
  if (sentinel <= 0.0) sentinel = default_sentinel;
  if (sentinel < default_sentinel - 1e-12)
    throw std::invalid_argument(
        "build_empirical_model: sentinel below 2 r_max / (1 - gamma)");

  EmpiricalModel m;
  m.shape = shape;
  m.sentinel = sentinel;
  m.counts = Matrix::Zero(S, A);
  m.state_counts = Vector::Zero(S);
  m.r_hat = Matrix::Zero(S, A);
  m.t_hat = Matrix::Zero(S * A, S);
  for (const Transition& tr : data.tuples) {
    if (tr.s < 0 || tr.s >= S || tr.a < 0 || tr.a >= A || tr.s_next < 0 ||
        tr.s_next >= S)
      throw std::invalid_argument("build_empirical_model: tuple outside shape");
    if (std::abs(tr.r) > shape.r_max + 1e-12)
      throw std::invalid_argument("build_empirical_model: |r| above r_max");
    m.counts(tr.s, tr.a) += 1.0;
    m.state_counts(tr.s) += 1.0;
    m.r_hat(tr.s, tr.a) += tr.r;
    m.t_hat(sa_index(tr.s, tr.a, A), tr.s_next) += 1.0;
  }
  Matrix pb = Matrix::Zero(S, A);
  m.inv_sqrt_counts = Matrix::Constant(S, A, sentinel);
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) {
      double n = m.counts(s, a);
      int row = sa_index(s, a, A);
      if (n > 0.0) {
        m.r_hat(s, a) /= n;
        m.t_hat.row(row) /= n;
        m.inv_sqrt_counts(s, a) = 1.0 / std::sqrt(n);
      } else {
        m.r_hat(s, a) = 0.0;
        m.t_hat(row, s) = 1.0;
        m.unvisited_pairs.emplace_back(s, a);
      }
    }
    if (m.state_counts(s) > 0.0) {
      pb.row(s) = m.counts.row(s) / m.state_counts(s);
    } else {
      pb.row(s).setConstant(1.0 / A);
      m.unvisited_states.push_back(s);
    }
  }
  m.pi_beta_hat = Policy(std::move(pb));
  return m;
}

QTable empirical_bellman_policy_op(const EmpiricalModel& model, const Policy& pi,
                                   const QTable& q) {
  const int S = model.shape.n_states, A = model.shape.n_actions;
  if (pi.n_states() != S || pi.n_actions() != A || q.q.rows() != S || q.q.cols() != A)
    throw std::invalid_argument("empirical_bellman_policy_op: shape mismatch");
  double floor = -value_clamp_limit(model.shape.r_max, model.shape.gamma);
  Vector v = (q.q.array() * pi.probs.array()).rowwise().sum();
  Vector next = model.t_hat * v;
  QTable out(S, A);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a)
      out.q(s, a) = model.visited(s, a)
                        ? model.r_hat(s, a) + model.shape.gamma * next(sa_index(s, a, A))
                        : floor;
  return out;
}

QTable empirical_bellman_optimality_op(const EmpiricalModel& model, const QTable& q) {
  const int S = model.shape.n_states, A = model.shape.n_actions;
  if (q.q.rows() != S || q.q.cols() != A)
    throw std::invalid_argument("empirical_bellman_optimality_op: shape mismatch");
  double floor = -value_clamp_limit(model.shape.r_max, model.shape.gamma);
  Vector v = q.q.rowwise().maxCoeff();
  Vector next = model.t_hat * v;
  QTable out(S, A);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a)
      out.q(s, a) = model.visited(s, a)
                        ? model.r_hat(s, a) + model.shape.gamma * next(sa_index(s, a, A))
                        : floor;
  return out;
}

double composite_concentration(const ConcentrationConfig& cfg, double gamma,
                               double r_max) {
  return cfg.c_r + gamma * cfg.c_t * 2.0 * r_max / (1.0 - gamma);
}

Matrix overestimation_bound(const EmpiricalModel& model,
                            const ConcentrationConfig& cfg, double gamma,
                            double r_max) {
  const int S = model.shape.n_states, A = model.shape.n_actions;
  double composite = composite_concentration(cfg, gamma, r_max);
  Matrix b(S, A);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a)
      b(s, a) = model.visited(s, a) ? composite * model.inv_sqrt_counts(s, a)
                                    : model.sentinel;
  return b;
}

ConcentrationConfig estimate_concentration(const TabularMdp& mdp,
                                           const Policy& behavior,
                                           int n_transitions, int horizon,
                                           int n_datasets, double delta,
                                           std::uint64_t seed,
                                           const RewardNoise& noise) {
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("estimate_concentration: delta outside (0, 1)");
  int order = static_cast<int>(std::ceil((1.0 - delta) * (n_datasets + 1)));
  if (order > n_datasets)
    throw std::invalid_argument(
        "estimate_concentration: need n_datasets >= ceil((1-delta)/delta)");
  const int A = mdp.n_actions;
  std::vector<double> worst_r(n_datasets), worst_t(n_datasets);
  MdpShape shape = shape_of(mdp);
  for (int k = 0; k < n_datasets; ++k) {
    TransitionDataset d =
        sample_dataset(mdp, behavior, n_transitions, horizon, seed + k, noise);
    EmpiricalModel m = build_empirical_model(d, shape);
    double wr = 0.0, wt = 0.0;
    for (int s = 0; s < mdp.n_states; ++s)
      for (int a = 0; a < A; ++a) {
        if (!m.visited(s, a)) continue;
        double root_n = std::sqrt(m.counts(s, a));
        wr = std::max(wr, root_n * std::abs(m.r_hat(s, a) - mdp.reward(s, a)));
        int row = sa_index(s, a, A);
        double l1 = (m.t_hat.row(row) - mdp.transition.row(row)).cwiseAbs().sum();
        wt = std::max(wt, root_n * l1);
      }
    worst_r[k] = wr;
    worst_t[k] = wt;
  }
  std::sort(worst_r.begin(), worst_r.end());
  std::sort(worst_t.begin(), worst_t.end());
  ConcentrationConfig cfg;
  cfg.c_r = worst_r[order - 1];
  cfg.c_t = worst_t[order - 1];
  cfg.delta = delta;
  return cfg;
}

TabularMdp empirical_mdp(const EmpiricalModel& model, const Vector& initial_dist,
                         const std::string& id) {
  const int S = model.shape.n_states, A = model.shape.n_actions;
  Matrix t = model.t_hat;
  Matrix r = model.r_hat;
  for (const auto& [s, a] : model.unvisited_pairs) {
    int row = sa_index(s, a, A);
    t.row(row).setZero();
    t(row, s) = 1.0;
    r(s, a) = 0.0;
  }
  return TabularMdp(S, A, std::move(t), std::move(r), model.shape.gamma,
                    initial_dist, model.shape.r_max, id);
}

Policy mask_to_support(const Policy& pi, const EmpiricalModel& model) {
  const int S = model.shape.n_states, A = model.shape.n_actions;
  if (pi.n_states() != S || pi.n_actions() != A)
    throw std::invalid_argument("mask_to_support: shape mismatch");
  Matrix probs = pi.probs;
  for (int s = 0; s < S; ++s) {
    if (!model.visited_state(s)) continue;
    double mass = 0.0;
    for (int a = 0; a < A; ++a) {
      if (!model.visited(s, a)) probs(s, a) = 0.0;
      mass += probs(s, a);
    }
    if (mass <= 0.0)
      throw std::invalid_argument("mask_to_support: no supported mass at state " +
                                  std::to_string(s));
    probs.row(s) /= mass;
  }
  return Policy(std::move(probs));
}

}  // namespace cql
