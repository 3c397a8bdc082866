#include "cql/analysis.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "cql/mdp_core.hpp"

namespace cql {

namespace {

constexpr double kVacuousTol = 1e-15;
constexpr double kStrictSlack = 1e-12;

Matrix ratio_penalty(const Policy& mu, const Policy& beta) {
  const int S = mu.n_states(), A = mu.n_actions();
  Matrix pen(S, A);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      double b = beta.probs(s, a);
      if (b <= 0.0) {
        if (mu.probs(s, a) > 0.0)
          throw std::invalid_argument("gap_expanding_check: support violation");
        pen(s, a) = 0.0;
      } else {
        pen(s, a) = (mu.probs(s, a) - b) / b;
      }
    }
  return pen;
}

Vector delta_hat_of(const Policy& mu, const Policy& beta) {
  const int S = mu.n_states(), A = mu.n_actions();
  Vector d = Vector::Zero(S);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      double b = beta.probs(s, a);
      double diff = mu.probs(s, a) - b;
      if (b <= 0.0) {
        if (std::abs(diff) > 0.0)
          throw std::invalid_argument("gap_expanding_check: support violation");
        continue;
      }
      d(s) += diff * diff / b;
    }
  return d;
}

}  // namespace

GapReport gap_expanding_check(const TabularMdp& mdp, const Policy& behavior,
                              const QTable& q_hat_k, const QTable& q_k,
                              const Policy& mu_k, double alpha_k,
                              const Policy* backup_policy) {
  if (alpha_k < 0.0)
    throw std::invalid_argument("gap_expanding_check: alpha must be nonnegative");
  Policy pi_k =
      backup_policy ? *backup_policy : soft_policy_from_q(q_hat_k, 1.0);
  QTable b_hat = bellman_policy_op(mdp, pi_k, q_hat_k);
  QTable b_plain = bellman_policy_op(mdp, pi_k, q_k);
  Matrix pen = ratio_penalty(mu_k, behavior);
  QTable q_hat_next(b_hat);
  q_hat_next.q -= alpha_k * pen;

  const int S = mdp.n_states;
  GapReport rep;
  rep.lhs = Vector::Zero(S);
  rep.rhs = Vector::Zero(S);
  rep.delta_hat = delta_hat_of(mu_k, behavior);
  rep.alpha_required = Vector::Zero(S);
  rep.vacuous.assign(S, false);
  rep.holds = true;
  Matrix split = behavior.probs - mu_k.probs;
  for (int s = 0; s < S; ++s) {
    rep.lhs(s) = split.row(s).dot(q_hat_next.q.row(s));
    rep.rhs(s) = split.row(s).dot(b_plain.q.row(s));
    if (rep.delta_hat(s) <= kVacuousTol) {
      rep.vacuous[s] = true;
      continue;
    }
    double opponent = -split.row(s).dot((b_hat.q - b_plain.q).row(s));
    rep.alpha_required(s) = std::max(opponent / rep.delta_hat(s), 0.0);
    if (!(rep.lhs(s) - rep.rhs(s) > kStrictSlack)) rep.holds = false;
  }
  return rep;
}

Vector worst_case_alpha(const TabularMdp& mdp, const Policy& behavior,
                        const QTable& q_hat_k, const Policy& mu_k,
                        const Policy* backup_policy) {
  Policy pi_k =
      backup_policy ? *backup_policy : soft_policy_from_q(q_hat_k, 1.0);
  QTable b_hat = bellman_policy_op(mdp, pi_k, q_hat_k);
  Vector delta = delta_hat_of(mu_k, behavior);
  Vector tv = total_variation(behavior, mu_k);
  double plain_cap = mdp.r_max / (1.0 - mdp.gamma);
  const int S = mdp.n_states;
  Vector out = Vector::Zero(S);
  Matrix split = mu_k.probs - behavior.probs;
  for (int s = 0; s < S; ++s) {
    if (delta(s) <= kVacuousTol) continue;
    double num = split.row(s).dot(b_hat.q.row(s)) + 2.0 * tv(s) * plain_cap;
    out(s) = std::max(num / delta(s), 0.0);
  }
  return out;
}

ObjectiveEquivalenceReport objective_equivalence_check(
    const TabularMdp& mdp_hat, const Policy& pi_beta_hat, double alpha,
    const Vector& rho0, double policy_grid_resolution) {
  if (mdp_hat.n_actions != 2 || mdp_hat.n_states > 3)
    throw std::invalid_argument(
        "objective_equivalence_check: grid needs 2 actions and at most 3 states");
  if (!(policy_grid_resolution > 0.0 && policy_grid_resolution <= 0.5))
    throw std::invalid_argument("objective_equivalence_check: bad grid resolution");
  if (pi_beta_hat.probs.minCoeff() <= 0.0)
    throw std::invalid_argument(
        "objective_equivalence_check: behavior estimate must have full support");
  if (rho0.size() != mdp_hat.n_states)
    throw std::invalid_argument("objective_equivalence_check: rho0 length mismatch");

  TabularMdp m = mdp_hat;
  m.initial_dist = rho0;
  m.validate();

  const int S = m.n_states;
  const int steps = static_cast<int>(std::lround(1.0 / policy_grid_resolution));
  const int per_state = steps + 1;
  long total = 1;
  for (int s = 0; s < S; ++s) total *= per_state;

  CqlEvalConfig cfg;
  cfg.alpha = alpha;
  cfg.variant = CqlVariant::Eq2;
  cfg.backup = BackupMode::Exact;
  EvalInput input = EvalInput::exact(m, pi_beta_hat);

  ObjectiveEquivalenceReport rep;
  rep.n_grid = total;
  double best_lhs = -std::numeric_limits<double>::infinity();
  double second_lhs = best_lhs;
  double best_rhs = best_lhs;
  long best_lhs_idx = -1, best_rhs_idx = -1;
  Policy best_lhs_pi, best_rhs_pi;

  std::vector<int> digits(S, 0);
  for (long idx = 0; idx < total; ++idx) {
    long rem = idx;
    Matrix probs(S, 2);
    for (int s = 0; s < S; ++s) {
      digits[s] = static_cast<int>(rem % per_state);
      rem /= per_state;
      double p0 = static_cast<double>(digits[s]) / steps;
      probs(s, 0) = p0;
      probs(s, 1) = 1.0 - p0;
    }
    Policy pi(probs);

    cfg.mu = pi;
    FixedPointResult fp = cql_fixed_point(cfg, input, pi);
    double lhs = rho0.dot(value_from_q(fp.q, pi).v);

    double j_hat = return_j(m, pi);
    Vector marginal = discounted_state_marginal(m, pi);
    Vector d = d_cql(pi, pi_beta_hat);
    double rhs = j_hat - alpha / (1.0 - m.gamma) * marginal.dot(d);

    rep.max_pointwise_diff = std::max(rep.max_pointwise_diff, std::abs(lhs - rhs));
    if (lhs > best_lhs) {
      second_lhs = best_lhs;
      best_lhs = lhs;
      best_lhs_idx = idx;
      best_lhs_pi = pi;
    } else if (lhs > second_lhs) {
      second_lhs = lhs;
    }
    if (rhs > best_rhs) {
      best_rhs = rhs;
      best_rhs_idx = idx;
      best_rhs_pi = pi;
    }
  }
  rep.argmax_lhs = best_lhs_pi;
  rep.argmax_rhs = best_rhs_pi;
  rep.lhs_best = best_lhs;
  rep.rhs_best = best_rhs;
  rep.match = best_lhs_idx == best_rhs_idx ||
              std::abs(best_lhs - best_rhs) <= 1e-12;
  rep.grid_ambiguous = std::isfinite(second_lhs) && best_lhs - second_lhs < 1e-9;
  return rep;
}

SafeImprovementReport zeta_bound(const TabularMdp& mdp, const EmpiricalModel& model,
                                 const Policy& pi_star,
                                 const ConcentrationConfig& cfg, double alpha) {
  if (mdp.n_states != model.shape.n_states || mdp.n_actions != model.shape.n_actions)
    throw std::invalid_argument("zeta_bound: model shape does not match MDP");
  const int S = mdp.n_states, A = mdp.n_actions;
  TabularMdp hat = empirical_mdp(model, mdp.initial_dist);
  const Policy& beta = model.pi_beta_hat;

  double g = mdp.gamma;
  double unit = cfg.c_r / (1.0 - g) + g * mdp.r_max * cfg.c_t / ((1.0 - g) * (1.0 - g));
  double root_a = std::sqrt(static_cast<double>(A));

  SafeImprovementReport rep;
  rep.alpha = alpha;

  auto policy_deviation = [&](const Policy& pi, int* sentinel_states) {
    Vector marginal = discounted_state_marginal(hat, pi);
    Vector d = d_cql(pi, beta);
    double acc = 0.0;
    for (int s = 0; s < S; ++s) {
      if (marginal(s) <= 1e-12) continue;
      double inv_root_n = model.visited_state(s)
                              ? 1.0 / std::sqrt(model.state_counts(s))
                              : model.sentinel;
      if (!model.visited_state(s) && sentinel_states) ++(*sentinel_states);
      acc += marginal(s) * root_a * inv_root_n * std::sqrt(d(s) + 1.0);
    }
    return unit * acc;
  };

  rep.per_policy_bound_pi_star = policy_deviation(pi_star, &rep.sentinel_states);
  rep.per_policy_bound_beta = policy_deviation(beta, nullptr);
  rep.sampling_term = 2.0 * rep.per_policy_bound_pi_star;
  rep.j_pi_star_hat = return_j(hat, pi_star);
  rep.j_beta_hat = return_j(hat, beta);
  rep.improvement_term = rep.j_pi_star_hat - rep.j_beta_hat;
  rep.zeta = rep.sampling_term - rep.improvement_term;
  rep.j_pi_star_m = return_j(mdp, pi_star);
  rep.j_beta_m = return_j(mdp, beta);
  rep.holds = rep.j_pi_star_m >= rep.j_beta_m - rep.zeta - kStrictSlack;
  return rep;
}

NuNecessityResult nu_necessity_search(const Policy& pi_beta_hat, const Policy& nu) {
  if (pi_beta_hat.probs.rows() != nu.probs.rows() ||
      pi_beta_hat.probs.cols() != nu.probs.cols())
    throw std::invalid_argument("nu_necessity_search: shape mismatch");
  const int S = pi_beta_hat.n_states(), A = pi_beta_hat.n_actions();
  Policy witness(Matrix(0.5 * (nu.probs + pi_beta_hat.probs)));
  Vector per_state = Vector::Zero(S);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      double w = witness.probs(s, a);
      if (w <= 0.0) continue;
      double b = pi_beta_hat.probs(s, a);
      if (b <= 0.0)
        throw std::invalid_argument("nu_necessity_search: support violation at state " +
                                    std::to_string(s));
      per_state(s) += w * (w - nu.probs(s, a)) / b;
    }
  NuNecessityResult res;
  res.witness = witness;
  res.per_state = per_state;
  res.min_penalty = per_state.minCoeff();
  return res;
}

}  // namespace cql
