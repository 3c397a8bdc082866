#include "cql/cql_eval.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace cql {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_input(const CqlEvalConfig& config, const EvalInput& input) {
  if (config.alpha < 0.0)
    throw std::invalid_argument("cql_eval: alpha must be nonnegative");
  if (config.backup == BackupMode::Exact) {
    if (!input.mdp || !input.behavior)
      throw std::invalid_argument("cql_eval: exact backup needs an MDP and behavior");
    if (config.counts_weighted_alpha)
      throw std::invalid_argument(
          "cql_eval: counts-weighted penalty needs the empirical backup");
  } else {
    if (!input.model)
      throw std::invalid_argument("cql_eval: empirical backup needs a model");
  }
}

const Matrix& behavior_probs(const EvalInput& input, const CqlEvalConfig& config) {
  return config.backup == BackupMode::Exact ? input.behavior->probs
                                            : input.model->pi_beta_hat.probs;
}

QTable apply_backup(const CqlEvalConfig& config, const EvalInput& input,
                    const Policy& target, const QTable& q) {
  return config.backup == BackupMode::Exact
             ? bellman_policy_op(*input.mdp, target, q)
             : empirical_bellman_policy_op(*input.model, target, q);
}

}  // namespace

Matrix cql_penalty(const CqlEvalConfig& config, const EvalInput& input) {
  check_input(config, input);
  const Matrix& mu = config.mu.probs;
  const Matrix& beta = behavior_probs(input, config);
  if (mu.rows() != beta.rows() || mu.cols() != beta.cols())
    throw std::invalid_argument("cql_penalty: mu shape mismatch");
  const int S = static_cast<int>(mu.rows()), A = static_cast<int>(mu.cols());
  Matrix pen(S, A);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      double den;
      if (config.counts_weighted_alpha) {
        den = input.model->counts(s, a);
      } else {
        den = beta(s, a);
      }
      if (den <= 0.0) {
        // mu and the behavior estimate both vanish here, so no ratio is owed.
        if (mu(s, a) > 0.0)
          throw std::invalid_argument("cql_penalty: support violation at (s,a) = (" +
                                      std::to_string(s) + "," + std::to_string(a) +
                                      ")");
        pen(s, a) = 0.0;
        continue;
      }
      double base = config.variant == CqlVariant::Eq1 ? mu(s, a) : mu(s, a) - beta(s, a);
      pen(s, a) = config.alpha * base / den;
    }
  return pen;
}

QTable cql_eq1_iterate(const CqlEvalConfig& config, const EvalInput& input,
                       const Policy& target, const QTable& q) {
  CqlEvalConfig c = config;
  c.variant = CqlVariant::Eq1;
  Matrix pen = cql_penalty(c, input);
  QTable out = apply_backup(c, input, target, q);
  out.q -= pen;
  return out;
}

QTable cql_eq2_iterate(const CqlEvalConfig& config, const EvalInput& input,
                       const Policy& target, const QTable& q) {
  CqlEvalConfig c = config;
  c.variant = CqlVariant::Eq2;
  Matrix pen = cql_penalty(c, input);
  QTable out = apply_backup(c, input, target, q);
  out.q -= pen;
  return out;
}

FixedPointResult cql_fixed_point(const CqlEvalConfig& config, const EvalInput& input,
                                 const Policy& target) {
  check_input(config, input);
  Matrix pen = cql_penalty(config, input);
  FixedPointResult res;
  if (config.backup == BackupMode::Exact) {
    const TabularMdp& mdp = *input.mdp;
    const int S = mdp.n_states, A = mdp.n_actions;
    Matrix p = sa_transition_matrix(mdp, target);
    Vector rhs(S * A);
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a)
        rhs(sa_index(s, a, A)) = mdp.reward(s, a) - pen(s, a);
    Matrix lhs = Matrix::Identity(S * A, S * A) - mdp.gamma * p;
    Vector q_flat = lhs.partialPivLu().solve(rhs);
    res.residual = (lhs * q_flat - rhs).cwiseAbs().maxCoeff();
    res.converged = res.residual <= 1e-9;
    if (!res.converged)
      throw std::runtime_error("cql_fixed_point: direct solve residual " +
                               std::to_string(res.residual));
    res.q = QTable(S, A);
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) res.q.q(s, a) = q_flat(sa_index(s, a, A));
    res.iters = 0;
    return res;
  }
  const int S = input.model->shape.n_states, A = input.model->shape.n_actions;
  res.q = QTable(S, A);
  for (long k = 0; k < config.max_iters; ++k) {
    QTable next = apply_backup(config, input, target, res.q);
    next.q -= pen;
    double delta = (next.q - res.q.q).cwiseAbs().maxCoeff();
    res.q = std::move(next);
    res.iters = k + 1;
    res.residual = delta;
    if (delta <= config.tol) {
      res.converged = true;
      break;
    }
  }
  if (!res.converged)
    throw std::runtime_error("cql_fixed_point: no convergence after " +
                             std::to_string(res.iters) + " iterations, residual " +
                             std::to_string(res.residual));
  return res;
}

double alpha_threshold_eq1(const EmpiricalModel& model,
                           const ConcentrationConfig& cfg, const Policy& mu,
                           double gamma, double r_max) {
  const int S = model.shape.n_states, A = model.shape.n_actions;
  if (mu.n_states() != S || mu.n_actions() != A)
    throw std::invalid_argument("alpha_threshold_eq1: mu shape mismatch");
  double composite = composite_concentration(cfg, gamma, r_max);
  double worst_bound = 0.0;
  double min_ratio = kInf;
  bool any = false;
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      if (!model.visited(s, a)) continue;
      any = true;
      worst_bound = std::max(worst_bound, composite * model.inv_sqrt_counts(s, a));
      min_ratio =
          std::min(min_ratio, mu.probs(s, a) / model.pi_beta_hat.probs(s, a));
    }
  if (!any) return kInf;
  if (min_ratio <= 0.0) return kInf;
  return worst_bound / min_ratio;
}

double alpha_threshold_eq2(const EmpiricalModel& model,
                           const ConcentrationConfig& cfg, const Policy& target,
                           double gamma, double r_max) {
  const int S = model.shape.n_states;
  if (target.n_states() != S || target.n_actions() != model.shape.n_actions)
    throw std::invalid_argument("alpha_threshold_eq2: target shape mismatch");
  double composite = composite_concentration(cfg, gamma, r_max);
  Vector d = d_cql(target, model.pi_beta_hat);
  double alpha = 0.0;
  bool any = false;
  for (int s = 0; s < S; ++s) {
    if (!model.visited_state(s)) continue;
    any = true;
    if (d(s) <= 1e-15) return kInf;
    alpha = std::max(alpha, composite / (std::sqrt(model.state_counts(s)) * d(s)));
  }
  return any ? alpha : kInf;
}

Vector d_cql(const Policy& pi, const Policy& pi_beta) {
  if (pi.probs.rows() != pi_beta.probs.rows() ||
      pi.probs.cols() != pi_beta.probs.cols())
    throw std::invalid_argument("d_cql: shape mismatch");
  const int S = pi.n_states(), A = pi.n_actions();
  Vector d = Vector::Zero(S);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      double p = pi.probs(s, a), b = pi_beta.probs(s, a);
      if (p <= 0.0) continue;
      if (b <= 0.0)
        throw std::invalid_argument("d_cql: support violation at state " +
                                    std::to_string(s));
      d(s) += p * (p / b - 1.0);
    }
  return d;
}

EvalReport make_eval_report(const CqlEvalConfig& config, const EvalInput& input,
                            const Policy& target, const TabularMdp& reference,
                            const ConcentrationConfig& concentration, double tol) {
  FixedPointResult fp = cql_fixed_point(config, input, target);
  EvalReport rep;
  rep.variant = config.variant;
  rep.alpha = config.alpha;
  rep.tol = tol;
  rep.v_hat = value_from_q(fp.q, target).v;
  rep.v = value_from_q(exact_q(reference, target), target).v;
  rep.gap = rep.v_hat - rep.v;
  if (config.backup == BackupMode::Exact) {
    rep.threshold = 0.0;
  } else {
    rep.threshold =
        config.variant == CqlVariant::Eq1
            ? alpha_threshold_eq1(*input.model, concentration, config.mu,
                                  reference.gamma, reference.r_max)
            : alpha_threshold_eq2(*input.model, concentration, target,
                                  reference.gamma, reference.r_max);
  }
  rep.violated = (rep.gap.array() > tol).any();
  return rep;
}

}  // namespace cql
