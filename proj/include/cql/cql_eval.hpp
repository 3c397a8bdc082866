#pragma once

#include "cql/datasets.hpp"
#include "cql/mdp_core.hpp"
#include "cql/types.hpp"

namespace cql {

// Eq1 subtracts the plain visitation ratio mu / pi_beta from the backup; Eq2
// additionally adds the behavior ratio back in, i.e. subtracts
// mu / pi_beta - 1.
enum class CqlVariant { Eq1, Eq2 };

enum class BackupMode { Exact, Empirical };

struct CqlEvalConfig {
  double alpha = 0.0;
  Policy mu;  // distribution whose actions the penalty charges
  CqlVariant variant = CqlVariant::Eq2;
  BackupMode backup = BackupMode::Exact;
  int max_iters = 100000;
  double tol = 1e-10;
  // Replaces the pi_beta denominator with the raw visit count n(s,a); only
  // meaningful (and only allowed) with the empirical backup.
  bool counts_weighted_alpha = false;
};

// Evaluation operates either on the true MDP with a known behavior policy or
// on an empirical model carrying pi_beta_hat; exactly one side must be set,
// matching the configured backup.
struct EvalInput {
  const TabularMdp* mdp = nullptr;
  const Policy* behavior = nullptr;
  const EmpiricalModel* model = nullptr;

  static EvalInput exact(const TabularMdp& m, const Policy& beta) {
    return {&m, &beta, nullptr};
  }
  static EvalInput empirical(const EmpiricalModel& m) { return {nullptr, nullptr, &m}; }
};

// Per-pair penalty table the iterates subtract (already includes alpha).
// Throws on a support violation: mu > 0 where the behavior estimate is 0 (or
// where the count is 0 in counts-weighted mode).
Matrix cql_penalty(const CqlEvalConfig& config, const EvalInput& input);

// One penalized backup application, Q <- B^pi Q - penalty.
QTable cql_eq1_iterate(const CqlEvalConfig& config, const EvalInput& input,
                       const Policy& target, const QTable& q);
QTable cql_eq2_iterate(const CqlEvalConfig& config, const EvalInput& input,
                       const Policy& target, const QTable& q);

struct FixedPointResult {
  QTable q;
  long iters = 0;
  double residual = 0.0;
  bool converged = false;
};

// Fixed point of the penalized backup: direct linear solve for the exact
// backup, damped iteration (config.tol, config.max_iters) for the empirical
// one.
FixedPointResult cql_fixed_point(const CqlEvalConfig& config, const EvalInput& input,
                                 const Policy& target);

// Smallest alpha the concentration argument certifies for the Eq1 lower
// bound: max over visited pairs of composite/sqrt(n) divided by the smallest
// visited mu/pi_beta_hat ratio. +infinity when mu vanishes on some visited
// pair.
double alpha_threshold_eq1(const EmpiricalModel& model,
                           const ConcentrationConfig& cfg, const Policy& mu,
                           double gamma, double r_max);

// Eq2 analogue: max over visited states of composite/(sqrt(n(s)) * D(s)) with
// D the per-state penalty mass d_cql(pi, pi_beta_hat). +infinity when the
// target matches the behavior estimate at some visited state.
double alpha_threshold_eq2(const EmpiricalModel& model,
                           const ConcentrationConfig& cfg, const Policy& target,
                           double gamma, double r_max);

// D(s) = sum_a pi(a|s) (pi(a|s)/pi_beta(a|s) - 1); nonnegative, zero iff the
// rows coincide. Throws on support violation.
Vector d_cql(const Policy& pi, const Policy& pi_beta);

struct EvalReport {
  CqlVariant variant = CqlVariant::Eq2;
  double alpha = 0.0;
  Vector v_hat;       // E_target[ Q-hat ] per state
  Vector v;           // V^target in the reference MDP
  Vector gap;         // v_hat - v
  double threshold = 0.0;  // certified alpha for this variant; 0 for exact backup
  bool violated = false;   // some state has v_hat > v + tol
  double tol = 1e-9;
};

EvalReport make_eval_report(const CqlEvalConfig& config, const EvalInput& input,
                            const Policy& target, const TabularMdp& reference,
                            const ConcentrationConfig& concentration = {},
                            double tol = 1e-9);

}  // namespace cql
