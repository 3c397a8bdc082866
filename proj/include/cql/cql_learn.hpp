#pragma once

#include <functional>
#include <vector>

#include "cql/datasets.hpp"
#include "cql/mdp_core.hpp"
#include "cql/types.hpp"

namespace cql {

// Which concave regularizer shapes the maximizing distribution mu_k.
// H: entropy, mu ~ exp(Q). Rho: KL to a prior, mu ~ prior * exp(Q).
// Var: KL to the empirical action distribution, which penalizes the critic by
// the action-value spread under that distribution.
enum class Regularizer { H, Rho, Var };
enum class RhoPrior { Uniform, PreviousPolicy, Behavior };
enum class VarWeight { Uniform, InverseCounts };
enum class AlphaMode { Fixed, Lagrange };
enum class LearnBackup { PolicyEval, Optimality };
enum class ActorKind { SoftGreedy, Greedy };

struct CqlLearnConfig {
  Regularizer regularizer = Regularizer::H;
  RhoPrior rho_prior = RhoPrior::Uniform;
  VarWeight var_weight = VarWeight::Uniform;
  double robust_delta = 0.1;  // confidence level inside the Var spread term
  AlphaMode alpha_mode = AlphaMode::Fixed;
  double alpha = 1.0;
  double tau = 1.0;        // Lagrange target for the objective gap
  double dual_step = 0.1;
  LearnBackup backup = LearnBackup::PolicyEval;
  ActorKind actor = ActorKind::SoftGreedy;
  double temperature = 1.0;
  int iters = 50;
  double policy_step = 0.5;  // mixture weight toward the new actor target
};

// Learning runs either against an empirical model or against the true MDP
// with a known behavior policy. reference_mdp, when set, supplies the ground
// truth used for the trace's return columns.
struct LearnInput {
  const EmpiricalModel* model = nullptr;
  const TabularMdp* mdp = nullptr;
  const Policy* behavior = nullptr;
  const TabularMdp* reference_mdp = nullptr;

  static LearnInput empirical(const EmpiricalModel& m,
                              const TabularMdp* reference = nullptr) {
    return {&m, nullptr, nullptr, reference};
  }
  static LearnInput exact(const TabularMdp& m, const Policy& beta) {
    return {nullptr, &m, &beta, &m};
  }
};

struct LearnState {
  QTable q;
  Policy policy;
  double alpha = 0.0;
};

struct LearnTraceRow {
  int k = 0;
  double q_mean = 0.0, q_min = 0.0, q_max = 0.0;
  double alpha = 0.0;   // alpha used by this iteration's critic
  double gap = 0.0;     // regularized objective gap at the new critic
  double dtv = 0.0;     // max over states, TV(policy_k+1, policy_k)
  double j_hat_m = 0.0; // return of policy_k+1 in the (empirical) model MDP
  double j_m = 0.0;     // return in reference_mdp; NaN when absent
};

struct LearnTrace {
  std::vector<LearnTraceRow> rows;
};

struct LearnResult {
  Policy policy;
  QTable q;
  LearnTrace trace;
};

LearnState initial_learn_state(const CqlLearnConfig& config, const LearnInput& input);

// The distribution the critic penalty charges, induced by the regularizer.
Policy mu_from_regularizer(const CqlLearnConfig& config, const QTable& q,
                           const Policy& prev_policy, const LearnInput& input);

// One penalized critic backup. Zero-count pairs take the pessimistic floor
// with no ratio penalty; the ratio is only defined on the empirical support.
QTable cql_learn_critic(const CqlLearnConfig& config, const LearnInput& input,
                        const LearnState& state, const Policy& mu);

// Critic backup, actor mixture step, and (in Lagrange mode) dual update.
LearnState cql_learn_step(const CqlLearnConfig& config, const LearnInput& input,
                          const LearnState& state);

// State-weighted regularized objective gap: for H this is
// sum_s w(s) [logsumexp Q(s,.) - E_beta Q(s,.)] with w the empirical state
// frequency (or the behavior's discounted marginal for exact inputs).
double cql_objective_value(const CqlLearnConfig& config, const QTable& q,
                           const LearnInput& input,
                           const Policy* prev_policy = nullptr);

// Dual ascent on alpha toward objective gap tau: max(0, alpha + step*(gap - tau)).
double lagrange_alpha_update(double alpha, double gap, double tau, double dual_step);

using LearnObserver = std::function<void(const LearnState& before, const Policy& mu,
                                         const LearnState& after, int k)>;

LearnResult run_cql(const CqlLearnConfig& config, const LearnInput& input,
                    const LearnObserver& observer = {});

}  // namespace cql
