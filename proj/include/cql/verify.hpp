#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cql/types.hpp"

namespace cql {

struct VerifyOptions {
  std::uint64_t base_seed = 1;
  int n_seeds = 0;  // 0 selects each check's default population
  int jobs = 0;     // 0 selects a hardware-based worker count
  double alpha_override = -1.0;  // >= 0 replaces the exact checks' alpha sweep
};

struct CheckResult {
  std::string name;
  bool pass = true;
  long checked = 0;
  long violations = 0;
  std::string detail;
};

struct SuiteResult {
  std::string suite;
  bool pass = true;
  double seconds = 0.0;
  std::vector<CheckResult> checks;

  void add(CheckResult c) {
    pass = pass && c.pass;
    checks.push_back(std::move(c));
  }
};

// Runs fn(0..n-1) on a bounded worker pool; results must be written to
// per-index slots so the merge is order-independent.
void parallel_for(long n, int jobs, const std::function<void(long)>& fn);

// ---- individual checks ----------------------------------------------------

// Penalty-only fixed points sit below the true Q on random MDPs, three alphas
// (or a single override when alpha_override >= 0).
CheckResult check_eq1_exact(std::uint64_t seed, int n_instances,
                            double alpha_override = -1.0);

// Expected-value fixed points: per-state bound plus the closed-form identity
// V-hat = V - alpha (I - gamma P)^-1 D.
CheckResult check_eq2_exact(std::uint64_t seed, int n_instances,
                            double alpha_override = -1.0);

// Finds an instance where some Q-hat entry exceeds the true Q while the
// per-state value bound still holds.
CheckResult check_eq2_witness(std::uint64_t seed);

struct SampledRegimeResult {
  CheckResult eq1;
  CheckResult eq2;
};

// Threshold-calibrated lower bounds on sampled datasets (two-state chain with
// Bernoulli rewards and a 4x4 slip gridworld); violation rate must stay within
// the calibration delta = 0.1.
SampledRegimeResult check_sampling_regime(std::uint64_t seed, int n_seeds, int jobs);

// Instrumented learning runs: whenever the per-state penalty premise holds,
// the new policy's value under the penalized critic stays below its value
// under the plain backup.
CheckResult check_learning_bound(std::uint64_t seed, int n_trials, int n_iters);

// Gap expansion at alpha = required + 0.1 on random instances, plus one
// pinned alpha = 0 counterinstance.
CheckResult check_gap_expansion(std::uint64_t seed, int n_instances);

// The two penalized-objective forms agree pointwise on the policy grid.
CheckResult check_objective_equivalence(std::uint64_t seed, int n_instances);

struct SafeImprovementChecks {
  CheckResult zeta;        // improvement bound holds
  CheckResult per_policy;  // one-policy model-vs-true deviation bounds
};

SafeImprovementChecks check_safe_improvement(std::uint64_t seed, int n_seeds,
                                             int jobs);

// Linear threshold: at alpha from the threshold rule, the data-weighted value
// of the penalized fit sits below the unprojected backup's.
CheckResult check_linear_threshold(std::uint64_t seed, int n_valid);

// Literal nonnegativity scan of the projected penalty over random feature and
// policy draws. The quantity is sign-indefinite, so this check documents the
// failure rather than passing; see the tests for the true invariants.
CheckResult check_projection_penalty_sign(std::uint64_t seed, int n_draws);

// The adversarial-mixture penalty is 0 exactly at nu = behavior and strictly
// negative once nu moves 0.05 away in TV.
CheckResult check_nu_necessity(std::uint64_t seed, int n_draws);

// Oracle cross-checks: direct solves vs long sweeps, identity-feature linear
// iterates vs the tabular closed form, entropy-gap nonnegativity.
CheckResult check_exact_vs_sweeps(std::uint64_t seed, int n_instances);
CheckResult check_tabular_feature_reduction(std::uint64_t seed, int n_instances);
CheckResult check_entropy_gap(std::uint64_t seed, long n_rows);

// ---- overestimation contrast ----------------------------------------------

struct OverestimationRow {
  std::string task;
  int seeds = 0;
  double mean_naive = 0.0, se_naive = 0.0;
  double mean_eq2 = 0.0, se_eq2 = 0.0;
  double mean_eq1 = 0.0, se_eq1 = 0.0;
};

struct OverestimationTable {
  std::vector<OverestimationRow> rows;
};

// Mean (estimate - true return) of naive fitted-Q vs penalized evaluation of
// the conservatively learned policy, per task.
OverestimationTable overestimation_table(std::uint64_t seed, int seeds_per_task,
                                         int jobs);
CheckResult check_overestimation_contrast(std::uint64_t seed, int seeds_per_task,
                                          int jobs);

// ---- suites ----------------------------------------------------------------

SuiteResult verify_eq1_bound(const VerifyOptions& opt);            // T1
SuiteResult verify_eq2_bound(const VerifyOptions& opt);            // T2
SuiteResult verify_learning_bound(const VerifyOptions& opt);       // T3
SuiteResult verify_gap_expansion(const VerifyOptions& opt);        // T4
SuiteResult verify_objective_equivalence(const VerifyOptions& opt);  // T5
SuiteResult verify_safe_improvement(const VerifyOptions& opt);     // T6
SuiteResult verify_linear_fa(const VerifyOptions& opt);            // D1
SuiteResult verify_nu_necessity(const VerifyOptions& opt);         // D3
SuiteResult verify_oracles(const VerifyOptions& opt);

std::string suite_to_json(const SuiteResult& suite);
std::string suite_to_text(const SuiteResult& suite);
std::string table_to_csv(const OverestimationTable& table);

}  // namespace cql
