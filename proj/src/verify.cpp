#include "cql/verify.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "cql/analysis.hpp"
#include "cql/cql_eval.hpp"
#include "cql/cql_learn.hpp"
#include "cql/datasets.hpp"
#include "cql/generators.hpp"
#include "cql/linear_fa.hpp"
#include "cql/mdp_core.hpp"
#include "cql/rng.hpp"

#include "json.hpp"

namespace cql {

namespace {

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t i) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ull * (i + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

int resolve_jobs(int jobs, long n) {
  if (jobs <= 0) {
    unsigned hw = std::thread::hardware_concurrency();
    jobs = static_cast<int>(hw == 0 ? 4 : std::min(hw, 8u));
  }
  jobs = std::max(1, std::min(jobs, 64));
  return static_cast<int>(std::min<long>(jobs, std::max<long>(n, 1)));
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  }
};

TabularMdp bounded_random_mdp(Rng& rng, std::uint64_t seed, double gamma = 0.9) {
  RandomMdpSpec spec;
  spec.n_states = 2 + static_cast<int>(rng.uniform() * 9.0);   // 2..10
  spec.n_actions = 2 + static_cast<int>(rng.uniform() * 3.0);  // 2..4
  spec.gamma = gamma;
  return random_mdp(spec, seed);
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double se_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double m = mean_of(v);
  double s2 = 0.0;
  for (double x : v) s2 += (x - m) * (x - m);
  s2 /= static_cast<double>(v.size() - 1);
  return std::sqrt(s2 / static_cast<double>(v.size()));
}

}  // namespace

void parallel_for(long n, int jobs, const std::function<void(long)>& fn) {
  if (n <= 0) return;
  jobs = resolve_jobs(jobs, n);
  if (jobs == 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  std::atomic<bool> failed{false};
  std::string first_error;
  std::mutex err_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(jobs));
  for (int w = 0; w < jobs; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        long i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (const std::exception& e) {
          bool expected = false;
          if (failed.compare_exchange_strong(expected, true)) {
            std::lock_guard<std::mutex> lock(err_mutex);
            first_error = e.what();
          }
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failed.load()) throw std::runtime_error("parallel_for worker: " + first_error);
}

// ---- exact-regime checks ----------------------------------------------------

CheckResult check_eq1_exact(std::uint64_t seed, int n_instances,
                            double alpha_override) {
  CheckResult res;
  res.name = "eq1-exact-lower-bound";
  std::vector<double> alphas = {0.01, 0.1, 1.0};
  if (alpha_override >= 0.0) alphas = {alpha_override};
  for (int i = 0; i < n_instances; ++i) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(i)));
    TabularMdp mdp = bounded_random_mdp(rng, mix_seed(seed, 7000u + static_cast<std::uint64_t>(i)));
    Policy behavior = random_policy(mdp.n_states, mdp.n_actions, rng, 2.0);
    Policy target = random_policy(mdp.n_states, mdp.n_actions, rng, 1.0);
    Policy mu = random_policy(mdp.n_states, mdp.n_actions, rng, 1.0);
    QTable q_true = exact_q(mdp, target);
    for (double alpha : alphas) {
      CqlEvalConfig cfg;
      cfg.alpha = alpha;
      cfg.mu = mu;
      cfg.variant = CqlVariant::Eq1;
      cfg.backup = BackupMode::Exact;
      FixedPointResult fp = cql_fixed_point(cfg, EvalInput::exact(mdp, behavior), target);
      ++res.checked;
      double worst = (fp.q.q - q_true.q).maxCoeff();
      if (worst > 1e-9) {
        ++res.violations;
        if (res.detail.empty())
          res.detail = "instance " + std::to_string(i) + " alpha " + fmt(alpha) +
                       " excess " + fmt(worst);
      }
    }
  }
  res.pass = res.violations == 0;
  if (res.detail.empty())
    res.detail = std::to_string(res.checked) + " fixed points below true Q";
  return res;
}

CheckResult check_eq2_exact(std::uint64_t seed, int n_instances,
                            double alpha_override) {
  CheckResult res;
  res.name = "eq2-exact-value-bound";
  std::vector<double> alphas = {0.01, 0.1, 1.0};
  if (alpha_override >= 0.0) alphas = {alpha_override};
  for (int i = 0; i < n_instances; ++i) {
    Rng rng(mix_seed(seed ^ 0x5bd1ull, static_cast<std::uint64_t>(i)));
    TabularMdp mdp = bounded_random_mdp(rng, mix_seed(seed, 9000u + static_cast<std::uint64_t>(i)));
    Policy behavior = random_policy(mdp.n_states, mdp.n_actions, rng, 2.0);
    Policy target = random_policy(mdp.n_states, mdp.n_actions, rng, 1.0);
    QTable q_true = exact_q(mdp, target);
    Vector v_true = value_from_q(q_true, target).v;
    Matrix p_state = state_transition_matrix(mdp, target);
    Vector dvec = d_cql(target, behavior);
    Matrix lhs_mat =
        Matrix::Identity(mdp.n_states, mdp.n_states) - mdp.gamma * p_state;
    Vector shift = lhs_mat.partialPivLu().solve(dvec);
    for (double alpha : alphas) {
      CqlEvalConfig cfg;
      cfg.alpha = alpha;
      cfg.mu = target;
      cfg.variant = CqlVariant::Eq2;
      cfg.backup = BackupMode::Exact;
      FixedPointResult fp = cql_fixed_point(cfg, EvalInput::exact(mdp, behavior), target);
      Vector v_hat = value_from_q(fp.q, target).v;
      ++res.checked;
      double excess = (v_hat - v_true).maxCoeff();
      double ident = (v_hat - (v_true - alpha * shift)).cwiseAbs().maxCoeff();
      if (excess > 1e-9 || ident > 1e-9) {
        ++res.violations;
        if (res.detail.empty())
          res.detail = "instance " + std::to_string(i) + " alpha " + fmt(alpha) +
                       " excess " + fmt(excess) + " identity-gap " + fmt(ident);
      }
    }
  }
  res.pass = res.violations == 0;
  if (res.detail.empty())
    res.detail = std::to_string(res.checked) +
                 " value bounds and resolvent identities within 1e-9";
  return res;
}

CheckResult check_eq2_witness(std::uint64_t seed) {
  CheckResult res;
  res.name = "eq2-pointwise-witness";
  for (int i = 0; i < 5000; ++i) {
    Rng rng(mix_seed(seed ^ 0x3713ull, static_cast<std::uint64_t>(i)));
    TabularMdp mdp = bounded_random_mdp(rng, mix_seed(seed, 40000u + static_cast<std::uint64_t>(i)));
    Policy behavior = random_policy(mdp.n_states, mdp.n_actions, rng, 0.7);
    Policy target = random_policy(mdp.n_states, mdp.n_actions, rng, 0.7);
    CqlEvalConfig cfg;
    cfg.alpha = 1.0;
    cfg.mu = target;
    cfg.variant = CqlVariant::Eq2;
    cfg.backup = BackupMode::Exact;
    QTable q_true = exact_q(mdp, target);
    FixedPointResult fp = cql_fixed_point(cfg, EvalInput::exact(mdp, behavior), target);
    Vector v_true = value_from_q(q_true, target).v;
    Vector v_hat = value_from_q(fp.q, target).v;
    ++res.checked;
    if ((v_hat - v_true).maxCoeff() > 1e-9) continue;  // the bound must hold
    double q_excess = (fp.q.q - q_true.q).maxCoeff();
    if (q_excess > 1e-6) {
      res.detail = "draw " + std::to_string(i) + ": max per-pair excess " +
                   fmt(q_excess) + " while every state value stays below truth";
      res.pass = true;
      return res;
    }
  }
  res.pass = false;
  res.detail = "no pointwise-overshoot witness found in 5000 draws";
  return res;
}

// ---- sampled-regime check ---------------------------------------------------

namespace {

struct SampledTask {
  std::string name;
  TabularMdp mdp;
  Policy behavior;
  Policy target;
  int n_transitions = 0;
  int horizon = 0;
  RewardNoise noise;
};

SampledTask make_chain_task() {
  SampledTask t;
  t.name = "chain2-bernoulli";
  t.mdp = chain2_bernoulli();
  t.behavior = uniform_policy(2, 2);
  Matrix p(2, 2);
  p << 0.7, 0.3, 0.3, 0.7;
  t.target = Policy{p};
  t.n_transitions = 2000;
  t.horizon = 100;
  t.noise = RewardNoise{RewardNoiseKind::Bernoulli, 0.0};
  return t;
}

SampledTask make_grid_task() {
  SampledTask t;
  t.name = "gridworld-4x4";
  GridworldSpec spec;
  t.mdp = gridworld(spec);
  t.behavior = uniform_policy(t.mdp.n_states, t.mdp.n_actions);
  Matrix p(t.mdp.n_states, t.mdp.n_actions);
  for (int s = 0; s < t.mdp.n_states; ++s) {
    for (int a = 0; a < t.mdp.n_actions; ++a) p(s, a) = 0.1;
    p(s, s % t.mdp.n_actions) = 0.7;
  }
  t.target = Policy{p};
  t.n_transitions = 12000;
  t.horizon = 80;
  t.noise = RewardNoise{RewardNoiseKind::Bernoulli, 0.0};
  return t;
}

struct SeedOutcome {
  bool eq1_checked = false, eq1_violated = false, eq1_vacuous = false;
  bool eq2_checked = false, eq2_violated = false, eq2_vacuous = false;
};

SeedOutcome run_sampled_seed(const SampledTask& task,
                             const ConcentrationConfig& conc,
                             std::uint64_t data_seed) {
  SeedOutcome out;
  TransitionDataset ds = sample_dataset(task.mdp, task.behavior, task.n_transitions,
                                        task.horizon, data_seed, task.noise);
  EmpiricalModel model = build_empirical_model(ds, shape_of(task.mdp));
  Policy pol = mask_to_support(task.target, model);
  QTable q_true = exact_q(task.mdp, pol);
  Vector v_true = value_from_q(q_true, pol).v;

  double a1 = alpha_threshold_eq1(model, conc, pol, task.mdp.gamma, task.mdp.r_max);
  if (!std::isfinite(a1)) {
    out.eq1_vacuous = true;
  } else {
    CqlEvalConfig cfg;
    cfg.alpha = a1;
    cfg.mu = pol;
    cfg.variant = CqlVariant::Eq1;
    cfg.backup = BackupMode::Empirical;
    FixedPointResult fp = cql_fixed_point(cfg, EvalInput::empirical(model), pol);
    out.eq1_checked = true;
    for (int s = 0; s < model.shape.n_states && !out.eq1_violated; ++s)
      for (int a = 0; a < model.shape.n_actions; ++a)
        if (model.visited(s, a) && fp.q.q(s, a) > q_true.q(s, a) + 1e-9) {
          out.eq1_violated = true;
          break;
        }
  }

  double a2 = alpha_threshold_eq2(model, conc, pol, task.mdp.gamma, task.mdp.r_max);
  if (!std::isfinite(a2)) {
    out.eq2_vacuous = true;
  } else {
    CqlEvalConfig cfg;
    cfg.alpha = a2;
    cfg.mu = pol;
    cfg.variant = CqlVariant::Eq2;
    cfg.backup = BackupMode::Empirical;
    FixedPointResult fp = cql_fixed_point(cfg, EvalInput::empirical(model), pol);
    out.eq2_checked = true;
    Vector v_hat = value_from_q(fp.q, pol).v;
    for (int s = 0; s < model.shape.n_states; ++s)
      if (model.visited_state(s) && v_hat(s) > v_true(s) + 1e-9) {
        out.eq2_violated = true;
        break;
      }
  }
  return out;
}

}  // namespace

SampledRegimeResult check_sampling_regime(std::uint64_t seed, int n_seeds, int jobs) {
  if (n_seeds <= 0) n_seeds = 500;
  SampledRegimeResult out;
  out.eq1.name = "eq1-sampled-threshold";
  out.eq2.name = "eq2-sampled-threshold";
  const double delta = 0.1;
  std::vector<SampledTask> tasks = {make_chain_task(), make_grid_task()};
  std::string d1, d2;
  for (const SampledTask& task : tasks) {
    ConcentrationConfig conc = estimate_concentration(
        task.mdp, task.behavior, task.n_transitions, task.horizon, 400, delta / 2.0,
        seed + 1000000u, task.noise);
    std::vector<SeedOutcome> outs(static_cast<std::size_t>(n_seeds));
    parallel_for(n_seeds, jobs, [&](long i) {
      outs[static_cast<std::size_t>(i)] = run_sampled_seed(
          task, conc, mix_seed(seed, 50000u + static_cast<std::uint64_t>(i)));
    });
    long c1 = 0, v1 = 0, vac1 = 0, c2 = 0, v2 = 0, vac2 = 0;
    for (const SeedOutcome& o : outs) {
      c1 += o.eq1_checked;
      v1 += o.eq1_violated;
      vac1 += o.eq1_vacuous;
      c2 += o.eq2_checked;
      v2 += o.eq2_violated;
      vac2 += o.eq2_vacuous;
    }
    out.eq1.checked += c1;
    out.eq1.violations += v1;
    out.eq2.checked += c2;
    out.eq2.violations += v2;
    double r1 = c1 > 0 ? static_cast<double>(v1) / static_cast<double>(c1) : 0.0;
    double r2 = c2 > 0 ? static_cast<double>(v2) / static_cast<double>(c2) : 0.0;
    if (c1 == 0 || r1 > delta) out.eq1.pass = false;
    if (c2 == 0 || r2 > delta) out.eq2.pass = false;
    d1 += task.name + " rate " + fmt(r1) + " (" + std::to_string(v1) + "/" +
          std::to_string(c1) + ", " + std::to_string(vac1) + " unbounded-alpha); ";
    d2 += task.name + " rate " + fmt(r2) + " (" + std::to_string(v2) + "/" +
          std::to_string(c2) + ", " + std::to_string(vac2) + " unbounded-alpha); ";
  }
  out.eq1.detail = d1 + "budget " + fmt(delta);
  out.eq2.detail = d2 + "budget " + fmt(delta);
  return out;
}

// ---- learning-regime check --------------------------------------------------

CheckResult check_learning_bound(std::uint64_t seed, int n_trials, int n_iters) {
  CheckResult res;
  res.name = "learning-premise-implication";
  const TabularMdp mdp = chain2_bernoulli();
  long premise_hits = 0;
  for (int t = 0; t < n_trials; ++t) {
    Rng rng(mix_seed(seed ^ 0x3d3ull, static_cast<std::uint64_t>(t)));
    Policy behavior = random_policy(mdp.n_states, mdp.n_actions, rng, 2.0);
    CqlLearnConfig cfg;
    cfg.regularizer = Regularizer::H;
    cfg.backup = LearnBackup::PolicyEval;
    cfg.actor = ActorKind::SoftGreedy;
    cfg.temperature = 1.0;
    cfg.alpha = 0.5;
    cfg.policy_step = 0.3;
    cfg.iters = n_iters;
    LearnInput input = LearnInput::exact(mdp, behavior);
    LearnState st = initial_learn_state(cfg, input);
    for (int s = 0; s < mdp.n_states; ++s)
      for (int a = 0; a < mdp.n_actions; ++a) st.q.q(s, a) = rng.uniform(-1.0, 1.0);

    for (int k = 0; k < n_iters; ++k) {
      LearnState before = st;
      Policy mu = mu_from_regularizer(cfg, before.q, before.policy, input);
      st = cql_learn_step(cfg, input, before);
      QTable backed = bellman_policy_op(mdp, before.policy, before.q);
      for (int s = 0; s < mdp.n_states; ++s) {
        double premise = 0.0, max_ratio = 0.0;
        for (int a = 0; a < mdp.n_actions; ++a) {
          double ratio = mu.probs(s, a) / behavior.probs(s, a);
          premise += mu.probs(s, a) * (ratio - 1.0);
          max_ratio = std::max(max_ratio, ratio);
        }
        double tv = 0.5 * (st.policy.probs.row(s) - mu.probs.row(s)).cwiseAbs().sum();
        if (premise < max_ratio * tv) continue;  // premise not met at this state
        ++premise_hits;
        double penalized = st.policy.probs.row(s).dot(st.q.q.row(s));
        double plain = st.policy.probs.row(s).dot(backed.q.row(s));
        ++res.checked;
        if (penalized > plain + 1e-9) {
          ++res.violations;
          if (res.detail.empty())
            res.detail = "trial " + std::to_string(t) + " iter " + std::to_string(k) +
                         " state " + std::to_string(s) + " penalized " +
                         fmt(penalized) + " plain " + fmt(plain);
        }
      }
    }
  }
  res.pass = res.violations == 0 && premise_hits > 0;
  if (res.detail.empty())
    res.detail = std::to_string(premise_hits) + " premise-satisfied states, all bounded";
  return res;
}

// ---- gap expansion ----------------------------------------------------------

namespace {

struct GapInstance {
  TabularMdp mdp;
  Policy behavior;
  Policy mu;
  QTable q_hat;
  QTable q_plain;
};

GapInstance draw_gap_instance(std::uint64_t seed, std::uint64_t i) {
  Rng rng(mix_seed(seed ^ 0x9a9ull, i));
  GapInstance inst;
  inst.mdp = bounded_random_mdp(rng, mix_seed(seed, 60000u + i));
  inst.behavior = random_policy(inst.mdp.n_states, inst.mdp.n_actions, rng, 2.0);
  inst.mu = random_policy(inst.mdp.n_states, inst.mdp.n_actions, rng, 1.0);
  double lim = value_clamp_limit(inst.mdp.r_max, inst.mdp.gamma);
  Matrix qh(inst.mdp.n_states, inst.mdp.n_actions);
  Matrix qp(inst.mdp.n_states, inst.mdp.n_actions);
  for (int s = 0; s < inst.mdp.n_states; ++s)
    for (int a = 0; a < inst.mdp.n_actions; ++a) {
      qh(s, a) = rng.uniform(-lim, lim);
      qp(s, a) = rng.uniform(-lim, lim);
    }
  inst.q_hat = QTable{qh};
  inst.q_plain = QTable{qp};
  return inst;
}

}  // namespace

CheckResult check_gap_expansion(std::uint64_t seed, int n_instances) {
  CheckResult res;
  res.name = "gap-expansion-at-required-alpha";
  for (int i = 0; i < n_instances; ++i) {
    GapInstance inst = draw_gap_instance(seed, static_cast<std::uint64_t>(i));
    GapReport probe = gap_expanding_check(inst.mdp, inst.behavior, inst.q_hat,
                                          inst.q_plain, inst.mu, 0.0);
    double alpha = 0.0;
    for (int s = 0; s < inst.mdp.n_states; ++s)
      if (!probe.vacuous[static_cast<std::size_t>(s)])
        alpha = std::max(alpha, probe.alpha_required(s));
    alpha += 0.1;
    GapReport rep = gap_expanding_check(inst.mdp, inst.behavior, inst.q_hat,
                                        inst.q_plain, inst.mu, alpha);
    ++res.checked;
    if (!rep.holds) {
      ++res.violations;
      if (res.detail.empty())
        res.detail = "instance " + std::to_string(i) + " alpha " + fmt(alpha);
    }
  }
  // zero-penalty counterinstance: expansion must actually fail somewhere
  bool counter_found = false;
  std::string counter = "no alpha=0 counterinstance in 50 draws";
  for (std::uint64_t j = 0; j < 50 && !counter_found; ++j) {
    GapInstance inst = draw_gap_instance(seed ^ 0xc0ffeeull, j);
    GapReport rep = gap_expanding_check(inst.mdp, inst.behavior, inst.q_hat,
                                        inst.q_plain, inst.mu, 0.0);
    double need = 0.0;
    for (int s = 0; s < inst.mdp.n_states; ++s)
      if (!rep.vacuous[static_cast<std::size_t>(s)])
        need = std::max(need, rep.alpha_required(s));
    if (!rep.holds && need > 0.05) {
      counter_found = true;
      counter = "alpha=0 counterinstance at draw " + std::to_string(j) +
                " needs alpha " + fmt(need);
    }
  }
  ++res.checked;
  if (!counter_found) ++res.violations;
  res.pass = res.violations == 0;
  if (res.detail.empty())
    res.detail = std::to_string(n_instances) + " instances expand; " + counter;
  return res;
}

// ---- objective equivalence ---------------------------------------------------

CheckResult check_objective_equivalence(std::uint64_t seed, int n_instances) {
  CheckResult res;
  res.name = "objective-forms-pointwise";
  double worst = 0.0;
  long matches = 0, ambiguous = 0;
  for (int i = 0; i < n_instances; ++i) {
    Rng rng(mix_seed(seed ^ 0x0b1ull, static_cast<std::uint64_t>(i)));
    RandomMdpSpec spec;
    spec.n_states = 2;
    spec.n_actions = 2;
    spec.gamma = 0.9;
    spec.reward_lo = 0.2;
    spec.reward_hi = 0.8;
    TabularMdp mdp =
        random_mdp(spec, mix_seed(seed, 80000u + static_cast<std::uint64_t>(i)));
    Policy behavior = random_policy(2, 2, rng, 3.0);
    std::optional<EmpiricalModel> model;
    for (int retry = 0; retry < 5 && !model; ++retry) {
      TransitionDataset ds = sample_dataset(
          mdp, behavior, 1200, 60,
          mix_seed(seed, 90000u + static_cast<std::uint64_t>(i) * 31u +
                             static_cast<std::uint64_t>(retry)),
          RewardNoise{RewardNoiseKind::Bernoulli, 0.0});
      EmpiricalModel m = build_empirical_model(ds, shape_of(mdp));
      if (m.unvisited_pairs.empty()) model = std::move(m);
    }
    if (!model) continue;  // grid comparison needs full empirical support
    TabularMdp hat = empirical_mdp(*model, mdp.initial_dist, mdp.id + "-hat");
    ObjectiveEquivalenceReport rep = objective_equivalence_check(
        hat, model->pi_beta_hat, 1.0, mdp.initial_dist, 0.05);
    ++res.checked;
    worst = std::max(worst, rep.max_pointwise_diff);
    matches += rep.match;
    ambiguous += rep.grid_ambiguous;
    if (rep.max_pointwise_diff > 1e-8) {
      ++res.violations;
      if (res.detail.empty())
        res.detail = "instance " + std::to_string(i) + " pointwise gap " +
                     fmt(rep.max_pointwise_diff);
    }
  }
  res.pass = res.violations == 0 && res.checked > 0;
  if (res.detail.empty())
    res.detail = "max pointwise gap " + fmt(worst) + "; argmax agreement " +
                 std::to_string(matches) + "/" + std::to_string(res.checked) + " (" +
                 std::to_string(ambiguous) + " near-ties)";
  return res;
}

// ---- safe improvement ---------------------------------------------------------

namespace {

struct SafeTask {
  std::string name;
  TabularMdp mdp;
  Policy behavior;
  RewardNoise noise;
};

std::vector<SafeTask> safe_tasks(std::uint64_t seed) {
  std::vector<SafeTask> tasks;
  {
    SafeTask t;
    t.name = "chain2-bernoulli/uniform";
    t.mdp = chain2_bernoulli();
    t.behavior = uniform_policy(2, 2);
    t.noise = RewardNoise{RewardNoiseKind::Bernoulli, 0.0};
    tasks.push_back(t);
  }
  {
    SafeTask t;
    t.name = "chain2-bernoulli/skewed";
    t.mdp = chain2_bernoulli();
    Matrix p(2, 2);
    p << 0.75, 0.25, 0.25, 0.75;
    t.behavior = Policy{p};
    t.noise = RewardNoise{RewardNoiseKind::Bernoulli, 0.0};
    tasks.push_back(t);
  }
  {
    RandomMdpSpec spec;
    spec.n_states = 3;
    spec.n_actions = 2;
    spec.gamma = 0.9;
    spec.reward_lo = 0.1;
    spec.reward_hi = 0.9;
    SafeTask t;
    t.name = "random-3x2/uniform";
    t.mdp = random_mdp(spec, mix_seed(seed, 0xabcull));
    t.behavior = uniform_policy(3, 2);
    t.noise = RewardNoise{RewardNoiseKind::Bernoulli, 0.0};
    tasks.push_back(t);
    SafeTask t2 = t;
    t2.name = "random-3x2/skewed";
    Matrix p(3, 2);
    p << 0.7, 0.3, 0.3, 0.7, 0.7, 0.3;
    t2.behavior = Policy{p};
    tasks.push_back(t2);
  }
  return tasks;
}

}  // namespace

SafeImprovementChecks check_safe_improvement(std::uint64_t seed, int n_seeds, int jobs) {
  if (n_seeds <= 0) n_seeds = 500;
  SafeImprovementChecks out;
  out.zeta.name = "safe-improvement-zeta";
  out.per_policy.name = "per-policy-return-deviation";
  const int n_transitions = 10000, horizon = 100, calib = 400;
  const double delta = 0.1, alpha = 1.0;
  std::vector<SafeTask> tasks = safe_tasks(seed);
  int per_task = std::max(1, n_seeds / static_cast<int>(tasks.size()));
  std::string dz, dp;
  for (const SafeTask& task : tasks) {
    ConcentrationConfig conc =
        estimate_concentration(task.mdp, task.behavior, n_transitions, horizon, calib,
                               delta, seed + 2000000u, task.noise);
    struct Row {
      bool zeta_holds = false, star_ok = false, beta_ok = false;
    };
    std::vector<Row> rows(static_cast<std::size_t>(per_task));
    parallel_for(per_task, jobs, [&](long i) {
      std::uint64_t s = mix_seed(seed, 0xf00dull + static_cast<std::uint64_t>(i));
      TransitionDataset ds = sample_dataset(task.mdp, task.behavior, n_transitions,
                                            horizon, s, task.noise);
      EmpiricalModel model = build_empirical_model(ds, shape_of(task.mdp));
      CqlLearnConfig cfg;
      cfg.regularizer = Regularizer::H;
      cfg.backup = LearnBackup::PolicyEval;
      cfg.actor = ActorKind::SoftGreedy;
      cfg.temperature = 1.0;
      cfg.alpha = alpha;
      cfg.iters = 40;
      cfg.policy_step = 0.5;
      LearnInput input = LearnInput::empirical(model, &task.mdp);
      LearnResult run = run_cql(cfg, input);
      Policy pi_star = mask_to_support(run.policy, model);
      SafeImprovementReport rep = zeta_bound(task.mdp, model, pi_star, conc, alpha);
      Row& row = rows[static_cast<std::size_t>(i)];
      row.zeta_holds = rep.holds;
      row.star_ok = std::abs(rep.j_pi_star_hat - rep.j_pi_star_m) <=
                    rep.per_policy_bound_pi_star + 1e-12;
      row.beta_ok = std::abs(rep.j_beta_hat - rep.j_beta_m) <=
                    rep.per_policy_bound_beta + 1e-12;
    });
    long nz = 0, vz = 0, np = 0, vp = 0;
    for (const Row& r : rows) {
      ++nz;
      vz += !r.zeta_holds;
      np += 2;
      vp += !r.star_ok;
      vp += !r.beta_ok;
    }
    out.zeta.checked += nz;
    out.zeta.violations += vz;
    out.per_policy.checked += np;
    out.per_policy.violations += vp;
    double rz = nz > 0 ? static_cast<double>(vz) / static_cast<double>(nz) : 1.0;
    double rp = np > 0 ? static_cast<double>(vp) / static_cast<double>(np) : 1.0;
    if (rz > delta) out.zeta.pass = false;
    if (rp > delta) out.per_policy.pass = false;
    dz += task.name + " fail-rate " + fmt(rz) + "; ";
    dp += task.name + " dev-rate " + fmt(rp) + "; ";
  }
  out.zeta.detail = dz + "budget " + fmt(delta);
  out.per_policy.detail = dp + "budget " + fmt(delta);
  return out;
}

// ---- linear function approximation --------------------------------------------

CheckResult check_linear_threshold(std::uint64_t seed, int n_valid) {
  CheckResult res;
  res.name = "linear-threshold-bound";
  const TabularMdp mdp = chain2();
  long skipped = 0, attempts = 0;
  const long max_attempts = 50L * n_valid;
  Rng rng(mix_seed(seed ^ 0xd1ull, 0));
  while (res.checked < n_valid && attempts < max_attempts) {
    ++attempts;
    int d = 1 + static_cast<int>(attempts % 3);
    LinearQModel fa{random_features(mdp.n_states, mdp.n_actions, d,
                                    mix_seed(seed, 0xfea7ull +
                                                       static_cast<std::uint64_t>(attempts))),
                    Vector::Zero(d)};
    Policy behavior = random_policy(mdp.n_states, mdp.n_actions, rng, 3.0);
    Policy target = random_policy(mdp.n_states, mdp.n_actions, rng, 1.0);
    Matrix q_prev(mdp.n_states, mdp.n_actions);
    for (int s = 0; s < mdp.n_states; ++s)
      for (int a = 0; a < mdp.n_actions; ++a) q_prev(s, a) = rng.uniform(-10.0, 10.0);
    QTable prev{q_prev};
    double alpha = alpha_threshold_linear(fa, mdp, behavior, target, prev);
    if (!std::isfinite(alpha)) {
      ++skipped;
      continue;
    }
    LinearQModel fit = cql_linear_iterate(fa, mdp, behavior, target, alpha, prev);
    Matrix q_hat = fit.q_table(mdp.n_states, mdp.n_actions).q;
    QTable backed = bellman_policy_op(mdp, target, prev);
    Vector d_state = discounted_state_marginal(mdp, behavior);
    double lhs = 0.0, rhs = 0.0;
    for (int s = 0; s < mdp.n_states; ++s) {
      lhs += d_state(s) * target.probs.row(s).dot(q_hat.row(s));
      rhs += d_state(s) * target.probs.row(s).dot(backed.q.row(s));
    }
    ++res.checked;
    if (lhs > rhs + 1e-9) {
      ++res.violations;
      if (res.detail.empty())
        res.detail = "attempt " + std::to_string(attempts) + " lhs " + fmt(lhs) +
                     " rhs " + fmt(rhs) + " alpha " + fmt(alpha);
    }
  }
  res.pass = res.violations == 0 && res.checked >= n_valid;
  if (res.detail.empty())
    res.detail = std::to_string(res.checked) + " bounded fits (" +
                 std::to_string(skipped) + " unbounded-threshold draws skipped)";
  return res;
}

CheckResult check_projection_penalty_sign(std::uint64_t seed, int n_draws) {
  CheckResult res;
  res.name = "projected-penalty-nonnegative";
  const TabularMdp mdp = chain2();
  Rng rng(mix_seed(seed ^ 0x51e9ull, 1));
  double worst = 0.0;
  std::string first;
  for (int i = 0; i < n_draws; ++i) {
    int d = 1 + i % 3;
    LinearQModel fa{random_features(mdp.n_states, mdp.n_actions, d,
                                    mix_seed(seed, 0xbadull + static_cast<std::uint64_t>(i))),
                    Vector::Zero(d)};
    Policy behavior = random_policy(mdp.n_states, mdp.n_actions, rng, 3.0);
    Policy target = random_policy(mdp.n_states, mdp.n_actions, rng, 1.0);
    Vector pen = projection_penalty(fa, mdp, behavior, target);
    ++res.checked;
    double lo = pen.minCoeff();
    if (lo < -1e-9) {
      ++res.violations;
      if (lo < worst) {
        worst = lo;
        int s_at = 0;
        pen.minCoeff(&s_at);
        first = "draw " + std::to_string(i) + " state " + std::to_string(s_at) +
                " value " + fmt(lo) + " (d=" + std::to_string(d) + ")";
      }
    }
  }
  res.pass = res.violations == 0;
  res.detail = res.pass
                   ? "all projected penalties nonnegative"
                   : std::to_string(res.violations) + "/" + std::to_string(res.checked) +
                         " draws negative; the projected ratio penalty is " +
                         "sign-indefinite, worst " + first;
  return res;
}

// ---- adversarial-proposal necessity --------------------------------------------

CheckResult check_nu_necessity(std::uint64_t seed, int n_draws) {
  CheckResult res;
  res.name = "mixture-penalty-necessity";
  long strict_cases = 0;
  for (int i = 0; i < n_draws; ++i) {
    Rng rng(mix_seed(seed ^ 0xddull, static_cast<std::uint64_t>(i)));
    int S = 1 + i % 3;
    int A = 2 + i % 3;
    Policy beta = random_policy(S, A, rng, 1.5);
    // matched proposal: the optimized penalty must vanish
    NuNecessityResult base = nu_necessity_search(beta, beta);
    ++res.checked;
    if (std::abs(base.min_penalty) > 1e-12) {
      ++res.violations;
      if (res.detail.empty())
        res.detail = "draw " + std::to_string(i) + " matched proposal penalty " +
                     fmt(base.min_penalty);
      continue;
    }
    Policy nu = random_policy(S, A, rng, 1.0);
    double tv = 0.0;
    for (int s = 0; s < S; ++s)
      tv = std::max(tv, 0.5 * (nu.probs.row(s) - beta.probs.row(s)).cwiseAbs().sum());
    if (tv < 0.05) continue;
    ++strict_cases;
    NuNecessityResult rep = nu_necessity_search(beta, nu);
    ++res.checked;
    if (rep.min_penalty >= -1e-9) {
      ++res.violations;
      if (res.detail.empty())
        res.detail = "draw " + std::to_string(i) + " tv " + fmt(tv) +
                     " min penalty " + fmt(rep.min_penalty);
    }
  }
  res.pass = res.violations == 0 && strict_cases > 0;
  if (res.detail.empty())
    res.detail = std::to_string(strict_cases) + " displaced proposals strictly negative";
  return res;
}

// ---- oracle cross-checks ---------------------------------------------------------

CheckResult check_exact_vs_sweeps(std::uint64_t seed, int n_instances) {
  CheckResult res;
  res.name = "direct-solve-vs-sweeps";
  double worst = 0.0;
  for (int i = 0; i < n_instances; ++i) {
    Rng rng(mix_seed(seed ^ 0xabull, static_cast<std::uint64_t>(i)));
    RandomMdpSpec spec;
    spec.n_states = 2 + static_cast<int>(rng.uniform() * 5.0);
    spec.n_actions = 2 + static_cast<int>(rng.uniform() * 2.0);
    spec.gamma = 0.9;
    TabularMdp mdp =
        (i == 0) ? chain2()
                 : random_mdp(spec, mix_seed(seed, 0x77ull + static_cast<std::uint64_t>(i)));
    Policy target = random_policy(mdp.n_states, mdp.n_actions, rng, 1.0);
    QTable direct = exact_q(mdp, target);
    QTable q(mdp.n_states, mdp.n_actions);
    for (int k = 0; k < 10000; ++k) q = bellman_policy_op(mdp, target, q);
    ++res.checked;
    double diff = (direct.q - q.q).cwiseAbs().maxCoeff();
    worst = std::max(worst, diff);
    if (diff > 1e-6) {
      ++res.violations;
      if (res.detail.empty())
        res.detail = "instance " + std::to_string(i) + " diff " + fmt(diff);
    }
  }
  res.pass = res.violations == 0;
  if (res.detail.empty()) res.detail = "max solve-vs-sweep gap " + fmt(worst);
  return res;
}

CheckResult check_tabular_feature_reduction(std::uint64_t seed, int n_instances) {
  CheckResult res;
  res.name = "identity-features-match-tabular";
  double worst = 0.0;
  for (int i = 0; i < n_instances; ++i) {
    Rng rng(mix_seed(seed ^ 0xfeull, static_cast<std::uint64_t>(i)));
    RandomMdpSpec spec;
    spec.n_states = 2 + static_cast<int>(rng.uniform() * 3.0);
    spec.n_actions = 2;
    spec.gamma = 0.9;
    TabularMdp mdp =
        (i == 0) ? chain2()
                 : random_mdp(spec, mix_seed(seed, 0x99ull + static_cast<std::uint64_t>(i)));
    Policy behavior = random_policy(mdp.n_states, mdp.n_actions, rng, 3.0);
    Policy target = random_policy(mdp.n_states, mdp.n_actions, rng, 1.0);
    Matrix q_prev(mdp.n_states, mdp.n_actions);
    for (int s = 0; s < mdp.n_states; ++s)
      for (int a = 0; a < mdp.n_actions; ++a) q_prev(s, a) = rng.uniform(-5.0, 5.0);
    QTable prev{q_prev};
    int sa = mdp.n_states * mdp.n_actions;
    LinearQModel fa{Matrix::Identity(sa, sa), Vector::Zero(sa)};
    double alpha = 0.5;
    LinearQModel fit = cql_linear_iterate(fa, mdp, behavior, target, alpha, prev);
    Matrix q_lin = fit.q_table(mdp.n_states, mdp.n_actions).q;
    CqlEvalConfig cfg;
    cfg.alpha = alpha;
    cfg.mu = target;
    cfg.variant = CqlVariant::Eq2;
    cfg.backup = BackupMode::Exact;
    QTable q_tab = cql_eq2_iterate(cfg, EvalInput::exact(mdp, behavior), target, prev);
    ++res.checked;
    double diff = (q_lin - q_tab.q).cwiseAbs().maxCoeff();
    worst = std::max(worst, diff);
    if (diff > 1e-9) {
      ++res.violations;
      if (res.detail.empty())
        res.detail = "instance " + std::to_string(i) + " diff " + fmt(diff);
    }
  }
  res.pass = res.violations == 0;
  if (res.detail.empty()) res.detail = "max reduction gap " + fmt(worst);
  return res;
}

CheckResult check_entropy_gap(std::uint64_t seed, long n_rows) {
  CheckResult res;
  res.name = "entropy-weighted-gap-nonnegative";
  Rng rng(mix_seed(seed ^ 0xe6ull, 2));
  for (long i = 0; i < n_rows; ++i) {
    int A = 2 + static_cast<int>(i % 5);
    Vector q(A), beta(A);
    double bsum = 0.0;
    for (int a = 0; a < A; ++a) {
      q(a) = rng.uniform(-20.0, 20.0);
      beta(a) = rng.gamma(1.0) + 1e-12;
      bsum += beta(a);
    }
    beta /= bsum;
    double mx = q.maxCoeff();
    double lse = mx + std::log((q.array() - mx).exp().sum());
    double expected = beta.dot(q);
    ++res.checked;
    if (lse < expected - 1e-9) {
      ++res.violations;
      if (res.detail.empty())
        res.detail = "row " + std::to_string(i) + " logsumexp " + fmt(lse) +
                     " below data mean " + fmt(expected);
    }
  }
  res.pass = res.violations == 0;
  if (res.detail.empty())
    res.detail = std::to_string(res.checked) + " rows, soft value never below data mean";
  return res;
}

// ---- overestimation contrast -------------------------------------------------

namespace {

struct ContrastTask {
  std::string name;
  std::function<TabularMdp(std::uint64_t)> make_mdp;
  int n_transitions = 0;
  int horizon = 0;
};

Matrix naive_fitted_q(const EmpiricalModel& model, double gamma, int iters) {
  int S = model.shape.n_states, A = model.shape.n_actions;
  Matrix q = Matrix::Zero(S, A);
  for (int k = 0; k < iters; ++k) {
    Vector v(S);
    for (int s = 0; s < S; ++s) v(s) = q.row(s).maxCoeff();
    Matrix next = Matrix::Zero(S, A);
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        if (!model.visited(s, a)) continue;  // untouched pairs stay at init
        int idx = sa_index(s, a, A);
        next(s, a) = model.r_hat(s, a) + gamma * model.t_hat.row(idx).dot(v);
      }
    q = next;
  }
  return q;
}

struct ContrastOutcome {
  double naive = 0.0, eq1 = 0.0, eq2 = 0.0;
};

ContrastOutcome run_contrast_seed(const ContrastTask& task, std::uint64_t base,
                                  std::uint64_t i) {
  TabularMdp mdp = task.make_mdp(mix_seed(base, 0x600dull + i));
  Policy behavior = uniform_policy(mdp.n_states, mdp.n_actions);
  TransitionDataset ds = sample_dataset(mdp, behavior, task.n_transitions,
                                        task.horizon, mix_seed(base, 0xda7aull + i),
                                        RewardNoise{RewardNoiseKind::Bernoulli, 0.0});
  EmpiricalModel model = build_empirical_model(ds, shape_of(mdp));

  ContrastOutcome out;
  // naive fitted iteration, greedy readout
  Matrix q_naive = naive_fitted_q(model, mdp.gamma, 800);
  Policy greedy = greedy_policy_from_q(QTable{q_naive});
  double est = 0.0;
  for (int s = 0; s < mdp.n_states; ++s)
    est += mdp.initial_dist(s) * greedy.probs.row(s).dot(q_naive.row(s));
  out.naive = est - return_j(mdp, greedy);

  // penalized evaluation of the conservatively learned policy
  CqlLearnConfig cfg;
  cfg.regularizer = Regularizer::H;
  cfg.backup = LearnBackup::PolicyEval;
  cfg.actor = ActorKind::SoftGreedy;
  cfg.temperature = 1.0;
  cfg.alpha = 1.0;
  cfg.iters = 40;
  cfg.policy_step = 0.5;
  LearnInput input = LearnInput::empirical(model, nullptr);
  LearnResult run = run_cql(cfg, input);
  Policy pi_star = mask_to_support(run.policy, model);
  double truth_star = return_j(mdp, pi_star);
  for (CqlVariant variant : {CqlVariant::Eq2, CqlVariant::Eq1}) {
    CqlEvalConfig ecfg;
    ecfg.alpha = 1.0;
    ecfg.mu = pi_star;
    ecfg.variant = variant;
    ecfg.backup = BackupMode::Empirical;
    FixedPointResult fp = cql_fixed_point(ecfg, EvalInput::empirical(model), pi_star);
    double est_pen = 0.0;
    for (int s = 0; s < mdp.n_states; ++s)
      est_pen += mdp.initial_dist(s) * pi_star.probs.row(s).dot(fp.q.q.row(s));
    double gap = est_pen - truth_star;
    if (variant == CqlVariant::Eq2)
      out.eq2 = gap;
    else
      out.eq1 = gap;
  }
  return out;
}

}  // namespace

OverestimationTable overestimation_table(std::uint64_t seed, int seeds_per_task,
                                         int jobs) {
  if (seeds_per_task <= 0) seeds_per_task = 200;
  std::vector<ContrastTask> tasks;
  {
    ContrastTask t;
    t.name = "near-tie-random-4x4";
    t.make_mdp = [](std::uint64_t s) {
      RandomMdpSpec spec;
      spec.n_states = 4;
      spec.n_actions = 4;
      spec.gamma = 0.95;
      spec.reward_lo = 0.4;
      spec.reward_hi = 0.6;
      return random_mdp(spec, s);
    };
    t.n_transitions = 300;
    t.horizon = 40;
    tasks.push_back(t);
  }
  {
    ContrastTask t;
    t.name = "gridworld-4x4-slip";
    t.make_mdp = [](std::uint64_t) { return gridworld(GridworldSpec{}); };
    t.n_transitions = 2000;
    t.horizon = 60;
    tasks.push_back(t);
  }
  OverestimationTable table;
  for (const ContrastTask& task : tasks) {
    std::vector<ContrastOutcome> outs(static_cast<std::size_t>(seeds_per_task));
    parallel_for(seeds_per_task, jobs, [&](long i) {
      outs[static_cast<std::size_t>(i)] =
          run_contrast_seed(task, seed, static_cast<std::uint64_t>(i));
    });
    std::vector<double> naive, e1, e2;
    naive.reserve(outs.size());
    e1.reserve(outs.size());
    e2.reserve(outs.size());
    for (const ContrastOutcome& o : outs) {
      naive.push_back(o.naive);
      e1.push_back(o.eq1);
      e2.push_back(o.eq2);
    }
    OverestimationRow row;
    row.task = task.name;
    row.seeds = seeds_per_task;
    row.mean_naive = mean_of(naive);
    row.se_naive = se_of(naive);
    row.mean_eq1 = mean_of(e1);
    row.se_eq1 = se_of(e1);
    row.mean_eq2 = mean_of(e2);
    row.se_eq2 = se_of(e2);
    table.rows.push_back(row);
  }
  return table;
}

CheckResult check_overestimation_contrast(std::uint64_t seed, int seeds_per_task,
                                          int jobs) {
  CheckResult res;
  res.name = "overestimation-contrast";
  OverestimationTable table = overestimation_table(seed, seeds_per_task, jobs);
  std::string detail;
  for (const OverestimationRow& row : table.rows) {
    ++res.checked;
    bool ok = row.mean_naive > 0.0 && row.mean_eq2 < 0.0 && row.mean_eq1 < row.mean_eq2;
    if (!ok) ++res.violations;
    detail += row.task + ": naive " + fmt(row.mean_naive) + "+-" + fmt(row.se_naive) +
              ", eq2 " + fmt(row.mean_eq2) + "+-" + fmt(row.se_eq2) + ", eq1 " +
              fmt(row.mean_eq1) + "+-" + fmt(row.se_eq1) + "; ";
  }
  res.pass = res.violations == 0;
  res.detail = detail;
  return res;
}

// ---- suites ------------------------------------------------------------------

namespace {

int pick(int requested, int fallback) { return requested > 0 ? requested : fallback; }

}  // namespace

SuiteResult verify_eq1_bound(const VerifyOptions& opt) {
  Timer timer;
  SuiteResult suite;
  suite.suite = "T1";
  suite.add(check_eq1_exact(opt.base_seed, pick(opt.n_seeds, 200), opt.alpha_override));
  suite.add(check_sampling_regime(opt.base_seed, pick(opt.n_seeds, 500), opt.jobs).eq1);
  suite.seconds = timer.elapsed();
  return suite;
}

SuiteResult verify_eq2_bound(const VerifyOptions& opt) {
  Timer timer;
  SuiteResult suite;
  suite.suite = "T2";
  suite.add(check_eq2_exact(opt.base_seed, pick(opt.n_seeds, 200), opt.alpha_override));
  suite.add(check_eq2_witness(opt.base_seed));
  suite.add(check_sampling_regime(opt.base_seed, pick(opt.n_seeds, 500), opt.jobs).eq2);
  suite.seconds = timer.elapsed();
  return suite;
}

SuiteResult verify_learning_bound(const VerifyOptions& opt) {
  Timer timer;
  SuiteResult suite;
  suite.suite = "T3";
  suite.add(check_learning_bound(opt.base_seed, pick(opt.n_seeds, 50), 40));
  suite.seconds = timer.elapsed();
  return suite;
}

SuiteResult verify_gap_expansion(const VerifyOptions& opt) {
  Timer timer;
  SuiteResult suite;
  suite.suite = "T4";
  suite.add(check_gap_expansion(opt.base_seed, pick(opt.n_seeds, 200)));
  suite.seconds = timer.elapsed();
  return suite;
}

SuiteResult verify_objective_equivalence(const VerifyOptions& opt) {
  Timer timer;
  SuiteResult suite;
  suite.suite = "T5";
  suite.add(check_objective_equivalence(opt.base_seed, pick(opt.n_seeds, 50)));
  suite.seconds = timer.elapsed();
  return suite;
}

SuiteResult verify_safe_improvement(const VerifyOptions& opt) {
  Timer timer;
  SuiteResult suite;
  suite.suite = "T6";
  SafeImprovementChecks checks =
      check_safe_improvement(opt.base_seed, pick(opt.n_seeds, 500), opt.jobs);
  suite.add(checks.zeta);
  suite.add(checks.per_policy);
  suite.seconds = timer.elapsed();
  return suite;
}

SuiteResult verify_linear_fa(const VerifyOptions& opt) {
  Timer timer;
  SuiteResult suite;
  suite.suite = "D1";
  suite.add(check_linear_threshold(opt.base_seed, pick(opt.n_seeds, 100)));
  suite.add(check_projection_penalty_sign(
      opt.base_seed, opt.n_seeds > 0 ? opt.n_seeds * 100 : 10000));
  suite.seconds = timer.elapsed();
  return suite;
}

SuiteResult verify_nu_necessity(const VerifyOptions& opt) {
  Timer timer;
  SuiteResult suite;
  suite.suite = "D3";
  suite.add(check_nu_necessity(opt.base_seed, pick(opt.n_seeds, 1000)));
  suite.seconds = timer.elapsed();
  return suite;
}

SuiteResult verify_oracles(const VerifyOptions& opt) {
  Timer timer;
  SuiteResult suite;
  suite.suite = "oracles";
  suite.add(check_exact_vs_sweeps(opt.base_seed, pick(opt.n_seeds, 20)));
  suite.add(check_tabular_feature_reduction(opt.base_seed, pick(opt.n_seeds, 20)));
  suite.add(check_entropy_gap(opt.base_seed, 100000));
  suite.seconds = timer.elapsed();
  return suite;
}

// ---- serialization --------------------------------------------------------------

std::string suite_to_json(const SuiteResult& suite) {
  nlohmann::json j;
  j["suite"] = suite.suite;
  j["pass"] = suite.pass;
  j["seconds"] = suite.seconds;
  j["checks"] = nlohmann::json::array();
  for (const CheckResult& c : suite.checks) {
    nlohmann::json jc;
    jc["name"] = c.name;
    jc["pass"] = c.pass;
    jc["checked"] = c.checked;
    jc["violations"] = c.violations;
    jc["detail"] = c.detail;
    j["checks"].push_back(jc);
  }
  return j.dump(2) + "\n";
}

std::string suite_to_text(const SuiteResult& suite) {
  std::ostringstream os;
  os << "suite " << suite.suite << ": " << (suite.pass ? "PASS" : "FAIL") << " ("
     << fmt(suite.seconds) << "s)\n";
  for (const CheckResult& c : suite.checks) {
    os << "  [" << (c.pass ? "PASS" : "FAIL") << "] " << c.name << " ("
       << c.violations << "/" << c.checked << " violations) " << c.detail << "\n";
  }
  return os.str();
}

std::string table_to_csv(const OverestimationTable& table) {
  std::ostringstream os;
  os << "task,seeds,mean_naive,se_naive,mean_eq2,se_eq2,mean_eq1,se_eq1\n";
  os.precision(17);
  for (const OverestimationRow& row : table.rows) {
    os << row.task << "," << row.seeds << "," << row.mean_naive << "," << row.se_naive
       << "," << row.mean_eq2 << "," << row.se_eq2 << "," << row.mean_eq1 << ","
       << row.se_eq1 << "\n";
  }
  return os.str();
}

}  // namespace cql
