#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cql/analysis.hpp"
#include "cql/cql_eval.hpp"
#include "cql/cql_learn.hpp"
#include "cql/datasets.hpp"
#include "cql/generators.hpp"
#include "cql/io.hpp"
#include "cql/linear_fa.hpp"
#include "cql/mdp_core.hpp"
#include "cql/types.hpp"
#include "cql/verify.hpp"

namespace {

namespace fs = std::filesystem;

std::string default_out_dir() {
  const char* env = std::getenv("CQL_OUT_DIR");
  return env && *env ? std::string(env) : std::string(".");
}

std::string join_out(const std::string& dir, const std::string& name) {
  fs::path p = fs::path(dir) / name;
  return p.string();
}

void ensure_parent(const std::string& path) {
  fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

// "7" -> {7}; "3:8" -> {3..7}; "1,5,9" -> {1,5,9}
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  if (text.find(':') != std::string::npos) {
    auto cut = text.find(':');
    std::uint64_t lo = std::stoull(text.substr(0, cut));
    std::uint64_t hi = std::stoull(text.substr(cut + 1));
    if (hi <= lo) throw std::invalid_argument("--seeds range must satisfy lo < hi");
    if (hi - lo > 1000000) throw std::invalid_argument("--seeds range too large");
    for (std::uint64_t s = lo; s < hi; ++s) seeds.push_back(s);
    return seeds;
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    auto cut = text.find(',', start);
    std::string piece =
        cut == std::string::npos ? text.substr(start) : text.substr(start, cut - start);
    if (!piece.empty()) seeds.push_back(std::stoull(piece));
    if (cut == std::string::npos) break;
    start = cut + 1;
  }
  if (seeds.empty()) throw std::invalid_argument("--seeds parsed to an empty list");
  return seeds;
}

nlohmann::json policy_to_json_obj(const cql::Policy& p) {
  nlohmann::json j;
  j["n_states"] = p.n_states();
  j["n_actions"] = p.n_actions();
  std::vector<double> probs;
  probs.reserve(static_cast<std::size_t>(p.n_states() * p.n_actions()));
  for (int s = 0; s < p.n_states(); ++s)
    for (int a = 0; a < p.n_actions(); ++a) probs.push_back(p.probs(s, a));
  j["probs"] = probs;
  return j;
}

cql::Policy policy_from_file(const std::string& path) {
  nlohmann::json j = nlohmann::json::parse(cql::read_text_file(path));
  int S = j.at("n_states").get<int>();
  int A = j.at("n_actions").get<int>();
  std::vector<double> probs = j.at("probs").get<std::vector<double>>();
  if (static_cast<int>(probs.size()) != S * A)
    throw std::invalid_argument("policy file: probs length != n_states * n_actions");
  cql::Matrix m(S, A);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) m(s, a) = probs[static_cast<std::size_t>(s * A + a)];
  return cql::Policy{m};
}

void write_policy_file(const std::string& path, const cql::Policy& p) {
  ensure_parent(path);
  cql::write_text_file(path, policy_to_json_obj(p).dump(2) + "\n");
}

void write_q_file(const std::string& path, const cql::QTable& q) {
  nlohmann::json j;
  j["n_states"] = static_cast<int>(q.q.rows());
  j["n_actions"] = static_cast<int>(q.q.cols());
  std::vector<double> vals;
  vals.reserve(static_cast<std::size_t>(q.q.size()));
  for (int s = 0; s < q.q.rows(); ++s)
    for (int a = 0; a < q.q.cols(); ++a) vals.push_back(q.q(s, a));
  j["q"] = vals;
  ensure_parent(path);
  cql::write_text_file(path, j.dump(2) + "\n");
}

cql::RewardNoise noise_from_flags(const std::string& kind, double width) {
  if (kind == "none") return {cql::RewardNoiseKind::None, 0.0};
  if (kind == "bernoulli") return {cql::RewardNoiseKind::Bernoulli, 0.0};
  return {cql::RewardNoiseKind::Uniform, width};
}

// ---- gen-mdp ----------------------------------------------------------------

struct GenMdpArgs {
  std::string kind;
  int width = 4, height = 4;
  int states = 5, actions = 3, branching = 0;
  double gamma = 0.0;  // 0 keeps the kind's default
  double slip = 0.2, goal_reward = 0.9;
  double r_max = 1.0, reward_lo = 0.0, reward_hi = 1.0;
  std::uint64_t seed = 1;
  std::string out;
};

int run_gen_mdp(const GenMdpArgs& a) {
  cql::TabularMdp mdp;
  if (a.kind == "chain2") {
    mdp = cql::chain2();
  } else if (a.kind == "chain2-bernoulli") {
    mdp = cql::chain2_bernoulli();
  } else if (a.kind == "gridworld") {
    cql::GridworldSpec spec;
    spec.width = a.width;
    spec.height = a.height;
    spec.slip = a.slip;
    spec.goal_reward = a.goal_reward;
    if (a.gamma > 0.0) spec.gamma = a.gamma;
    mdp = cql::gridworld(spec);
  } else {
    cql::RandomMdpSpec spec;
    spec.n_states = a.states;
    spec.n_actions = a.actions;
    spec.branching = a.branching;
    if (a.gamma > 0.0) spec.gamma = a.gamma;
    spec.r_max = a.r_max;
    spec.reward_lo = a.reward_lo;
    spec.reward_hi = a.reward_hi;
    mdp = cql::random_mdp(spec, a.seed);
  }
  std::string out = a.out.empty() ? join_out(default_out_dir(), mdp.id + ".json") : a.out;
  ensure_parent(out);
  cql::save_mdp(mdp, out);
  std::cout << "wrote " << out << " (" << mdp.n_states << " states, " << mdp.n_actions
            << " actions)\n";
  return 0;
}

// ---- gen-dataset ------------------------------------------------------------

struct GenDatasetArgs {
  std::string mdp_path;
  std::string behavior_path;
  int n = 1000;
  int horizon = 100;
  std::string seeds = "1";
  std::string noise = "none";
  double noise_width = 0.0;
  std::string out;
};

int run_gen_dataset(const GenDatasetArgs& a) {
  cql::TabularMdp mdp = cql::load_mdp(a.mdp_path);
  cql::Policy behavior = a.behavior_path.empty()
                             ? cql::uniform_policy(mdp.n_states, mdp.n_actions)
                             : policy_from_file(a.behavior_path);
  std::vector<std::uint64_t> seeds = parse_seeds(a.seeds);
  cql::RewardNoise noise = noise_from_flags(a.noise, a.noise_width);
  for (std::uint64_t seed : seeds) {
    cql::TransitionDataset ds =
        cql::sample_dataset(mdp, behavior, a.n, a.horizon, seed, noise);
    std::string out;
    if (!a.out.empty() && seeds.size() == 1) {
      out = a.out;
    } else {
      std::string stem = a.out.empty()
                             ? join_out(default_out_dir(), "dataset")
                             : a.out;
      out = stem + "_s" + std::to_string(seed) + ".csv";
    }
    ensure_parent(out);
    cql::save_dataset(ds, out);
    std::cout << "wrote " << out << " (" << ds.tuples.size() << " transitions)\n";
  }
  return 0;
}

// ---- eval -------------------------------------------------------------------

struct EvalArgs {
  std::string mdp_path;
  std::string dataset_path;
  std::string behavior_path;
  std::string target_path;
  std::string mu_path;
  double alpha = 1.0;
  std::string variant = "eq2";
  bool counts_weighted = false;
  double tol = 1e-9;
  double c_r = 0.0, c_t = 0.0, delta = 0.1;
  std::string out;
};

int run_eval(const EvalArgs& a) {
  cql::TabularMdp mdp = cql::load_mdp(a.mdp_path);
  cql::Policy target = a.target_path.empty()
                           ? cql::uniform_policy(mdp.n_states, mdp.n_actions)
                           : policy_from_file(a.target_path);
  cql::CqlEvalConfig cfg;
  cfg.alpha = a.alpha;
  cfg.mu = a.mu_path.empty() ? target : policy_from_file(a.mu_path);
  cfg.variant = a.variant == "eq1" ? cql::CqlVariant::Eq1 : cql::CqlVariant::Eq2;
  cfg.counts_weighted_alpha = a.counts_weighted;

  std::optional<cql::EmpiricalModel> model;
  cql::Policy behavior;
  cql::EvalInput input;
  if (!a.dataset_path.empty()) {
    cfg.backup = cql::BackupMode::Empirical;
    cql::TransitionDataset ds = cql::load_dataset(a.dataset_path);
    model = cql::build_empirical_model(ds, cql::shape_of(mdp));
    input = cql::EvalInput::empirical(*model);
  } else {
    cfg.backup = cql::BackupMode::Exact;
    behavior = a.behavior_path.empty()
                   ? cql::uniform_policy(mdp.n_states, mdp.n_actions)
                   : policy_from_file(a.behavior_path);
    input = cql::EvalInput::exact(mdp, behavior);
  }
  cql::ConcentrationConfig conc{a.c_r, a.c_t, a.delta};
  cql::EvalReport rep = cql::make_eval_report(cfg, input, target, mdp, conc, a.tol);
  std::string out = a.out.empty() ? join_out(default_out_dir(), "eval_report.json") : a.out;
  ensure_parent(out);
  cql::write_text_file(out, cql::eval_report_to_json(rep));
  std::cout << "wrote " << out << "; max gap " << rep.gap.maxCoeff() << "; "
            << (rep.violated ? "VIOLATED" : "bounded") << "\n";
  return rep.violated ? 1 : 0;
}

// ---- learn ------------------------------------------------------------------

struct LearnArgs {
  std::string mdp_path;
  std::string dataset_path;
  std::string behavior_path;
  std::string regularizer = "h";
  std::string rho_prior = "uniform";
  std::string var_weight = "uniform";
  double robust_delta = 0.1;
  std::string alpha_mode = "fixed";
  double alpha = 1.0;
  double tau = 1.0;
  double dual_step = 0.1;
  std::string backup = "policy-eval";
  std::string actor = "soft-greedy";
  double temperature = 1.0;
  int iters = 50;
  double policy_step = 0.5;
  std::string out;
};

int run_learn(const LearnArgs& a) {
  cql::TabularMdp mdp = cql::load_mdp(a.mdp_path);
  cql::CqlLearnConfig cfg;
  if (a.regularizer == "h")
    cfg.regularizer = cql::Regularizer::H;
  else if (a.regularizer == "rho")
    cfg.regularizer = cql::Regularizer::Rho;
  else
    cfg.regularizer = cql::Regularizer::Var;
  if (a.rho_prior == "uniform")
    cfg.rho_prior = cql::RhoPrior::Uniform;
  else if (a.rho_prior == "previous")
    cfg.rho_prior = cql::RhoPrior::PreviousPolicy;
  else
    cfg.rho_prior = cql::RhoPrior::Behavior;
  cfg.var_weight = a.var_weight == "uniform" ? cql::VarWeight::Uniform
                                             : cql::VarWeight::InverseCounts;
  cfg.robust_delta = a.robust_delta;
  cfg.alpha_mode =
      a.alpha_mode == "lagrange" ? cql::AlphaMode::Lagrange : cql::AlphaMode::Fixed;
  cfg.alpha = a.alpha;
  cfg.tau = a.tau;
  cfg.dual_step = a.dual_step;
  cfg.backup = a.backup == "optimality" ? cql::LearnBackup::Optimality
                                        : cql::LearnBackup::PolicyEval;
  cfg.actor = a.actor == "greedy" ? cql::ActorKind::Greedy : cql::ActorKind::SoftGreedy;
  cfg.temperature = a.temperature;
  cfg.iters = a.iters;
  cfg.policy_step = a.policy_step;

  std::optional<cql::EmpiricalModel> model;
  cql::Policy behavior;
  cql::LearnInput input;
  if (!a.dataset_path.empty()) {
    cql::TransitionDataset ds = cql::load_dataset(a.dataset_path);
    model = cql::build_empirical_model(ds, cql::shape_of(mdp));
    input = cql::LearnInput::empirical(*model, &mdp);
  } else {
    behavior = a.behavior_path.empty()
                   ? cql::uniform_policy(mdp.n_states, mdp.n_actions)
                   : policy_from_file(a.behavior_path);
    input = cql::LearnInput::exact(mdp, behavior);
  }
  cql::LearnResult res = cql::run_cql(cfg, input);
  std::string dir = a.out.empty() ? default_out_dir() : a.out;
  fs::create_directories(dir);
  cql::write_text_file(join_out(dir, "learn_trace.csv"), cql::trace_to_csv(res.trace));
  write_policy_file(join_out(dir, "learn_policy.json"), res.policy);
  write_q_file(join_out(dir, "learn_q.json"), res.q);
  const cql::LearnTraceRow& last = res.trace.rows.back();
  std::cout << "wrote " << dir << "/learn_{trace.csv,policy.json,q.json}; final gap "
            << last.gap << ", model return " << last.j_hat_m << "\n";
  return 0;
}

// ---- verify -----------------------------------------------------------------

struct VerifyArgs {
  std::string theorem;
  std::string seeds = "1";
  int jobs = 0;
  double alpha = -1.0;
  std::string format = "text";
  std::string out;
};

int run_verify(const VerifyArgs& a) {
  std::vector<std::uint64_t> seeds = parse_seeds(a.seeds);
  cql::VerifyOptions opt;
  opt.base_seed = seeds.front();
  opt.n_seeds = seeds.size() > 1 ? static_cast<int>(seeds.size()) : 0;
  opt.jobs = a.jobs;
  opt.alpha_override = a.alpha;
  std::vector<std::string> ids;
  if (a.theorem == "all")
    ids = {"T1", "T2", "T3", "T4", "T5", "T6", "D1", "D3", "oracles"};
  else
    ids = {a.theorem};
  std::vector<cql::SuiteResult> suites;
  for (const std::string& id : ids) {
    if (id == "T1")
      suites.push_back(cql::verify_eq1_bound(opt));
    else if (id == "T2")
      suites.push_back(cql::verify_eq2_bound(opt));
    else if (id == "T3")
      suites.push_back(cql::verify_learning_bound(opt));
    else if (id == "T4")
      suites.push_back(cql::verify_gap_expansion(opt));
    else if (id == "T5")
      suites.push_back(cql::verify_objective_equivalence(opt));
    else if (id == "T6")
      suites.push_back(cql::verify_safe_improvement(opt));
    else if (id == "D1")
      suites.push_back(cql::verify_linear_fa(opt));
    else if (id == "D3")
      suites.push_back(cql::verify_nu_necessity(opt));
    else
      suites.push_back(cql::verify_oracles(opt));
  }
  bool all_pass = true;
  std::string text, json_all = "[\n";
  for (std::size_t i = 0; i < suites.size(); ++i) {
    all_pass = all_pass && suites[i].pass;
    text += cql::suite_to_text(suites[i]);
    std::string j = cql::suite_to_json(suites[i]);
    if (!j.empty() && j.back() == '\n') j.pop_back();
    json_all += j + (i + 1 < suites.size() ? ",\n" : "\n");
  }
  json_all += "]\n";
  std::cout << text;
  if (!a.out.empty()) {
    ensure_parent(a.out);
    cql::write_text_file(a.out, a.format == "json" ? json_all : text);
    std::cout << "wrote " << a.out << "\n";
  }
  return all_pass ? 0 : 1;
}

// ---- report -----------------------------------------------------------------

struct ReportArgs {
  std::string seeds = "1";
  int jobs = 0;
  std::string format = "csv";
  std::string out;
};

int run_report(const ReportArgs& a) {
  std::vector<std::uint64_t> seeds = parse_seeds(a.seeds);
  int per_task = seeds.size() > 1 ? static_cast<int>(seeds.size()) : 200;
  cql::OverestimationTable table =
      cql::overestimation_table(seeds.front(), per_task, a.jobs);
  std::string csv = cql::table_to_csv(table);
  std::cout << csv;
  std::string out = a.out.empty()
                        ? join_out(default_out_dir(), a.format == "json"
                                                          ? "overestimation.json"
                                                          : "overestimation.csv")
                        : a.out;
  ensure_parent(out);
  if (a.format == "json") {
    nlohmann::json j = nlohmann::json::array();
    for (const cql::OverestimationRow& row : table.rows) {
      nlohmann::json r;
      r["task"] = row.task;
      r["seeds"] = row.seeds;
      r["mean_naive"] = row.mean_naive;
      r["se_naive"] = row.se_naive;
      r["mean_eq2"] = row.mean_eq2;
      r["se_eq2"] = row.se_eq2;
      r["mean_eq1"] = row.mean_eq1;
      r["se_eq1"] = row.se_eq1;
      j.push_back(r);
    }
    cql::write_text_file(out, j.dump(2) + "\n");
  } else {
    cql::write_text_file(out, csv);
  }
  std::cout << "wrote " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conservative value estimation toolkit: penalized fixed points, "
               "offline policy learning, and bound verification on tabular MDPs"};
  app.require_subcommand(1);
  int exit_code = 0;

  GenMdpArgs gm;
  CLI::App* gen_mdp = app.add_subcommand("gen-mdp", "Write an MDP JSON file");
  gen_mdp->add_option("--kind", gm.kind, "chain2|chain2-bernoulli|gridworld|random")
      ->required()
      ->check(CLI::IsMember({"chain2", "chain2-bernoulli", "gridworld", "random"}));
  gen_mdp->add_option("--width", gm.width, "gridworld width")->check(CLI::PositiveNumber);
  gen_mdp->add_option("--height", gm.height, "gridworld height")->check(CLI::PositiveNumber);
  gen_mdp->add_option("--slip", gm.slip, "gridworld slip probability");
  gen_mdp->add_option("--goal-reward", gm.goal_reward, "gridworld goal reward");
  gen_mdp->add_option("--states", gm.states, "random MDP states")->check(CLI::PositiveNumber);
  gen_mdp->add_option("--actions", gm.actions, "random MDP actions")->check(CLI::PositiveNumber);
  gen_mdp->add_option("--branching", gm.branching, "successors per pair; 0 = dense");
  gen_mdp->add_option("--gamma", gm.gamma, "discount override");
  gen_mdp->add_option("--r-max", gm.r_max, "reward bound (random kind)");
  gen_mdp->add_option("--reward-lo", gm.reward_lo, "reward range low (random kind)");
  gen_mdp->add_option("--reward-hi", gm.reward_hi, "reward range high (random kind)");
  gen_mdp->add_option("--seed", gm.seed, "generator seed (random kind)");
  gen_mdp->add_option("--out", gm.out, "output file");
  gen_mdp->callback([&] { exit_code = run_gen_mdp(gm); });

  GenDatasetArgs gd;
  CLI::App* gen_ds = app.add_subcommand("gen-dataset", "Sample a transition dataset CSV");
  gen_ds->add_option("--mdp", gd.mdp_path, "MDP JSON file")->required()
      ->check(CLI::ExistingFile);
  gen_ds->add_option("--behavior-file", gd.behavior_path, "behavior policy JSON")
      ->check(CLI::ExistingFile);
  gen_ds->add_option("--n", gd.n, "transitions per dataset")->check(CLI::PositiveNumber);
  gen_ds->add_option("--horizon", gd.horizon, "episode cut length")->check(CLI::PositiveNumber);
  gen_ds->add_option("--seeds", gd.seeds, "seed, comma list, or lo:hi range");
  gen_ds->add_option("--noise", gd.noise, "reward sampling model")
      ->check(CLI::IsMember({"none", "bernoulli", "uniform"}));
  gen_ds->add_option("--noise-width", gd.noise_width, "uniform noise half width");
  gen_ds->add_option("--out", gd.out, "output file (single seed) or prefix");
  gen_ds->callback([&] { exit_code = run_gen_dataset(gd); });

  EvalArgs ev;
  CLI::App* eval_cmd = app.add_subcommand(
      "eval", "Penalized fixed-point evaluation; exit 1 if the bound is violated");
  eval_cmd->add_option("--mdp", ev.mdp_path, "reference MDP JSON")->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--dataset", ev.dataset_path,
                       "dataset CSV; selects the empirical backup")
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--behavior-file", ev.behavior_path,
                       "behavior policy JSON (exact backup)")
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--target-file", ev.target_path, "target policy JSON")
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--mu-file", ev.mu_path, "penalty distribution JSON")
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--alpha", ev.alpha, "penalty weight")
      ->check(CLI::NonNegativeNumber);
  eval_cmd->add_option("--variant", ev.variant, "eq1|eq2")
      ->check(CLI::IsMember({"eq1", "eq2"}));
  eval_cmd->add_flag("--counts-weighted", ev.counts_weighted,
                     "divide the penalty by visit counts instead of pi_beta");
  eval_cmd->add_option("--tol", ev.tol, "violation slack");
  eval_cmd->add_option("--c-r", ev.c_r, "reward concentration scale");
  eval_cmd->add_option("--c-t", ev.c_t, "transition concentration scale");
  eval_cmd->add_option("--delta", ev.delta, "concentration failure probability");
  eval_cmd->add_option("--out", ev.out, "report JSON path");
  eval_cmd->callback([&] { exit_code = run_eval(ev); });

  LearnArgs ln;
  CLI::App* learn_cmd =
      app.add_subcommand("learn", "Penalized policy iteration; writes trace and policy");
  learn_cmd->add_option("--mdp", ln.mdp_path, "reference MDP JSON")->required()
      ->check(CLI::ExistingFile);
  learn_cmd->add_option("--dataset", ln.dataset_path,
                        "dataset CSV; selects the empirical model")
      ->check(CLI::ExistingFile);
  learn_cmd->add_option("--behavior-file", ln.behavior_path,
                        "behavior policy JSON (exact mode)")
      ->check(CLI::ExistingFile);
  learn_cmd->add_option("--regularizer", ln.regularizer, "h|rho|var")
      ->check(CLI::IsMember({"h", "rho", "var"}));
  learn_cmd->add_option("--rho-prior", ln.rho_prior, "uniform|previous|behavior")
      ->check(CLI::IsMember({"uniform", "previous", "behavior"}));
  learn_cmd->add_option("--var-weight", ln.var_weight, "uniform|inverse-counts")
      ->check(CLI::IsMember({"uniform", "inverse-counts"}));
  learn_cmd->add_option("--robust-delta", ln.robust_delta, "var spread confidence");
  learn_cmd->add_option("--alpha-mode", ln.alpha_mode, "fixed|lagrange")
      ->check(CLI::IsMember({"fixed", "lagrange"}));
  learn_cmd->add_option("--alpha", ln.alpha, "penalty weight")
      ->check(CLI::NonNegativeNumber);
  learn_cmd->add_option("--tau", ln.tau, "dual target gap")->check(CLI::NonNegativeNumber);
  learn_cmd->add_option("--dual-step", ln.dual_step, "dual ascent step");
  learn_cmd->add_option("--backup", ln.backup, "policy-eval|optimality")
      ->check(CLI::IsMember({"policy-eval", "optimality"}));
  learn_cmd->add_option("--actor", ln.actor, "soft-greedy|greedy")
      ->check(CLI::IsMember({"soft-greedy", "greedy"}));
  learn_cmd->add_option("--temperature", ln.temperature, "soft actor temperature");
  learn_cmd->add_option("--iters", ln.iters, "iterations")->check(CLI::PositiveNumber);
  learn_cmd->add_option("--policy-step", ln.policy_step, "actor mixture step in (0,1]");
  learn_cmd->add_option("--out", ln.out, "output directory");
  learn_cmd->callback([&] { exit_code = run_learn(ln); });

  VerifyArgs vf;
  CLI::App* verify_cmd = app.add_subcommand(
      "verify", "Run a bound-verification suite; exit 1 on any violation");
  verify_cmd
      ->add_option("--theorem,-t", vf.theorem,
                   "T1|T2|T3|T4|T5|T6|D1|D3|oracles|all")
      ->required()
      ->check(CLI::IsMember({"T1", "T2", "T3", "T4", "T5", "T6", "D1", "D3",
                             "oracles", "all"}));
  verify_cmd->add_option("--seeds", vf.seeds,
                         "base seed; a list or lo:hi range also sets the population size");
  verify_cmd->add_option("--jobs", vf.jobs, "worker threads; 0 = auto");
  verify_cmd->add_option("--alpha", vf.alpha, "override the exact checks' alpha sweep")
      ->check(CLI::NonNegativeNumber);
  verify_cmd->add_option("--format", vf.format, "text|json")
      ->check(CLI::IsMember({"text", "json"}));
  verify_cmd->add_option("--out", vf.out, "report file path");
  verify_cmd->callback([&] { exit_code = run_verify(vf); });

  ReportArgs rp;
  CLI::App* report_cmd = app.add_subcommand(
      "report", "Overestimation contrast table: naive fitted-Q vs penalized estimates");
  report_cmd->add_option("--seeds", rp.seeds,
                         "base seed; a list or lo:hi range also sets seeds per task");
  report_cmd->add_option("--jobs", rp.jobs, "worker threads; 0 = auto");
  report_cmd->add_option("--format", rp.format, "csv|json")
      ->check(CLI::IsMember({"csv", "json"}));
  report_cmd->add_option("--out", rp.out, "table file path");
  report_cmd->callback([&] { exit_code = run_report(rp); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return exit_code;
}
