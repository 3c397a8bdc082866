#pragma once

#include <string>

#include "cql/analysis.hpp"
#include "cql/cql_eval.hpp"
#include "cql/cql_learn.hpp"
#include "cql/datasets.hpp"
#include "cql/types.hpp"

namespace cql {

// MDP JSON carries n_states, n_actions, gamma, r_max, reward and transition
// in row-major order, initial_dist, and the id string.
std::string mdp_to_json(const TabularMdp& mdp);
TabularMdp mdp_from_json(const std::string& text);

// Dataset CSV: a comment header carrying the source MDP id and seed, a column
// header, then one s,a,r,s_next row per transition.
std::string dataset_to_csv(const TransitionDataset& data);
TransitionDataset dataset_from_csv(const std::string& text);

std::string eval_report_to_json(const EvalReport& rep);

// Columns: k, alpha, gap, dtv, J_hat_M, J_M.
std::string trace_to_csv(const LearnTrace& trace);

std::string gap_report_to_json(const GapReport& rep);
std::string safe_improvement_to_json(const SafeImprovementReport& rep);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

void save_mdp(const TabularMdp& mdp, const std::string& path);
TabularMdp load_mdp(const std::string& path);
void save_dataset(const TransitionDataset& data, const std::string& path);
TransitionDataset load_dataset(const std::string& path);

}  // namespace cql
