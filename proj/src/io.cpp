#include "cql/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace cql {

namespace {

using nlohmann::json;

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

json vector_to_json(const Vector& v) {
  json arr = json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

json matrix_to_json_rowmajor(const Matrix& m) {
  json arr = json::array();
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) arr.push_back(m(r, c));
  return arr;
}

// JSON numbers cannot carry infinities; thresholds may legitimately be +inf.
json finite_or_tag(double x) {
  if (std::isinf(x)) return json(x > 0 ? "inf" : "-inf");
  if (std::isnan(x)) return json("nan");
  return json(x);
}

}  // namespace

std::string mdp_to_json(const TabularMdp& mdp) {
  json j;
  j["n_states"] = mdp.n_states;
  j["n_actions"] = mdp.n_actions;
  j["gamma"] = mdp.gamma;
  j["r_max"] = mdp.r_max;
  j["reward"] = matrix_to_json_rowmajor(mdp.reward);
  j["transition"] = matrix_to_json_rowmajor(mdp.transition);
  j["initial_dist"] = vector_to_json(mdp.initial_dist);
  j["id"] = mdp.id;
  return j.dump(2) + "\n";
}

TabularMdp mdp_from_json(const std::string& text) {
  json j = json::parse(text);
  TabularMdp mdp;
  mdp.n_states = j.at("n_states").get<int>();
  mdp.n_actions = j.at("n_actions").get<int>();
  mdp.gamma = j.at("gamma").get<double>();
  mdp.r_max = j.at("r_max").get<double>();
  mdp.id = j.value("id", "");
  const int S = mdp.n_states, A = mdp.n_actions;
  if (S <= 0 || A <= 0) throw std::invalid_argument("mdp_from_json: bad shape");
  auto& rw = j.at("reward");
  auto& tr = j.at("transition");
  auto& rho = j.at("initial_dist");
  if (static_cast<int>(rw.size()) != S * A ||
      static_cast<int>(tr.size()) != S * A * S ||
      static_cast<int>(rho.size()) != S)
    throw std::invalid_argument("mdp_from_json: array length mismatch");
  mdp.reward = Matrix(S, A);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) mdp.reward(s, a) = rw[s * A + a].get<double>();
  mdp.transition = Matrix(S * A, S);
  for (int row = 0; row < S * A; ++row)
    for (int s2 = 0; s2 < S; ++s2)
      mdp.transition(row, s2) = tr[row * S + s2].get<double>();
  mdp.initial_dist = Vector(S);
  for (int s = 0; s < S; ++s) mdp.initial_dist(s) = rho[s].get<double>();
  mdp.validate();
  return mdp;
}

std::string dataset_to_csv(const TransitionDataset& data) {
  std::ostringstream out;
  out << "# source_mdp_id=" << data.source_mdp_id << " rng_seed=" << data.rng_seed
      << "\n";
  out << "s,a,r,s_next\n";
  for (const Transition& t : data.tuples)
    out << t.s << "," << t.a << "," << format_double(t.r) << "," << t.s_next << "\n";
  return out.str();
}

TransitionDataset dataset_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  TransitionDataset data;
  bool saw_header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto id_pos = line.find("source_mdp_id=");
      auto seed_pos = line.find("rng_seed=");
      if (id_pos != std::string::npos) {
        auto start = id_pos + 14;
        auto end = line.find(' ', start);
        data.source_mdp_id = line.substr(start, end - start);
      }
      if (seed_pos != std::string::npos)
        data.rng_seed = std::stoull(line.substr(seed_pos + 9));
      continue;
    }
    if (!saw_header) {
      if (line != "s,a,r,s_next")
        throw std::invalid_argument("dataset_from_csv: missing column header");
      saw_header = true;
      continue;
    }
    Transition t;
    char comma;
    std::istringstream row(line);
    if (!(row >> t.s >> comma >> t.a >> comma >> t.r >> comma >> t.s_next))
      throw std::invalid_argument("dataset_from_csv: malformed row: " + line);
    data.tuples.push_back(t);
  }
  if (!saw_header)
    throw std::invalid_argument("dataset_from_csv: empty input");
  return data;
}

std::string eval_report_to_json(const EvalReport& rep) {
  json j;
  j["variant"] = rep.variant == CqlVariant::Eq1 ? "eq1" : "eq2";
  j["alpha"] = rep.alpha;
  j["v_hat"] = vector_to_json(rep.v_hat);
  j["v"] = vector_to_json(rep.v);
  j["gap"] = vector_to_json(rep.gap);
  j["threshold"] = finite_or_tag(rep.threshold);
  j["violated"] = rep.violated;
  j["tol"] = rep.tol;
  return j.dump(2) + "\n";
}

std::string trace_to_csv(const LearnTrace& trace) {
  std::ostringstream out;
  out << "k,alpha,gap,dtv,J_hat_M,J_M\n";
  for (const LearnTraceRow& r : trace.rows)
    out << r.k << "," << format_double(r.alpha) << "," << format_double(r.gap) << ","
        << format_double(r.dtv) << "," << format_double(r.j_hat_m) << ","
        << format_double(r.j_m) << "\n";
  return out.str();
}

std::string gap_report_to_json(const GapReport& rep) {
  json j;
  j["lhs"] = vector_to_json(rep.lhs);
  j["rhs"] = vector_to_json(rep.rhs);
  j["delta_hat"] = vector_to_json(rep.delta_hat);
  j["alpha_required"] = vector_to_json(rep.alpha_required);
  j["vacuous"] = rep.vacuous;
  j["holds"] = rep.holds;
  return j.dump(2) + "\n";
}

std::string safe_improvement_to_json(const SafeImprovementReport& rep) {
  json j;
  j["zeta"] = rep.zeta;
  j["sampling_term"] = rep.sampling_term;
  j["improvement_term"] = rep.improvement_term;
  j["j_pi_star_m"] = rep.j_pi_star_m;
  j["j_beta_m"] = rep.j_beta_m;
  j["j_pi_star_hat"] = rep.j_pi_star_hat;
  j["j_beta_hat"] = rep.j_beta_hat;
  j["holds"] = rep.holds;
  j["per_policy_bound_pi_star"] = rep.per_policy_bound_pi_star;
  j["per_policy_bound_beta"] = rep.per_policy_bound_beta;
  j["sentinel_states"] = rep.sentinel_states;
  j["alpha"] = rep.alpha;
  return j.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void save_mdp(const TabularMdp& mdp, const std::string& path) {
  write_text_file(path, mdp_to_json(mdp));
}

TabularMdp load_mdp(const std::string& path) {
  return mdp_from_json(read_text_file(path));
}

void save_dataset(const TransitionDataset& data, const std::string& path) {
  write_text_file(path, dataset_to_csv(data));
}

TransitionDataset load_dataset(const std::string& path) {
  return dataset_from_csv(read_text_file(path));
}

}  // namespace cql
