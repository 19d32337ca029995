#include "lqgames/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace lqgames {

namespace {

using nlohmann::json;

json matrix_to_json(const MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const VectorXd& v) {
  json out = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v(k));
  return out;
}

MatrixXd matrix_from_json(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty() || !j.front().is_array())
    throw std::runtime_error("parse error: " + field + " must be a nested array");
  const size_t rows = j.size();
  const size_t cols = j.front().size();
  MatrixXd m(rows, cols);
  for (size_t r = 0; r < rows; ++r) {
    if (j[r].size() != cols)
      throw std::runtime_error("parse error: ragged rows in " + field);
    for (size_t c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

VectorXd vector_from_json(const json& j, const std::string& field) {
  if (!j.is_array()) throw std::runtime_error("parse error: " + field + " must be an array");
  VectorXd v(j.size());
  for (size_t k = 0; k < j.size(); ++k) v(k) = j[k].get<double>();
  return v;
}

const json& require_key(const json& j, const std::string& key) {
  if (!j.contains(key)) throw std::runtime_error("parse error: missing key '" + key + "'");
  return j.at(key);
}

json spec_to_json_obj(const GameSpec& spec) {
  json j;
  j["n_players"] = spec.n_players;
  j["horizon"] = spec.horizon;
  j["dim_v"] = spec.dim_v;
  j["dim_a"] = spec.dim_a;
  j["prior_cov"] = matrix_to_json(spec.prior_cov);
  json q = json::array();
  for (const auto& m : spec.noise_cov) q.push_back(matrix_to_json(m));
  j["noise_cov"] = std::move(q);
  json b = json::array();
  for (const auto& m : spec.reward_mat) b.push_back(matrix_to_json(m));
  j["reward_mat"] = std::move(b);
  return j;
}

GameSpec spec_from_json_obj(const json& j) {
  GameSpec spec;
  spec.n_players = require_key(j, "n_players").get<int>();
  spec.horizon = require_key(j, "horizon").get<int>();
  spec.dim_v = require_key(j, "dim_v").get<int>();
  spec.dim_a = require_key(j, "dim_a").get<int>();
  spec.prior_cov = matrix_from_json(require_key(j, "prior_cov"), "prior_cov");
  for (const auto& m : require_key(j, "noise_cov"))
    spec.noise_cov.push_back(matrix_from_json(m, "noise_cov"));
  for (const auto& m : require_key(j, "reward_mat"))
    spec.reward_mat.push_back(matrix_from_json(m, "reward_mat"));
  return validate_game(spec);
}

json header_to_json(const RunHeader& h) {
  json j;
  j["command"] = h.command;
  j["seed"] = h.seed;
  j["damping"] = h.damping;
  j["tol"] = h.tol;
  j["max_iter"] = h.max_iter;
  j["n_paths"] = h.n_paths;
  j["threads"] = h.threads;
  j["deviation_grid"] = h.deviation_grid;
  return j;
}

RunHeader header_from_json(const json& j) {
  RunHeader h;
  h.command = j.value("command", "");
  h.seed = j.value("seed", std::uint64_t{0});
  h.damping = j.value("damping", 0.5);
  h.tol = j.value("tol", 1e-9);
  h.max_iter = j.value("max_iter", 500);
  h.n_paths = j.value("n_paths", 0L);
  h.threads = j.value("threads", 1);
  h.deviation_grid = j.value("deviation_grid", 16);
  return h;
}

json profile_to_json(const StrategyProfile& p) {
  json players = json::array();
  for (int i = 0; i < p.n_players(); ++i) {
    json stages = json::array();
    for (int t = 0; t < p.horizon(); ++t) {
      json st;
      st["L"] = matrix_to_json(p.at(i, t).l_mat);
      st["M"] = matrix_to_json(p.at(i, t).m_f);
      st["c"] = vector_to_json(p.at(i, t).m_const);
      stages.push_back(std::move(st));
    }
    players.push_back(std::move(stages));
  }
  return players;
}

StrategyProfile profile_from_json(const json& j, const Dims& d) {
  StrategyProfile p = StrategyProfile::zero(d);
  for (int i = 0; i < d.n_players; ++i) {
    for (int t = 0; t < d.horizon; ++t) {
      const json& st = j.at(i).at(t);
      p.at(i, t).l_mat = matrix_from_json(st.at("L"), "profile L");
      p.at(i, t).m_f = matrix_from_json(st.at("M"), "profile M");
      p.at(i, t).m_const = vector_from_json(st.at("c"), "profile c");
    }
  }
  return p;
}

json matrix_table_to_json(const std::vector<std::vector<MatrixXd>>& table) {
  json players = json::array();
  for (const auto& row : table) {
    json stages = json::array();
    for (const auto& m : row) stages.push_back(matrix_to_json(m));
    players.push_back(std::move(stages));
  }
  return players;
}

std::vector<std::vector<MatrixXd>> matrix_table_from_json(const json& j) {
  std::vector<std::vector<MatrixXd>> out;
  for (const auto& row : j) {
    std::vector<MatrixXd> stages;
    for (const auto& m : row) stages.push_back(matrix_from_json(m, "matrix table"));
    out.push_back(std::move(stages));
  }
  return out;
}

}  // namespace

GameSpec parse_spec(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& err) {
    throw std::runtime_error(std::string("parse error: ") + err.what());
  }
  return spec_from_json_obj(j);
}

GameSpec load_spec(const std::string& path) { return parse_spec(read_text_file(path)); }

std::string spec_to_json(const GameSpec& spec) { return spec_to_json_obj(spec).dump(2); }

std::string artifact_to_json(const SolveArtifact& artifact) {
  json j;
  j["kind"] = "lqg-solve";
  j["header"] = header_to_json(artifact.header);
  j["spec"] = spec_to_json_obj(artifact.spec);
  j["profile"] = profile_to_json(artifact.profile);
  j["sigma"] = matrix_table_to_json(artifact.sigma);
  j["cross_e"] = matrix_table_to_json(artifact.cross_e);
  j["values"] = matrix_table_to_json(artifact.values);
  j["convergence"] = {{"iterations", artifact.convergence.iterations},
                      {"residual", artifact.convergence.residual},
                      {"converged", artifact.convergence.converged}};
  return j.dump(2);
}

SolveArtifact artifact_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& err) {
    throw std::runtime_error(std::string("parse error: ") + err.what());
  }
  if (j.value("kind", "") != "lqg-solve")
    throw std::runtime_error("parse error: not a solve artifact");
  SolveArtifact a;
  a.header = header_from_json(require_key(j, "header"));
  a.spec = spec_from_json_obj(require_key(j, "spec"));
  a.profile = profile_from_json(require_key(j, "profile"), a.spec.dims());
  a.sigma = matrix_table_from_json(require_key(j, "sigma"));
  a.cross_e = matrix_table_from_json(require_key(j, "cross_e"));
  a.values = matrix_table_from_json(require_key(j, "values"));
  const json& c = require_key(j, "convergence");
  a.convergence.iterations = c.at("iterations").get<int>();
  a.convergence.residual = c.at("residual").get<double>();
  a.convergence.converged = c.at("converged").get<bool>();
  return a;
}

SolveArtifact load_artifact(const std::string& path) {
  return artifact_from_json(read_text_file(path));
}

SolveArtifact make_artifact(const RunHeader& header, const GameSpec& spec, const Equilibrium& eq) {
  SolveArtifact a;
  a.header = header;
  a.spec = spec;
  a.profile = eq.profile;
  const Dims d = spec.dims();
  a.sigma.assign(d.n_players, {});
  a.cross_e.assign(d.n_players, {});
  a.values.assign(d.n_players, {});
  for (int i = 0; i < d.n_players; ++i) {
    for (int t = 0; t < d.horizon; ++t) {
      a.sigma[i].push_back(eq.recursion.of(i).sigma[t]);
      a.cross_e[i].push_back(eq.recursion.of(i).cross_E[t]);
      a.values[i].push_back(eq.values[i][t].sym_mat);
    }
  }
  a.convergence = eq.report;
  return a;
}

std::string artifact_to_records(const SolveArtifact& artifact) {
  std::ostringstream os;
  json hdr;
  hdr["record"] = "header";
  hdr["header"] = header_to_json(artifact.header);
  os << hdr.dump() << "\n";
  json sp;
  sp["record"] = "spec";
  sp["spec"] = spec_to_json_obj(artifact.spec);
  os << sp.dump() << "\n";
  const Dims d = artifact.spec.dims();
  for (int i = 0; i < d.n_players; ++i) {
    for (int t = 0; t < d.horizon; ++t) {
      json r;
      r["record"] = "strategy";
      r["player"] = i;
      r["stage"] = t;
      r["L"] = matrix_to_json(artifact.profile.at(i, t).l_mat);
      r["M"] = matrix_to_json(artifact.profile.at(i, t).m_f);
      r["c"] = vector_to_json(artifact.profile.at(i, t).m_const);
      os << r.dump() << "\n";
      json s;
      s["record"] = "public";
      s["player"] = i;
      s["stage"] = t;
      s["sigma"] = matrix_to_json(artifact.sigma[i][t]);
      s["cross_e"] = matrix_to_json(artifact.cross_e[i][t]);
      s["value"] = matrix_to_json(artifact.values[i][t]);
      os << s.dump() << "\n";
    }
  }
  json c;
  c["record"] = "convergence";
  c["iterations"] = artifact.convergence.iterations;
  c["residual"] = artifact.convergence.residual;
  c["converged"] = artifact.convergence.converged;
  os << c.dump() << "\n";
  return os.str();
}

std::string mc_report_to_json(const RunHeader& header, const McReport& report) {
  json j;
  j["kind"] = "lqg-mc";
  j["header"] = header_to_json(header);
  j["n_paths"] = report.n_paths;
  j["seed"] = report.seed;
  j["mean_total_reward"] = vector_to_json(report.mean);
  j["std_err"] = vector_to_json(report.std_err);
  return j.dump(2);
}

std::string trajectory_to_record(const Trajectory& traj, long path_index) {
  json j;
  j["record"] = "trajectory";
  j["path"] = path_index;
  j["v"] = vector_to_json(traj.v);
  json stages = json::array();
  for (const auto& st : traj.stages) {
    json s;
    s["x"] = matrix_to_json(st.x);
    s["vhat"] = matrix_to_json(st.vhat);
    s["f"] = vector_to_json(st.f);
    s["a"] = matrix_to_json(st.a);
    s["r"] = vector_to_json(st.r);
    stages.push_back(std::move(s));
  }
  j["stages"] = std::move(stages);
  return j.dump();
}

std::string verification_to_json(const RunHeader& header, const ConsistencyReport& report,
                                 const std::vector<GainEstimate>& gains) {
  json j;
  j["kind"] = "lqg-verify";
  j["header"] = header_to_json(header);
  j["n_paths"] = report.n_paths;
  j["seed"] = report.seed;
  json entries = json::array();
  for (const auto& e : report.entries) {
    json je;
    je["claim"] = e.claim;
    je["statistic"] = e.statistic;
    je["tolerance"] = e.tolerance;
    je["pass"] = e.pass;
    je["insufficient_samples"] = e.insufficient_samples;
    je["n"] = e.n;
    entries.push_back(std::move(je));
  }
  j["checks"] = std::move(entries);
  json jg = json::array();
  for (const auto& g : gains) {
    json e;
    e["label"] = g.dev.label;
    e["player"] = g.dev.player;
    e["stage"] = g.dev.stage;
    e["gain"] = g.gain;
    e["std_err"] = g.std_err;
    e["n_paths"] = g.n_paths;
    e["significant_gain"] = g.significant_gain();
    jg.push_back(std::move(e));
  }
  j["deviations"] = std::move(jg);
  return j.dump(2);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << text;
}

}  // namespace lqgames
