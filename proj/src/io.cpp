#include "vichoice/io.hpp"

#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>

#include "vichoice/errors.hpp"

namespace vichoice::io {

json to_json(const VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json to_json(const MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

VectorXd vector_from_json(const json& j) {
  if (!j.is_array()) throw ValidationError("json", "expected an array of numbers");
  VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(i) = j[i].get<double>();
  return v;
}

MatrixXd matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) {
    throw ValidationError("json", "expected a non-empty array of rows");
  }
  const auto rows = j.size();
  const auto cols = j[0].size();
  MatrixXd m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw ValidationError("json", "ragged matrix");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

json to_json(const PopulationParams& p) {
  return {{"zeta", to_json(p.zeta)}, {"omega", to_json(p.omega)}};
}

PopulationParams params_from_json(const json& j) {
  return {vector_from_json(j.at("zeta")), matrix_from_json(j.at("omega"))};
}

json to_json(const VariationalGlobal& g) {
  return {{"mu_zeta", to_json(g.mu_zeta)},
          {"sigma_zeta", to_json(g.sigma_zeta)},
          {"upsilon", to_json(g.upsilon)},
          {"omega_dof", g.omega_dof}};
}

VariationalGlobal global_from_json(const json& j) {
  VariationalGlobal g;
  g.mu_zeta = vector_from_json(j.at("mu_zeta"));
  g.sigma_zeta = matrix_from_json(j.at("sigma_zeta"));
  g.upsilon = matrix_from_json(j.at("upsilon"));
  g.omega_dof = j.at("omega_dof").get<double>();
  return g;
}

json to_json(const VariationalAgent& q) {
  json j = {{"mu", to_json(q.mu)}};
  if (q.approx == LseApprox::D0) {
    j["cov_factor"] = to_json(MatrixXd(q.cov_factor.triangularView<Eigen::Lower>()));
  } else {
    j["log_var"] = to_json(q.log_var);
  }
  return j;
}

VariationalAgent agent_from_json(const json& j, LseApprox approx) {
  if (approx == LseApprox::D0) {
    return VariationalAgent::full(vector_from_json(j.at("mu")), matrix_from_json(j.at("cov_factor")));
  }
  return VariationalAgent::diagonal(vector_from_json(j.at("mu")), vector_from_json(j.at("log_var")));
}

json to_json(const Hyperpriors& hp) {
  return {{"beta0", to_json(hp.beta0)},
          {"omega0", to_json(hp.omega0)},
          {"s_mat", to_json(hp.s_mat)},
          {"nu", hp.nu}};
}

Hyperpriors hyperpriors_from_json(const json& j) {
  Hyperpriors hp;
  hp.beta0 = vector_from_json(j.at("beta0"));
  hp.omega0 = matrix_from_json(j.at("omega0"));
  hp.s_mat = matrix_from_json(j.at("s_mat"));
  hp.nu = j.at("nu").get<double>();
  return hp;
}

void write_dataset(std::ostream& os, const ChoiceDataset& data, const json& header_extra) {
  json header = header_extra.is_object() ? header_extra : json::object();
  header["J"] = data.num_items();
  header["K"] = data.num_attributes();
  os << header.dump() << '\n';
  for (std::size_t h = 0; h < data.num_agents(); ++h) {
    json events = json::array();
    for (const auto& ev : data.agent(h).events) {
      events.push_back({{"x", to_json(ev.x)}, {"y", ev.choice + 1}});
    }
    json rec = {{"agent", h + 1}, {"events", std::move(events)}};
    os << rec.dump() << '\n';
  }
}

LoadedDataset read_dataset(std::istream& is) {
  std::string line;
  json header;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      header = json::parse(line);
    } catch (const json::exception& e) {
      throw ValidationError("dataset", "line " + std::to_string(lineno) + ": " + e.what());
    }
    break;
  }
  if (!header.is_object() || !header.contains("J") || !header.contains("K")) {
    throw ValidationError("dataset", "missing header record with J and K");
  }
  int J = 0, K = 0;
  try {
    J = header.at("J").get<int>();
    K = header.at("K").get<int>();
  } catch (const json::exception& e) {
    throw ValidationError("dataset", std::string("bad header: ") + e.what());
  }
  std::vector<AgentData> agents;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    AgentData agent;
    try {
      const json rec = json::parse(line);
      for (const auto& ev : rec.at("events")) {
        ChoiceEvent e;
        e.x = matrix_from_json(ev.at("x"));
        e.choice = ev.at("y").get<int>() - 1;
        agent.events.push_back(std::move(e));
      }
    } catch (const json::exception& e) {
      throw ValidationError("dataset", "line " + std::to_string(lineno) + ": " + e.what());
    }
    agents.push_back(std::move(agent));
  }
  return {ChoiceDataset(J, K, std::move(agents)), std::move(header)};
}

void write_dataset_file(const std::filesystem::path& path, const ChoiceDataset& data,
                        const json& header_extra) {
  std::ofstream os(path);
  if (!os) throw ValidationError("out", "cannot write " + path.string());
  write_dataset(os, data, header_extra);
}

LoadedDataset read_dataset_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("data", "cannot read " + path.string());
  return read_dataset(is);
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("path", "cannot read " + path.string());
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw ValidationError("path", path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream os(path);
  if (!os) throw ValidationError("out", "cannot write " + path.string());
  os << j.dump(2) << '\n';
}

void write_matrix_csv(const std::filesystem::path& path, const MatrixXd& m) {
  std::ofstream os(path);
  if (!os) throw ValidationError("out", "cannot write " + path.string());
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? "," : "") << m(i, j);
    os << '\n';
  }
}

MatrixXd read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("path", "cannot read " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return {};
  MatrixXd m(rows.size(), rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) throw ValidationError("csv", "ragged rows");
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

}  // namespace vichoice::io
