#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mlabel/embedding.hpp"
#include "mlabel/pipeline.hpp"
#include "mlabel/solvers.hpp"

namespace mlabel {

// Doubles are printed with %.17g so every file round-trips bit-exactly; the
// C locale guarantees '.' as the decimal separator.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline constexpr const char* kLogCsvVersion = "# mlabel-log-v1";

inline void write_report_csv(const std::string& path, const SolverReport& rep) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write log file: " + path);
  out << kLogCsvVersion << "\n";
  out << "iter,seconds,primal,dual,gap,rel_gap\n";
  for (const auto& r : rep.rows)
    out << r.iter << "," << format_double(r.seconds) << "," << format_double(r.primal) << ","
        << format_double(r.dual) << "," << format_double(r.gap) << ","
        << format_double(r.rel_gap) << "\n";
}

inline std::vector<LogRow> read_report_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open log file: " + path);
  std::vector<LogRow> rows;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != "iter,seconds,primal,dual,gap,rel_gap")
        throw std::runtime_error("unexpected log header in " + path + ": " + line);
      header_seen = true;
      continue;
    }
    LogRow r;
    std::istringstream ls(line);
    std::string tok;
    auto next = [&](double& target) {
      if (!std::getline(ls, tok, ',')) throw std::runtime_error("short log row in " + path);
      target = std::strtod(tok.c_str(), nullptr);
    };
    if (!std::getline(ls, tok, ',')) throw std::runtime_error("short log row in " + path);
    r.iter = std::stoi(tok);
    next(r.seconds);
    next(r.primal);
    next(r.dual);
    next(r.gap);
    next(r.rel_gap);
    rows.push_back(r);
  }
  return rows;
}

// --- JSON serialization -------------------------------------------------------

inline nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw std::runtime_error("expected a non-empty matrix array");
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(j.at(0).size());
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (static_cast<int>(j.at(i).size()) != cols)
      throw std::runtime_error("ragged matrix rows in JSON");
    for (int c = 0; c < cols; ++c) m(i, c) = j.at(i).at(c).get<double>();
  }
  return m;
}

inline nlohmann::json embedding_to_json(const EmbeddingMatrix& e) {
  return {{"l", e.labels()},
          {"k", e.k()},
          {"eps_e", e.eps_e},
          {"a", matrix_to_json(e.A)},
          {"source", matrix_to_json(e.source)}};
}

inline EmbeddingMatrix embedding_from_json(const nlohmann::json& j) {
  EmbeddingMatrix e;
  e.A = matrix_from_json(j.at("a"));
  e.source = matrix_from_json(j.at("source"));
  e.eps_e = j.at("eps_e").get<double>();
  if (e.A.cols() != j.at("l").get<int>() || e.A.rows() != j.at("k").get<int>())
    throw std::runtime_error("embedding JSON dimensions disagree with matrix");
  return e;
}

inline nlohmann::json metric_to_json(const Metric& m) {
  return {{"l", m.labels()}, {"d", matrix_to_json(m.distances)}};
}

inline Metric metric_from_json(const nlohmann::json& j) {
  return metric_or_throw(matrix_from_json(j.at("d")));
}

inline nlohmann::json labeling_to_json(const DiscreteLabeling& lab) {
  return {{"grid", lab.grid.dims}, {"labels", lab.labels}};
}

inline DiscreteLabeling labeling_from_json(const nlohmann::json& j) {
  DiscreteLabeling lab;
  lab.grid = Grid(j.at("grid").get<std::vector<int>>());
  lab.labels = j.at("labels").get<std::vector<int>>();
  if (static_cast<int>(lab.labels.size()) != lab.grid.size())
    throw std::runtime_error("labeling JSON size mismatch");
  return lab;
}

inline nlohmann::json relaxed_to_json(const Grid& grid, const Eigen::MatrixXd& u) {
  nlohmann::json values = nlohmann::json::array();
  for (int p = 0; p < u.rows(); ++p)
    for (int c = 0; c < u.cols(); ++c) values.push_back(u(p, c));
  return {{"grid", grid.dims}, {"channels", static_cast<int>(u.cols())}, {"values", values}};
}

inline std::pair<Grid, Eigen::MatrixXd> relaxed_from_json(const nlohmann::json& j) {
  Grid grid(j.at("grid").get<std::vector<int>>());
  const int channels = j.at("channels").get<int>();
  const auto& vals = j.at("values");
  if (static_cast<int>(vals.size()) != grid.size() * channels)
    throw std::runtime_error("relaxed solution JSON size mismatch");
  Eigen::MatrixXd u(grid.size(), channels);
  int idx = 0;
  for (int p = 0; p < u.rows(); ++p)
    for (int c = 0; c < channels; ++c) u(p, c) = vals.at(idx++).get<double>();
  return {grid, u};
}

inline nlohmann::json report_summary_json(const SolverReport& rep) {
  nlohmann::json j{{"solver", solver_name(rep.method)},
                   {"termination", termination_name(rep.termination)},
                   {"iterations", rep.iterations},
                   {"wall_seconds", rep.wall_seconds},
                   {"gap_available", rep.gap_available},
                   {"norm_bound", rep.norm_bound},
                   {"final_dual", rep.final_dual}};
  if (rep.gap_available) {
    j["final_primal"] = rep.final_primal;
    j["final_gap"] = rep.final_gap;
    j["final_rel_gap"] = rep.final_rel_gap;
  } else {
    j["gap"] = "unavailable";
    j["dual_plateau"] = rep.termination == Termination::DualPlateau;
  }
  if (std::isfinite(rep.nesterov_gap_bound)) j["nesterov_gap_bound"] = rep.nesterov_gap_bound;
  return j;
}

inline nlohmann::json binarization_to_json(const BinarizationReport& b) {
  return {{"method", b.method},
          {"energy_relaxed", b.energy_relaxed},
          {"energy_binary", b.energy_binary},
          {"dual_value", b.dual_value},
          {"suboptimality_bound", b.suboptimality_bound},
          {"exact", b.exact}};
}

inline void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << j.dump(2) << "\n";
}

inline nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  return nlohmann::json::parse(in);
}

}  // namespace mlabel
