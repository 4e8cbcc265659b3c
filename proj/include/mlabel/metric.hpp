#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace mlabel {

// Symmetric interaction potential d(i,j) between labels. Off-diagonal entries
// must be strictly positive; zero-distance classes are collapsed upstream
// (see pipeline.hpp) before a Metric is formed.
struct Metric {
  Eigen::MatrixXd distances;  // l x l

  int labels() const { return static_cast<int>(distances.rows()); }
  double operator()(int i, int j) const { return distances(i, j); }

  Metric scaled(double lambda) const { return Metric{lambda * distances}; }
};

enum class MetricAxiom { SquareShape, ZeroDiagonal, Symmetry, Positivity, Triangle };

struct MetricViolation {
  MetricAxiom axiom;
  int i = -1, j = -1, k = -1;

  std::string message() const {
    switch (axiom) {
      case MetricAxiom::SquareShape:
        return "matrix is not square with at least two labels";
      case MetricAxiom::ZeroDiagonal:
        return "nonzero diagonal entry at (" + std::to_string(i) + "," + std::to_string(i) + ")";
      case MetricAxiom::Symmetry:
        return "symmetry violated for pair (" + std::to_string(i) + "," + std::to_string(j) + ")";
      case MetricAxiom::Positivity:
        return "off-diagonal entry (" + std::to_string(i) + "," + std::to_string(j) +
               ") is not strictly positive (collapse duplicate classes first)";
      case MetricAxiom::Triangle:
        return "triangle inequality violated for (" + std::to_string(i) + "," +
               std::to_string(j) + "," + std::to_string(k) + ")";
    }
    return "unknown violation";
  }
};

// Checks the metric axioms with 1e-12 slack and reports the first violated
// axiom together with a witness triple.
inline std::variant<Metric, MetricViolation> validate_metric(const Eigen::MatrixXd& D) {
  constexpr double kSlack = 1e-12;
  const int l = static_cast<int>(D.rows());
  if (D.cols() != D.rows() || l < 2) return MetricViolation{MetricAxiom::SquareShape};
  for (int i = 0; i < l; ++i)
    if (std::abs(D(i, i)) > kSlack) return MetricViolation{MetricAxiom::ZeroDiagonal, i, i};
  for (int i = 0; i < l; ++i)
    for (int j = i + 1; j < l; ++j)
      if (std::abs(D(i, j) - D(j, i)) > kSlack)
        return MetricViolation{MetricAxiom::Symmetry, i, j};
  for (int i = 0; i < l; ++i)
    for (int j = 0; j < l; ++j)
      if (i != j && D(i, j) <= kSlack) return MetricViolation{MetricAxiom::Positivity, i, j};
  for (int i = 0; i < l; ++i)
    for (int j = 0; j < l; ++j)
      for (int k = 0; k < l; ++k)
        if (D(i, k) > D(i, j) + D(j, k) + kSlack)
          return MetricViolation{MetricAxiom::Triangle, i, j, k};
  return Metric{D};
}

inline Metric metric_or_throw(const Eigen::MatrixXd& D) {
  auto r = validate_metric(D);
  if (auto* v = std::get_if<MetricViolation>(&r))
    throw std::invalid_argument("invalid interaction potential: " + v->message());
  return std::get<Metric>(r);
}

enum class PotentialKind { Potts, Linear, TruncatedLinear, Custom };

struct PotentialSpec {
  PotentialKind kind = PotentialKind::Potts;
  double c = 1.0;           // step weight for (truncated) linear
  double cap = 2.0;         // truncation in label steps
  Eigen::MatrixXd custom;   // used when kind == Custom
};

inline Metric build_named_potential(const PotentialSpec& spec, int l) {
  if (spec.kind == PotentialKind::Custom) return metric_or_throw(spec.custom);
  if (l < 2) throw std::invalid_argument("potential: need at least two labels");
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(l, l);
  for (int i = 0; i < l; ++i)
    for (int j = 0; j < l; ++j) {
      if (i == j) continue;
      switch (spec.kind) {
        case PotentialKind::Potts:
          D(i, j) = 1.0;
          break;
        case PotentialKind::Linear:
          if (spec.c <= 0) throw std::invalid_argument("linear potential: c must be positive");
          D(i, j) = spec.c * std::abs(i - j);
          break;
        case PotentialKind::TruncatedLinear:
          if (spec.c <= 0 || spec.cap <= 0)
            throw std::invalid_argument("truncated linear potential: c and cap must be positive");
          D(i, j) = spec.c * std::min<double>(std::abs(i - j), spec.cap);
          break;
        case PotentialKind::Custom:
          break;
      }
    }
  return metric_or_throw(D);
}

inline Metric potts_metric(int l) {
  PotentialSpec s;
  s.kind = PotentialKind::Potts;
  return build_named_potential(s, l);
}

inline Metric linear_metric(double c, int l) {
  PotentialSpec s;
  s.kind = PotentialKind::Linear;
  s.c = c;
  return build_named_potential(s, l);
}

inline Metric truncated_linear_metric(double c, double cap, int l) {
  PotentialSpec s;
  s.kind = PotentialKind::TruncatedLinear;
  s.c = c;
  s.cap = cap;
  return build_named_potential(s, l);
}

// min_i sqrt(sum_j d(i,j)^2): radius bound of the envelope dual set.
inline double alpha_d(const Metric& m) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < m.labels(); ++i) best = std::min(best, m.distances.row(i).norm());
  return best;
}

}  // namespace mlabel
