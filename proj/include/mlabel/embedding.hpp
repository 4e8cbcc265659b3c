#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

#include "mlabel/metric.hpp"

namespace mlabel {

// Label coordinates a^1..a^l as columns of A (k x l). Column distances
// reproduce the source potential up to eps_e.
struct EmbeddingMatrix {
  Eigen::MatrixXd A;       // k x l
  Eigen::MatrixXd source;  // l x l potential the embedding approximates
  double eps_e = 0.0;      // max_{i,j} | ||a^i - a^j|| - source(i,j) |

  int k() const { return static_cast<int>(A.rows()); }
  int labels() const { return static_cast<int>(A.cols()); }
  double pair_distance(int i, int j) const { return (A.col(i) - A.col(j)).norm(); }

  double spectral_norm() const {
    if (A.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A.transpose() * A);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
  }
};

inline double max_distance_error(const Eigen::MatrixXd& A, const Eigen::MatrixXd& D) {
  double err = 0.0;
  for (int i = 0; i < A.cols(); ++i)
    for (int j = i + 1; j < A.cols(); ++j)
      err = std::max(err, std::abs((A.col(i) - A.col(j)).norm() - D(i, j)));
  return err;
}

// Potts: A = (1/sqrt(2)) I, all pair distances exactly 1.
inline EmbeddingMatrix exact_embedding_potts(int l) {
  if (l < 2) throw std::invalid_argument("exact_embedding_potts: need l >= 2");
  EmbeddingMatrix e;
  e.A = Eigen::MatrixXd::Identity(l, l) / std::sqrt(2.0);
  e.source = potts_metric(l).distances;
  e.eps_e = 0.0;
  return e;
}

// Linear label metric d(i,j) = c|i-j|: one-dimensional embedding (c,2c,...,lc).
inline EmbeddingMatrix exact_embedding_linear(double c, int l) {
  if (l < 2 || c <= 0) throw std::invalid_argument("exact_embedding_linear: need l >= 2, c > 0");
  EmbeddingMatrix e;
  e.A.resize(1, l);
  for (int i = 0; i < l; ++i) e.A(0, i) = c * (i + 1);
  e.source = linear_metric(c, l).distances;
  e.eps_e = 0.0;
  return e;
}

// Classical scaling: eigendecompose T = -1/2 C D2 C (D2 = squared distances,
// C the centering matrix) and keep the strictly positive spectrum. Negative
// eigenvalues, which appear exactly when the metric is not Euclidean, are
// clipped to zero; eps_e records the resulting worst-case distance error.
inline EmbeddingMatrix classical_scaling_embed(const Metric& metric) {
  const int l = metric.labels();
  const Eigen::MatrixXd D2 = metric.distances.array().square();
  const Eigen::MatrixXd C =
      Eigen::MatrixXd::Identity(l, l) - Eigen::MatrixXd::Constant(l, l, 1.0 / l);
  const Eigen::MatrixXd T = -0.5 * C * D2 * C;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
  const Eigen::VectorXd eig = es.eigenvalues();
  const double threshold = 1e-12 * std::max(1e-300, eig.cwiseAbs().maxCoeff());

  int k = 0;
  for (int i = 0; i < l; ++i)
    if (eig(i) > threshold) ++k;

  EmbeddingMatrix e;
  e.source = metric.distances;
  if (k == 0) {
    e.A = Eigen::MatrixXd::Zero(1, l);
  } else {
    e.A.resize(k, l);
    int row = 0;
    for (int i = 0; i < l; ++i) {
      if (eig(i) <= threshold) continue;
      e.A.row(row++) = std::sqrt(eig(i)) * es.eigenvectors().col(i).transpose();
    }
  }
  e.eps_e = max_distance_error(e.A, metric.distances);
  return e;
}

}  // namespace mlabel
