// Independent reference implementations used only by tests: dense operator
// matrices, an alternative simplex projection, and brute-force discrete
// energy minimization. These deliberately avoid the code paths they verify.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "mlabel/grid.hpp"
#include "mlabel/rng.hpp"

namespace oracle {

// Dense forward-difference matrix for one axis (n x n).
inline Eigen::MatrixXd dense_axis_diff(const mlabel::Grid& g, int axis) {
  const int n = g.size();
  const int m = g.dims[axis];
  const int stride = g.stride(axis);
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  for (int p = 0; p < n; ++p) {
    const int coord = (p / stride) % m;
    if (coord + 1 < m) {
      D(p, p) = -1.0;
      D(p, p + stride) = 1.0;
    }
  }
  return D;
}

// Dense grad: (n*d) x n, axis blocks stacked.
inline Eigen::MatrixXd dense_grad(const mlabel::Grid& g) {
  const int n = g.size();
  const int d = g.dim();
  Eigen::MatrixXd G(n * d, n);
  for (int a = 0; a < d; ++a) G.middleRows(a * n, n) = dense_axis_diff(g, a);
  return G;
}

inline Eigen::MatrixXd kron(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  Eigen::MatrixXd K(A.rows() * B.rows(), A.cols() * B.cols());
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j)
      K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return K;
}

// Sort-based simplex projection (threshold search over the sorted entries);
// an algorithmically independent route to the same projection.
inline Eigen::VectorXd simplex_projection_by_sort(const Eigen::VectorXd& y) {
  const int l = static_cast<int>(y.size());
  std::vector<double> sorted(y.data(), y.data() + l);
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double cumsum = 0.0, rho_sum = 1.0;
  int rho = 0;
  for (int j = 0; j < l; ++j) {
    cumsum += sorted[j];
    if (sorted[j] - (cumsum - 1.0) / (j + 1) > 0.0) {
      rho = j + 1;
      rho_sum = cumsum;
    }
  }
  const double theta = (rho_sum - 1.0) / rho;
  return (y.array() - theta).cwiseMax(0.0);
}

// Exhaustive active-set QP oracle: tries every subset of zeroed coordinates
// and keeps the KKT-consistent candidate. Exponential in l; use for small l.
inline Eigen::VectorXd simplex_projection_by_enumeration(const Eigen::VectorXd& y) {
  const int l = static_cast<int>(y.size());
  Eigen::VectorXd best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask + 1 < (1u << l); ++mask) {  // mask bit = coordinate pinned to 0
    int free_count = 0;
    double free_sum = 0.0;
    for (int i = 0; i < l; ++i)
      if (!(mask & (1u << i))) {
        ++free_count;
        free_sum += y(i);
      }
    const double shift = (free_sum - 1.0) / free_count;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(l);
    bool feasible = true;
    for (int i = 0; i < l; ++i)
      if (!(mask & (1u << i))) {
        x(i) = y(i) - shift;
        if (x(i) < -1e-14) feasible = false;
      }
    if (!feasible) continue;
    // KKT: pinned coordinates need y_i - shift <= 0
    bool kkt = true;
    for (int i = 0; i < l; ++i)
      if (mask & (1u << i))
        if (y(i) - shift > 1e-14) kkt = false;
    if (!kkt) continue;
    const double dist = (x - y).squaredNorm();
    if (dist < best_dist) {
      best_dist = dist;
      best = x;
    }
  }
  return best;
}

// Brute-force minimum of the discrete labeling energy
//   sum_x s(x, lab(x)) + lambda-free cost(jump blocks)
// where the per-pixel boundary cost is the Frobenius norm of the forward
// jumps of the embedded labels. Enumerates all l^n labelings via DFS.
struct DiscreteEnergy {
  const mlabel::Grid& grid;
  const Eigen::MatrixXd& s;  // n x l
  const Eigen::MatrixXd& A;  // k x l embedded label coordinates (scaled)

  double evaluate(const std::vector<int>& lab0 /*0-based*/) const {
    const int n = grid.size();
    double e = 0.0;
    for (int p = 0; p < n; ++p) e += s(p, lab0[p]);
    for (int p = 0; p < n; ++p) {
      double sq = 0.0;
      for (int a = 0; a < grid.dim(); ++a) {
        const int stride = grid.stride(a);
        const int coord = (p / stride) % grid.dims[a];
        if (coord + 1 < grid.dims[a])
          sq += (A.col(lab0[p + stride]) - A.col(lab0[p])).squaredNorm();
      }
      e += std::sqrt(sq);
    }
    return e;
  }

  std::pair<double, std::vector<int>> brute_force_min() const {
    const int n = grid.size();
    const int l = static_cast<int>(s.cols());
    std::vector<int> lab(n, 0), best(n, 0);
    double best_e = std::numeric_limits<double>::infinity();
    for (;;) {
      const double e = evaluate(lab);
      if (e < best_e) {
        best_e = e;
        best = lab;
      }
      int p = 0;
      while (p < n && ++lab[p] == l) lab[p++] = 0;
      if (p == n) break;
    }
    return {best_e, best};
  }
};

inline Eigen::VectorXd random_vector(mlabel::Rng& rng, int n, double scale = 1.0) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = scale * rng.normal();
  return v;
}

inline Eigen::MatrixXd random_matrix(mlabel::Rng& rng, int r, int c, double scale = 1.0) {
  Eigen::MatrixXd m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = scale * rng.normal();
  return m;
}

}  // namespace oracle
