#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "mlabel/metric.hpp"

namespace mlabel {

// Projection of y onto the standard simplex {x >= 0, sum x = 1}. Iteratively
// shifts the non-fixed components onto the sum-one hyperplane and clamps
// negatives; the zero set grows monotonically, so at most l passes run.
// Accepts strided views so matrix rows can be projected in place.
inline void project_simplex_inplace(
    Eigen::Ref<Eigen::VectorXd, 0, Eigen::InnerStride<>> y) {
  const int l = static_cast<int>(y.size());
  if (l == 1) {
    y(0) = 1.0;
    return;
  }
  static thread_local std::vector<unsigned char> fixed;
  fixed.assign(l, 0);
  int active = l;
  for (int pass = 0; pass < l; ++pass) {
    double sum = 0.0;
    for (int i = 0; i < l; ++i)
      if (!fixed[i]) sum += y(i);
    const double shift = (sum - 1.0) / active;
    bool any_negative = false;
    for (int i = 0; i < l; ++i) {
      if (fixed[i]) continue;
      y(i) -= shift;
      if (y(i) < 0.0) {
        y(i) = 0.0;
        fixed[i] = 1;
        --active;
        any_negative = true;
      }
    }
    if (!any_negative) return;
  }
}

inline Eigen::VectorXd project_simplex(Eigen::VectorXd y) {
  project_simplex_inplace(y);
  return y;
}

// Local dual blocks are d x l matrices, one column per label.

inline Eigen::MatrixXd project_unit_ball(Eigen::MatrixXd v) {
  const double nrm = v.norm();
  if (nrm > 1.0) v /= nrm;
  return v;
}

// Projection onto {v : ||v^i - v^j|| <= dij}; columns other than i,j are
// untouched, the violating pair is pulled together symmetrically.
inline void project_pair_inplace(Eigen::MatrixXd& v, int i, int j, double dij) {
  if (i == j) throw std::invalid_argument("project_pair: need distinct labels");
  Eigen::VectorXd diff = v.col(i) - v.col(j);
  const double nrm = diff.norm();
  if (nrm <= dij) return;
  diff *= (nrm - dij) / (2.0 * nrm);
  v.col(i) -= diff;
  v.col(j) += diff;
}

inline Eigen::MatrixXd project_pair(Eigen::MatrixXd v, int i, int j, double dij) {
  project_pair_inplace(v, i, j, dij);
  return v;
}

// Projection onto {v : sum_i v^i = 0}: subtract the column mean.
inline Eigen::MatrixXd project_zero_sum(Eigen::MatrixXd v) {
  v.colwise() -= Eigen::VectorXd(v.rowwise().mean());
  return v;
}

struct DykstraResult {
  Eigen::MatrixXd x;
  int sweeps = 0;
  double delta = 0.0;  // Frobenius change of x over the last full sweep
};

// Dykstra iteration over the pairwise constraint sets, visited in fixed
// lexicographic order (i,j), i<j. Stops when a full sweep moves x by at most
// tol, or after max_sweeps; non-convergence is reported via delta, not thrown.
inline DykstraResult dykstra_project(const Eigen::MatrixXd& v, const Metric& metric,
                                     double tol, int max_sweeps) {
  if (tol <= 0 || max_sweeps < 1)
    throw std::invalid_argument("dykstra_project: tol must be positive, max_sweeps >= 1");
  const int l = metric.labels();
  if (v.cols() != l) throw std::invalid_argument("dykstra_project: block/metric label mismatch");
  const int pairs = l * (l - 1) / 2;

  DykstraResult res;
  res.x = v;
  std::vector<Eigen::MatrixXd> y(pairs, Eigen::MatrixXd::Zero(v.rows(), v.cols()));
  Eigen::MatrixXd prev, xp;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    prev = res.x;
    int t = 0;
    for (int i = 0; i < l; ++i)
      for (int j = i + 1; j < l; ++j, ++t) {
        xp = res.x + y[t];
        project_pair_inplace(xp, i, j, metric(i, j));
        y[t] += res.x - xp;
        res.x.swap(xp);
      }
    res.sweeps = sweep + 1;
    res.delta = (res.x - prev).norm();
    if (res.delta <= tol) break;
  }
  return res;
}

// Projection onto the envelope dual set (zero-sum matrices with pairwise
// column-distance bounds). The pairwise set is invariant under translations
// along the all-ones direction, so the zero-sum projection can be applied
// after the Dykstra loop.
inline Eigen::MatrixXd project_envelope(const Eigen::MatrixXd& v, const Metric& metric,
                                        double tol, int max_sweeps) {
  return project_zero_sum(dykstra_project(v, metric, tol, max_sweeps).x);
}

}  // namespace mlabel
