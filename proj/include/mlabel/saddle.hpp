#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>

#include "mlabel/grid.hpp"
#include "mlabel/grid_calculus.hpp"
#include "mlabel/parallel.hpp"
#include "mlabel/projections.hpp"
#include "mlabel/regularizer.hpp"

namespace mlabel {

// Bilinear saddle-point problem min_{u in C} max_{v in D} <u,s> + <Lu,v> - <b,v>
// over a grid, with L = A (x) grad. The regularizer weight is already folded
// into A (Euclidean) resp. the metric (envelope), so L and D carry it.
struct SaddleProblem {
  Grid grid;
  int l = 0;  // primal channels (labels)
  int k = 0;  // dual channels per direction
  Eigen::MatrixXd s;  // n x l data term
  Eigen::MatrixXd b;  // n x (d*k) bias; empty means zero
  RegularizerSpec reg;

  bool euclidean = true;
  Eigen::MatrixXd A;  // scaled embedding, k x l (Euclidean only)
  Metric metric;      // scaled metric (envelope only)
  double norm_bound = 0.0;
  std::shared_ptr<const IdentityPlusLtLSolver> ltl;

  int pixels() const { return grid.size(); }
  bool has_bias() const { return b.size() != 0; }

  Eigen::MatrixXd apply_L(const Eigen::MatrixXd& u) const {
    const int d = grid.dim();
    Eigen::MatrixXd W = euclidean ? Eigen::MatrixXd(u * A.transpose()) : u;
    Eigen::MatrixXd out(grid.size(), d * k);
    for (int a = 0; a < d; ++a)
      for (int c = 0; c < k; ++c)
        axis_forward_diff(grid, a, W.col(c), out.col(a * k + c));
    return out;
  }

  Eigen::MatrixXd apply_Lt(const Eigen::MatrixXd& v) const {
    const int d = grid.dim();
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(grid.size(), k);
    for (int a = 0; a < d; ++a)
      for (int c = 0; c < k; ++c)
        axis_grad_adjoint_add(grid, a, v.col(a * k + c), acc.col(c));
    return euclidean ? Eigen::MatrixXd(acc * A) : acc;
  }

  // Row-wise simplex projection.
  void project_C(Eigen::MatrixXd& u, int threads = 1) const {
    parallel_for(0, static_cast<int>(u.rows()), threads, [&](int p) {
      project_simplex_inplace(
          Eigen::Ref<Eigen::VectorXd, 0, Eigen::InnerStride<>>(u.row(p).transpose()));
    });
  }

  // Per-pixel projection onto D_loc: unit Frobenius ball (Euclidean) or the
  // envelope set via Dykstra (tol/cap control the inner loop).
  void project_D(Eigen::MatrixXd& v, double dykstra_tol = 1e-2, int dykstra_cap = 50,
                 int threads = 1) const {
    const int d = grid.dim();
    if (euclidean) {
      parallel_for(0, static_cast<int>(v.rows()), threads, [&](int p) {
        const double nrm = v.row(p).norm();
        if (nrm > 1.0) v.row(p) /= nrm;
      });
      return;
    }
    parallel_for(0, static_cast<int>(v.rows()), threads, [&](int p) {
      Eigen::MatrixXd block(d, k);
      for (int a = 0; a < d; ++a)
        for (int c = 0; c < k; ++c) block(a, c) = v(p, a * k + c);
      block = project_envelope(block, metric, dykstra_tol, dykstra_cap);
      for (int a = 0; a < d; ++a)
        for (int c = 0; c < k; ++c) v(p, a * k + c) = block(a, c);
    });
  }

  Eigen::MatrixXd uniform_primal() const {
    return Eigen::MatrixXd::Constant(grid.size(), l, 1.0 / l);
  }
  Eigen::MatrixXd zero_dual() const {
    return Eigen::MatrixXd::Zero(grid.size(), grid.dim() * k);
  }
};

inline SaddleProblem make_saddle_problem(const Grid& grid, Eigen::MatrixXd s,
                                         RegularizerSpec reg, Eigen::MatrixXd b = {}) {
  SaddleProblem p;
  p.grid = grid;
  p.l = reg.labels();
  p.k = reg.dual_channels();
  if (s.rows() != grid.size() || s.cols() != p.l)
    throw std::invalid_argument("make_saddle_problem: data term shape mismatch");
  if (!s.allFinite()) throw std::invalid_argument("make_saddle_problem: data term not finite");
  if (b.size() != 0 && (b.rows() != grid.size() || b.cols() != grid.dim() * p.k))
    throw std::invalid_argument("make_saddle_problem: bias shape mismatch");
  if (reg.lambda <= 0) throw std::invalid_argument("make_saddle_problem: lambda must be positive");
  p.s = std::move(s);
  p.b = std::move(b);
  p.euclidean = reg.is_euclidean();
  p.norm_bound = operator_norm_bound(reg, grid);
  if (p.euclidean) {
    p.A = reg.scaled_A();
    p.ltl = std::make_shared<IdentityPlusLtLSolver>(grid, p.A, p.l);
  } else {
    p.metric = reg.scaled_metric();
    p.ltl = std::make_shared<IdentityPlusLtLSolver>(grid, p.l);
  }
  p.reg = std::move(reg);
  return p;
}

struct PrimalValue {
  double value = std::numeric_limits<double>::quiet_NaN();
  bool exact = false;  // false: envelope lower bound, not usable for gaps
};

// <u,s> plus the regularizer. Euclidean: sum of per-pixel Jacobian norms of
// Au, in closed form. Envelope: per-pixel gradient-projection lower bound,
// flagged approximate.
inline PrimalValue primal_objective(const Eigen::MatrixXd& u, const SaddleProblem& p,
                                    const PsiBudget& envelope_budget = {}) {
  double value = (u.array() * p.s.array()).sum();
  Eigen::MatrixXd Lu = p.apply_L(u);
  if (p.has_bias()) Lu -= p.b;
  if (p.euclidean) {
    value += Lu.rowwise().norm().sum();
    return {value, true};
  }
  const int d = p.grid.dim();
  for (int px = 0; px < Lu.rows(); ++px) {
    Eigen::MatrixXd block(d, p.k);
    for (int a = 0; a < d; ++a)
      for (int c = 0; c < p.k; ++c) block(a, c) = Lu(px, a * p.k + c);
    if (block.norm() < 1e-300) continue;
    value += psi_envelope_lower_bound(block, p.metric, envelope_budget);
  }
  return {value, false};
}

// -<b,v> + sum over pixels of the componentwise minimum of (L^T v + s).
inline double dual_objective(const Eigen::MatrixXd& v, const SaddleProblem& p) {
  Eigen::MatrixXd lin = p.apply_Lt(v) + p.s;
  double value = lin.rowwise().minCoeff().sum();
  if (p.has_bias()) value -= (p.b.array() * v.array()).sum();
  return value;
}

struct GapValue {
  double gap = 0.0;
  double rel_gap = 0.0;
  bool absolute_fallback = false;  // set when the dual objective vanishes
};

// Primal-dual gap; unavailable for the envelope method (the primal cannot be
// evaluated exactly, and a lower bound would underestimate the gap).
inline std::optional<GapValue> gap(const Eigen::MatrixXd& u, const Eigen::MatrixXd& v,
                                   const SaddleProblem& p) {
  if (!p.euclidean) return std::nullopt;
  const double f = primal_objective(u, p).value;
  const double fd = dual_objective(v, p);
  GapValue g;
  g.gap = f - fd;
  if (std::abs(fd) < 1e-12) {
    g.rel_gap = g.gap;
    g.absolute_fallback = true;
  } else {
    g.rel_gap = g.gap / std::abs(fd);
  }
  return g;
}

}  // namespace mlabel
