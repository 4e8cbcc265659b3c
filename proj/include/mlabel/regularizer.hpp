#pragma once

#include <Eigen/Dense>
#include <limits>
#include <vector>

#include "mlabel/embedding.hpp"
#include "mlabel/metric.hpp"
#include "mlabel/projections.hpp"

namespace mlabel {

// Choice of regularizer: the envelope construction over a metric (tight for
// any metric, implicit integrand) or the Euclidean embedding (closed-form
// integrand, exact for Euclidean metrics only). lambda multiplies the metric
// resp. the embedding before solver assembly, so the saddle-point form never
// carries a separate weight.
struct RegularizerSpec {
  enum class Kind { Envelope, Euclidean };

  Kind kind = Kind::Euclidean;
  Metric metric;              // Envelope payload (unscaled)
  EmbeddingMatrix embedding;  // Euclidean payload (unscaled)
  double lambda = 1.0;

  static RegularizerSpec envelope(Metric m, double lambda = 1.0) {
    RegularizerSpec r;
    r.kind = Kind::Envelope;
    r.metric = std::move(m);
    r.lambda = lambda;
    return r;
  }
  static RegularizerSpec euclidean(EmbeddingMatrix e, double lambda = 1.0) {
    RegularizerSpec r;
    r.kind = Kind::Euclidean;
    r.embedding = std::move(e);
    r.lambda = lambda;
    return r;
  }

  bool is_euclidean() const { return kind == Kind::Euclidean; }
  int labels() const {
    return is_euclidean() ? embedding.labels() : metric.labels();
  }
  // Channel count of the dual field blocks.
  int dual_channels() const { return is_euclidean() ? embedding.k() : metric.labels(); }

  Metric scaled_metric() const { return metric.scaled(lambda); }
  Eigen::MatrixXd scaled_A() const { return lambda * embedding.A; }
};

// Regularizer integrand for the Euclidean method: Psi(z) = ||z A^T||_F for a
// Jacobian block z (d x l). Positively homogeneous and convex.
inline double psi_euclidean(const Eigen::MatrixXd& z, const EmbeddingMatrix& e) {
  if (z.cols() != e.labels())
    throw std::invalid_argument("psi_euclidean: block/embedding label mismatch");
  return (z * e.A.transpose()).norm();
}

struct PsiBudget {
  double tau = 2.0;
  int iters = 500;
  double dykstra_tol = 1e-9;
  int dykstra_cap = 500;
};

// Lower bound for the envelope integrand Psi_d(z) = max over the envelope dual
// set of <z,v>, computed by gradient projection v <- Pi(v + tau z). The bound
// sequence is nondecreasing up to projection tolerance; iteration aborts early
// once the bound clears `early_exit_above`. Per-iterate bounds are appended to
// `trace` when given.
inline double psi_envelope_lower_bound(
    const Eigen::MatrixXd& z, const Metric& metric, const PsiBudget& budget = {},
    std::vector<double>* trace = nullptr,
    double early_exit_above = std::numeric_limits<double>::infinity()) {
  if (budget.iters < 1 || budget.tau <= 0)
    throw std::invalid_argument("psi_envelope_lower_bound: need iters >= 1, tau > 0");
  Eigen::MatrixXd v = z;
  double best = 0.0;  // 0 is feasible, so Psi >= 0 always holds
  for (int k = 0; k < budget.iters; ++k) {
    v = project_envelope(v + budget.tau * z, metric, budget.dykstra_tol, budget.dykstra_cap);
    const double bound = (z.array() * v.array()).sum();
    if (trace) trace->push_back(bound);
    best = std::max(best, bound);
    if (best > early_exit_above) break;
  }
  return best;
}

// Psi applied to a rank-one block e^1 z^T: the label-space distance used by
// the improved binarization. For the Euclidean method this is just ||A z||.
inline double psi_bar(const Eigen::VectorXd& z, const RegularizerSpec& reg,
                      const PsiBudget& budget = {},
                      double early_exit_above = std::numeric_limits<double>::infinity()) {
  if (reg.is_euclidean()) return (reg.embedding.A * z).norm();
  Eigen::MatrixXd block = Eigen::MatrixXd::Zero(1, z.size());
  block.row(0) = z.transpose();
  return psi_envelope_lower_bound(block, reg.metric, budget, nullptr, early_exit_above);
}

}  // namespace mlabel
