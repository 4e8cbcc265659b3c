#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "mlabel/grid.hpp"
#include "mlabel/regularizer.hpp"

namespace mlabel {

// Scalar fields over a grid are length-n vectors; multichannel fields are
// n x l matrices with one channel per column. Dual fields stack the d
// derivative directions: n x (d*k), column a*k + c holding direction a of
// channel c, so row p is the vectorized d x k Jacobian block at pixel p.

struct PrimalField {
  Grid grid;
  Eigen::MatrixXd values;  // n x l

  int channels() const { return static_cast<int>(values.cols()); }
};

struct DualField {
  Grid grid;
  int channels = 0;
  Eigen::MatrixXd values;  // n x (d*channels)
};

// out = forward difference of `in` along `axis` (zero at the far boundary).
inline void axis_forward_diff(const Grid& g, int axis,
                              const Eigen::Ref<const Eigen::VectorXd>& in,
                              Eigen::Ref<Eigen::VectorXd> out) {
  const int m = g.dims[axis];
  const int post = g.stride(axis);
  const int pre = g.size() / (m * post);
  for (int p = 0; p < pre; ++p) {
    const int base = p * m * post;
    for (int i = 0; i + 1 < m; ++i)
      out.segment(base + i * post, post) =
          in.segment(base + (i + 1) * post, post) - in.segment(base + i * post, post);
    out.segment(base + (m - 1) * post, post).setZero();
  }
}

// out += (forward difference along axis)^T applied to `in`.
inline void axis_grad_adjoint_add(const Grid& g, int axis,
                                  const Eigen::Ref<const Eigen::VectorXd>& in,
                                  Eigen::Ref<Eigen::VectorXd> out) {
  const int m = g.dims[axis];
  const int post = g.stride(axis);
  const int pre = g.size() / (m * post);
  for (int p = 0; p < pre; ++p) {
    const int base = p * m * post;
    for (int i = 0; i < m; ++i) {
      auto seg = out.segment(base + i * post, post);
      if (i + 1 < m) seg -= in.segment(base + i * post, post);
      if (i > 0) seg += in.segment(base + (i - 1) * post, post);
    }
  }
}

// Forward-difference gradient with Neumann boundary handling; k = channels.
inline DualField gradient(const PrimalField& u) {
  const int d = u.grid.dim();
  const int l = u.channels();
  DualField v{u.grid, l, Eigen::MatrixXd(u.grid.size(), d * l)};
  for (int a = 0; a < d; ++a)
    for (int c = 0; c < l; ++c)
      axis_forward_diff(u.grid, a, u.values.col(c), v.values.col(a * l + c));
  return v;
}

// Backward-difference divergence; exactly -gradient^T.
inline PrimalField divergence(const DualField& v) {
  const int d = v.grid.dim();
  PrimalField u{v.grid, Eigen::MatrixXd::Zero(v.grid.size(), v.channels)};
  for (int a = 0; a < d; ++a)
    for (int c = 0; c < v.channels; ++c)
      axis_grad_adjoint_add(v.grid, a, v.values.col(a * v.channels + c), u.values.col(c));
  u.values = -u.values;
  return u;
}

// Eigenvalues of grad^T grad, indexed like pixels: the entry at multi-index
// (j_1,...,j_d) is sum_a (2 - 2 cos(pi j_a / n_a)). The constant mode is 0.
inline Eigen::VectorXd laplacian_spectrum(const Grid& g) {
  const int n = g.size();
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  for (int a = 0; a < g.dim(); ++a) {
    const int m = g.dims[a];
    Eigen::VectorXd eig(m);
    for (int j = 0; j < m; ++j) eig(j) = 2.0 - 2.0 * std::cos(M_PI * j / m);
    const int post = g.stride(a);
    for (int p = 0; p < n; ++p) c(p) += eig((p / post) % m);
  }
  return c;
}

enum class DctDirection { Forward, Inverse };

// Separable orthonormal DCT-2 over the grid, applied axis by axis as dense
// matrix products (inverse = transpose). Diagonalizes grad^T grad together
// with laplacian_spectrum.
class Dct2 {
 public:
  explicit Dct2(Grid g) : grid_(std::move(g)) {
    basis_.reserve(grid_.dim());
    for (int a = 0; a < grid_.dim(); ++a) {
      const int m = grid_.dims[a];
      Eigen::MatrixXd B(m, m);
      for (int j = 0; j < m; ++j) {
        const double scale = std::sqrt((j == 0 ? 1.0 : 2.0) / m);
        for (int k = 0; k < m; ++k) B(j, k) = scale * std::cos(M_PI * j * (2 * k + 1) / (2.0 * m));
      }
      basis_.push_back(std::move(B));
    }
  }

  const Grid& grid() const { return grid_; }

  void apply_inplace(Eigen::Ref<Eigen::VectorXd> x, DctDirection dir) const {
    for (int a = 0; a < grid_.dim(); ++a) apply_axis(x, a, dir);
  }

  Eigen::VectorXd apply(Eigen::VectorXd x, DctDirection dir) const {
    apply_inplace(x, dir);
    return x;
  }

  Eigen::VectorXd forward(Eigen::VectorXd x) const { return apply(std::move(x), DctDirection::Forward); }
  Eigen::VectorXd inverse(Eigen::VectorXd x) const { return apply(std::move(x), DctDirection::Inverse); }

 private:
  using RowMajorMap =
      Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

  void apply_axis(Eigen::Ref<Eigen::VectorXd> x, int axis, DctDirection dir) const {
    const int m = grid_.dims[axis];
    if (m == 1) return;
    const int post = grid_.stride(axis);
    const int pre = grid_.size() / (m * post);
    const Eigen::MatrixXd& B = basis_[axis];
    for (int p = 0; p < pre; ++p) {
      RowMajorMap block(x.data() + p * m * post, m, post);
      if (dir == DctDirection::Forward)
        block = (B * block).eval();
      else
        block = (B.transpose() * block).eval();
    }
  }

  Grid grid_;
  std::vector<Eigen::MatrixXd> basis_;
};

inline Eigen::VectorXd dct2(const Grid& g, Eigen::VectorXd x, DctDirection dir) {
  return Dct2(g).apply(std::move(x), dir);
}

// Solves (I + L^T L) x = rhs for L = A (x) grad via the spectral factorization:
// rotate channels into the eigenbasis of A^T A, apply the DCT per channel,
// divide by 1 + a_j c_p, and transform back. The identity case (A = I) skips
// the channel rotation.
class IdentityPlusLtLSolver {
 public:
  // Envelope / plain-gradient operator: A = I_l.
  IdentityPlusLtLSolver(const Grid& grid, int channels)
      : dct_(grid), spectrum_(laplacian_spectrum(grid)), identity_(true), channels_(channels) {
    eigvals_ = Eigen::VectorXd::Ones(channels);
  }

  // Euclidean operator with embedding matrix A (k x l, already scaled).
  IdentityPlusLtLSolver(const Grid& grid, const Eigen::MatrixXd& A, int channels)
      : dct_(grid), spectrum_(laplacian_spectrum(grid)), identity_(false), channels_(channels) {
    if (A.cols() != channels)
      throw std::invalid_argument("IdentityPlusLtLSolver: embedding has " +
                                  std::to_string(A.cols()) + " columns, expected " +
                                  std::to_string(channels));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A.transpose() * A);
    eigvals_ = es.eigenvalues().cwiseMax(0.0);  // clamp eigensolver roundoff
    rotation_ = es.eigenvectors();
  }

  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const {
    if (rhs.cols() != channels_)
      throw std::invalid_argument("IdentityPlusLtLSolver: rhs channel mismatch");
    Eigen::MatrixXd y = identity_ ? rhs : Eigen::MatrixXd(rhs * rotation_);
    for (int j = 0; j < channels_; ++j) {
      dct_.apply_inplace(y.col(j), DctDirection::Forward);
      y.col(j).array() /= (1.0 + eigvals_(j) * spectrum_.array());
      dct_.apply_inplace(y.col(j), DctDirection::Inverse);
    }
    if (!identity_) y = y * rotation_.transpose();
    return y;
  }

 private:
  Dct2 dct_;
  Eigen::VectorXd spectrum_;
  bool identity_;
  int channels_;
  Eigen::VectorXd eigvals_;   // eigenvalues of A^T A (ones for the identity case)
  Eigen::MatrixXd rotation_;  // eigenvectors of A^T A
};

// Analytic bound on ||L||: ||Grad|| <= 2 sqrt(d), times ||A|| for the
// Euclidean method (lambda is folded into A resp. the metric, and the
// envelope operator is Grad itself, so only the Euclidean bound sees lambda).
inline double operator_norm_bound(const RegularizerSpec& reg, const Grid& grid) {
  const double grad_bound = 2.0 * std::sqrt(static_cast<double>(grid.dim()));
  if (!reg.is_euclidean()) return grad_bound;
  return grad_bound * reg.lambda * reg.embedding.spectral_norm();
}

}  // namespace mlabel
