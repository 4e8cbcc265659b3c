#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlabel/metric.hpp"
#include "mlabel/rng.hpp"
#include "mlabel/saddle.hpp"

namespace mlabel {

// Prototype feature vectors, one row per class (gray levels or RGB in [0,1]).
struct LabelSet {
  Eigen::MatrixXd prototypes;  // l x f
  std::vector<std::string> names;

  int count() const { return static_cast<int>(prototypes.rows()); }
  int feature_dim() const { return static_cast<int>(prototypes.cols()); }
};

// s_i(x) = ||g(x) - c^i||_1.
inline Eigen::MatrixXd build_l1_data_term(const Eigen::MatrixXd& features,
                                          const LabelSet& labels) {
  if (features.cols() != labels.feature_dim())
    throw std::invalid_argument("build_l1_data_term: feature dimension " +
                                std::to_string(features.cols()) + " does not match prototypes (" +
                                std::to_string(labels.feature_dim()) + ")");
  const int n = static_cast<int>(features.rows());
  const int l = labels.count();
  Eigen::MatrixXd s(n, l);
  for (int i = 0; i < l; ++i)
    s.col(i) = (features.rowwise() - labels.prototypes.row(i)).cwiseAbs().rowwise().sum();
  return s;
}

// Hard labeling; entries are 1-based label indices.
struct DiscreteLabeling {
  Grid grid;
  std::vector<int> labels;
};

inline Eigen::MatrixXd labeling_to_field(const DiscreteLabeling& lab, int l) {
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(lab.grid.size(), l);
  for (int p = 0; p < static_cast<int>(lab.labels.size()); ++p) {
    const int idx = lab.labels[p] - 1;
    if (idx < 0 || idx >= l) throw std::invalid_argument("labeling_to_field: label out of range");
    u(p, idx) = 1.0;
  }
  return u;
}

// --- zero-distance class collapsing -----------------------------------------

struct CollapseResult {
  Eigen::MatrixXd s;                      // n x l'
  Metric metric;                          // reduced potential, strictly positive off-diagonal
  std::vector<int> class_map;             // original class (0-based) -> reduced class (0-based)
  std::vector<std::vector<int>> members;  // reduced class -> original classes
  bool collapsed = false;
};

// Classes at potential distance zero are indistinguishable to the regularizer;
// merge them, take the elementwise minimum of their data term columns, and
// remember the grouping so the decision can be replayed per pixel after the
// solve.
inline CollapseResult collapse_zero_distance_classes(const Eigen::MatrixXd& s,
                                                     const Eigen::MatrixXd& D) {
  const int l = static_cast<int>(D.rows());
  if (D.cols() != l || s.cols() != l)
    throw std::invalid_argument("collapse_zero_distance_classes: shape mismatch");

  // Connected components over zero-distance edges.
  std::vector<int> group(l, -1);
  int groups = 0;
  for (int i = 0; i < l; ++i) {
    if (group[i] >= 0) continue;
    const int g = groups++;
    std::vector<int> stack{i};
    group[i] = g;
    while (!stack.empty()) {
      const int a = stack.back();
      stack.pop_back();
      for (int b = 0; b < l; ++b)
        if (group[b] < 0 && std::abs(D(a, b)) <= 1e-12) {
          group[b] = g;
          stack.push_back(b);
        }
    }
  }

  CollapseResult res;
  res.class_map = group;
  res.members.resize(groups);
  for (int i = 0; i < l; ++i) res.members[group[i]].push_back(i);
  res.collapsed = groups < l;

  Eigen::MatrixXd Dr(groups, groups);
  for (int g = 0; g < groups; ++g)
    for (int h = 0; h < groups; ++h) Dr(g, h) = g == h ? 0.0 : D(res.members[g][0], res.members[h][0]);
  res.metric = metric_or_throw(Dr);

  res.s.resize(s.rows(), groups);
  for (int g = 0; g < groups; ++g) {
    res.s.col(g) = s.col(res.members[g][0]);
    for (size_t m = 1; m < res.members[g].size(); ++m)
      res.s.col(g) = res.s.col(g).cwiseMin(s.col(res.members[g][m]));
  }
  return res;
}

// Replays the per-pixel decision between merged classes using the original
// data term (first member wins ties).
inline DiscreteLabeling expand_labeling(const DiscreteLabeling& reduced,
                                        const Eigen::MatrixXd& s_original,
                                        const CollapseResult& collapse) {
  DiscreteLabeling out{reduced.grid, std::vector<int>(reduced.labels.size(), 1)};
  for (size_t p = 0; p < reduced.labels.size(); ++p) {
    const auto& mem = collapse.members[reduced.labels[p] - 1];
    int best = mem[0];
    for (size_t m = 1; m < mem.size(); ++m)
      if (s_original(p, mem[m]) < s_original(p, best)) best = mem[m];
    out.labels[p] = best + 1;
  }
  return out;
}

// --- binarization ------------------------------------------------------------

// Index of the first maximal component per pixel.
inline DiscreteLabeling binarize_first_max(const Grid& grid, const Eigen::MatrixXd& u) {
  DiscreteLabeling lab{grid, std::vector<int>(u.rows())};
  for (int p = 0; p < u.rows(); ++p) {
    int best = 0;
    for (int i = 1; i < u.cols(); ++i)
      if (u(p, i) > u(p, best)) best = i;
    lab.labels[p] = best + 1;
  }
  return lab;
}

// Nearest unit vector in the regularizer's own distance: argmin over labels of
// PsiBar(u(x) - e^label). Closed form for the Euclidean method; for the
// envelope method a fixed gradient-projection budget per candidate, aborting a
// candidate as soon as its lower bound exceeds the current best.
inline DiscreteLabeling binarize_psi_nearest(const Grid& grid, const Eigen::MatrixXd& u,
                                             const RegularizerSpec& reg,
                                             PsiBudget budget = {2.0, 200, 1e-9, 200}) {
  const int l = static_cast<int>(u.cols());
  DiscreteLabeling lab{grid, std::vector<int>(u.rows())};
  Eigen::VectorXd z(l);
  for (int p = 0; p < u.rows(); ++p) {
    int best = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    for (int i = 0; i < l; ++i) {
      z = u.row(p).transpose();
      z(i) -= 1.0;
      const double cost = psi_bar(z, reg, budget, best_cost);
      if (cost < best_cost) {
        best_cost = cost;
        best = i;
      }
    }
    lab.labels[p] = best + 1;
  }
  return lab;
}

struct BinarizationReport {
  std::string method;
  double energy_relaxed = 0.0;
  double energy_binary = 0.0;
  double dual_value = 0.0;
  double suboptimality_bound = 0.0;  // (f(binarized) - f_D(v)) / |f_D(v)|
  bool exact = true;                 // false when energies are envelope lower bounds
};

// A-posteriori certificate for a binarized labeling against the dual value of
// the relaxed solve.
inline BinarizationReport binarization_bound(const DiscreteLabeling& binarized,
                                             const Eigen::MatrixXd& u_relaxed,
                                             const Eigen::MatrixXd& v, const SaddleProblem& p,
                                             const std::string& method_name = "",
                                             const PsiBudget& envelope_budget = {}) {
  BinarizationReport rep;
  rep.method = method_name;
  const PrimalValue fb = primal_objective(labeling_to_field(binarized, p.l), p, envelope_budget);
  const PrimalValue fr = primal_objective(u_relaxed, p, envelope_budget);
  rep.energy_binary = fb.value;
  rep.energy_relaxed = fr.value;
  rep.dual_value = dual_objective(v, p);
  rep.exact = fb.exact;
  const double denom = std::abs(rep.dual_value);
  rep.suboptimality_bound =
      denom < 1e-12 ? fb.value - rep.dual_value : (fb.value - rep.dual_value) / denom;
  return rep;
}

// --- synthetic benchmark problems --------------------------------------------

struct BenchmarkSpec {
  enum class Kind { FourColors, TriplePoint, Checker };
  Kind kind = Kind::FourColors;
  int size = 64;
  double sigma = 1.0;    // noise level (FourColors default per the benchmark)
  bool inverse = false;  // TriplePoint: negate the data term
  int tiles = 2;         // Checker: board cells per side
};

inline BenchmarkSpec::Kind benchmark_kind_from_string(const std::string& s) {
  if (s == "four_colors" || s == "fourcolors") return BenchmarkSpec::Kind::FourColors;
  if (s == "triple_point" || s == "triplepoint") return BenchmarkSpec::Kind::TriplePoint;
  if (s == "checker") return BenchmarkSpec::Kind::Checker;
  throw std::invalid_argument("unknown benchmark kind: " + s);
}

struct BenchmarkProblem {
  Grid grid;
  Eigen::MatrixXd image;  // n x f features in [0,1]
  LabelSet labels;
  std::vector<std::uint8_t> mask;  // 1: data term zeroed at this pixel
  DiscreteLabeling ground_truth;
  bool negate_data = false;
};

namespace detail {

inline void add_clamped_noise(Eigen::MatrixXd& image, double sigma, Rng& rng) {
  if (sigma <= 0) return;
  for (int p = 0; p < image.rows(); ++p)
    for (int c = 0; c < image.cols(); ++c)
      image(p, c) = std::clamp(image(p, c) + sigma * rng.normal(), 0.0, 1.0);
}

}  // namespace detail

// Synthetic segmentation inputs. FourColors: rectangle, disk and a wavy blob
// over a uniform background (4 RGB prototypes) with clamped Gaussian noise.
// TriplePoint: three wedges meeting at the center, data term blanked in a
// centered square so the junction must be reconstructed by the regularizer;
// the inverse variant flips the sign of the data term. Checker: two-class
// board for continuous-cut style tests.
inline BenchmarkProblem generate_benchmark(const BenchmarkSpec& spec, std::uint64_t seed) {
  if (spec.size < 8) throw std::invalid_argument("generate_benchmark: size must be >= 8");
  const int size = spec.size;
  Grid grid({size, size});
  const int n = grid.size();
  Rng rng(seed);

  BenchmarkProblem out;
  out.grid = grid;
  out.mask.assign(n, 0);
  out.ground_truth.grid = grid;
  out.ground_truth.labels.assign(n, 1);

  auto px = [&](int p, int axis) { return grid.coord(p, axis); };

  switch (spec.kind) {
    case BenchmarkSpec::Kind::FourColors: {
      out.labels.prototypes.resize(4, 3);
      out.labels.prototypes << 0.85, 0.10, 0.10,  // red rectangle
          0.10, 0.70, 0.15,                       // green disk
          0.15, 0.20, 0.85,                       // blue blob
          0.95, 0.92, 0.80;                       // background
      out.labels.names = {"rect", "disk", "blob", "background"};
      out.image.resize(n, 3);
      for (int p = 0; p < n; ++p) {
        const double y = (px(p, 0) + 0.5) / size;
        const double x = (px(p, 1) + 0.5) / size;
        int label = 4;
        if (x >= 0.08 && x <= 0.46 && y >= 0.12 && y <= 0.52) label = 1;
        const double dx_disk = x - 0.72, dy_disk = y - 0.30;
        if (dx_disk * dx_disk + dy_disk * dy_disk <= 0.17 * 0.17) label = 2;
        const double dx_blob = x - 0.42, dy_blob = y - 0.75;
        const double r = std::hypot(dx_blob, dy_blob);
        const double theta = std::atan2(dy_blob, dx_blob);
        if (r <= 0.16 * (1.0 + 0.35 * std::sin(3.0 * theta) + 0.12 * std::cos(5.0 * theta)))
          label = 3;
        out.ground_truth.labels[p] = label;
        out.image.row(p) = out.labels.prototypes.row(label - 1);
      }
      detail::add_clamped_noise(out.image, spec.sigma, rng);
      break;
    }
    case BenchmarkSpec::Kind::TriplePoint: {
      out.labels.prototypes.resize(3, 3);
      out.labels.prototypes << 0.9, 0.1, 0.1, 0.1, 0.8, 0.15, 0.15, 0.2, 0.9;
      out.labels.names = {"red", "green", "blue"};
      out.image.resize(n, 3);
      const double c = (size - 1) / 2.0;
      const int half = size / 6;
      for (int p = 0; p < n; ++p) {
        const double dy = px(p, 0) - c;
        const double dx = px(p, 1) - c;
        const double angle = std::atan2(dy, dx) + M_PI;  // [0, 2pi]
        int label = 1 + std::min(2, static_cast<int>(3.0 * angle / (2.0 * M_PI)));
        out.ground_truth.labels[p] = label;
        out.image.row(p) = out.labels.prototypes.row(label - 1);
        if (std::abs(dy) <= half && std::abs(dx) <= half) out.mask[p] = 1;
      }
      detail::add_clamped_noise(out.image, spec.sigma, rng);
      out.negate_data = spec.inverse;
      break;
    }
    case BenchmarkSpec::Kind::Checker: {
      if (spec.tiles < 1) throw std::invalid_argument("generate_benchmark: tiles must be >= 1");
      out.labels.prototypes.resize(2, 1);
      out.labels.prototypes << 0.1, 0.9;
      out.labels.names = {"dark", "light"};
      out.image.resize(n, 1);
      for (int p = 0; p < n; ++p) {
        const int ty = px(p, 0) * spec.tiles / size;
        const int tx = px(p, 1) * spec.tiles / size;
        const int label = 1 + (tx + ty) % 2;
        out.ground_truth.labels[p] = label;
        out.image(p, 0) = out.labels.prototypes(label - 1, 0);
      }
      detail::add_clamped_noise(out.image, spec.sigma, rng);
      break;
    }
  }
  return out;
}

// l1 data term with the benchmark's mask applied (zeroed rows) and the sign
// flip of the inverse variants.
inline Eigen::MatrixXd assemble_data_term(const BenchmarkProblem& bench) {
  Eigen::MatrixXd s = build_l1_data_term(bench.image, bench.labels);
  for (int p = 0; p < s.rows(); ++p)
    if (bench.mask[p]) s.row(p).setZero();
  if (bench.negate_data) s = -s;
  return s;
}

}  // namespace mlabel
