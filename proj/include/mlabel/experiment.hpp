#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "mlabel/image_io.hpp"
#include "mlabel/pipeline.hpp"
#include "mlabel/report_io.hpp"
#include "mlabel/solvers.hpp"

namespace mlabel {

// Configuration or input errors that should surface as exit code 1; the
// message always names the offending field.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct ExperimentConfig {
  std::optional<std::string> image_path;
  std::optional<BenchmarkSpec> benchmark;

  std::optional<Eigen::MatrixXd> prototypes;  // required for image inputs
  PotentialSpec potential;
  std::optional<std::string> potential_matrix_path;

  RegularizerSpec::Kind reg_kind = RegularizerSpec::Kind::Euclidean;
  double lambda = 1.0;

  SolverMethod method = SolverMethod::DouglasRachford;
  SolverConfig solver;

  std::string binarization = "psi_nearest";  // or "first_max"
  std::string output_dir = "out";
  std::uint64_t seed = 0;
  int threads = 1;
};

inline SolverMethod solver_method_from_string(const std::string& s) {
  if (s == "fpd") return SolverMethod::FPD;
  if (s == "nesterov") return SolverMethod::Nesterov;
  if (s == "dr") return SolverMethod::DouglasRachford;
  if (s == "dr_dual") return SolverMethod::DouglasRachfordDual;
  throw ConfigError("solver.method: unknown method '" + s + "' (fpd|nesterov|dr|dr_dual)");
}

inline ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
  ExperimentConfig cfg;
  try {
    if (!j.contains("input")) throw ConfigError("input: missing (benchmark or image)");
    const auto& input = j.at("input");
    if (input.contains("benchmark")) {
      const auto& b = input.at("benchmark");
      BenchmarkSpec spec;
      spec.kind = benchmark_kind_from_string(b.at("kind").get<std::string>());
      spec.size = b.value("size", 64);
      spec.sigma = b.value("sigma", spec.kind == BenchmarkSpec::Kind::FourColors ? 1.0 : 0.0);
      spec.inverse = b.value("inverse", false);
      spec.tiles = b.value("tiles", 2);
      cfg.benchmark = spec;
    } else if (input.contains("image")) {
      cfg.image_path = input.at("image").get<std::string>();
    } else {
      throw ConfigError("input: needs either 'benchmark' or 'image'");
    }

    if (j.contains("labels")) {
      const auto& lab = j.at("labels");
      if (lab.contains("prototypes")) cfg.prototypes = matrix_from_json(lab.at("prototypes"));
    }
    if (cfg.image_path && !cfg.prototypes)
      throw ConfigError("labels.prototypes: required for image inputs");

    if (j.contains("potential")) {
      const auto& pot = j.at("potential");
      const std::string kind = pot.value("kind", "potts");
      if (kind == "potts") {
        cfg.potential.kind = PotentialKind::Potts;
      } else if (kind == "linear") {
        cfg.potential.kind = PotentialKind::Linear;
        cfg.potential.c = pot.value("c", 1.0);
      } else if (kind == "truncated_linear") {
        cfg.potential.kind = PotentialKind::TruncatedLinear;
        cfg.potential.c = pot.value("c", 1.0);
        cfg.potential.cap = pot.value("cap", 2.0);
      } else if (kind == "matrix") {
        cfg.potential.kind = PotentialKind::Custom;
        cfg.potential_matrix_path = pot.at("path").get<std::string>();
      } else {
        throw ConfigError("potential.kind: unknown kind '" + kind + "'");
      }
    }

    const std::string reg = j.value("regularizer", "euclidean");
    if (reg == "euclidean")
      cfg.reg_kind = RegularizerSpec::Kind::Euclidean;
    else if (reg == "envelope")
      cfg.reg_kind = RegularizerSpec::Kind::Envelope;
    else
      throw ConfigError("regularizer: must be 'euclidean' or 'envelope'");

    cfg.lambda = j.value("lambda", 1.0);
    if (cfg.lambda <= 0) throw ConfigError("lambda: must be positive");

    if (j.contains("solver")) {
      const auto& s = j.at("solver");
      cfg.method = solver_method_from_string(s.value("method", "dr"));
      cfg.solver.max_iter = s.value("max_iter", cfg.solver.max_iter);
      cfg.solver.rel_gap_tol = s.value("rel_gap_tol", cfg.solver.rel_gap_tol);
      cfg.solver.tau = s.value("tau", cfg.solver.tau);
      cfg.solver.tau_p = s.value("tau_p", cfg.solver.tau_p);
      cfg.solver.tau_d = s.value("tau_d", cfg.solver.tau_d);
      cfg.solver.nesterov_n = s.value("nesterov_n", cfg.solver.nesterov_n);
      cfg.solver.dykstra_tol = s.value("dykstra_tol", cfg.solver.dykstra_tol);
      cfg.solver.dykstra_cap = s.value("dykstra_cap", cfg.solver.dykstra_cap);
      cfg.solver.log_every = s.value("log_every", cfg.solver.log_every);
    }

    cfg.binarization = j.value("binarization", "psi_nearest");
    if (cfg.binarization != "psi_nearest" && cfg.binarization != "first_max")
      throw ConfigError("binarization: must be 'psi_nearest' or 'first_max'");

    cfg.output_dir = j.value("output", "out");
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.threads = j.value("threads", 1);
    cfg.solver.seed = cfg.seed;
    cfg.solver.threads = cfg.threads;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config: invalid JSON in '" + path + "': " + e.what());
  }
  return parse_experiment_config(j);
}

// Builds the regularizer for a label count: exact embeddings where available
// (Potts, linear), classical scaling otherwise.
inline RegularizerSpec build_regularizer(const PotentialSpec& pot, RegularizerSpec::Kind kind,
                                         double lambda, int l) {
  const Metric metric = build_named_potential(pot, l);
  if (kind == RegularizerSpec::Kind::Envelope) return RegularizerSpec::envelope(metric, lambda);
  EmbeddingMatrix emb;
  switch (pot.kind) {
    case PotentialKind::Potts:
      emb = exact_embedding_potts(l);
      break;
    case PotentialKind::Linear:
      emb = exact_embedding_linear(pot.c, l);
      break;
    default:
      emb = classical_scaling_embed(metric);
      break;
  }
  return RegularizerSpec::euclidean(emb, lambda);
}

struct ExperimentResult {
  SolverReport report;
  DiscreteLabeling labeling;
  BinarizationReport binarization;
  int exit_code = 0;
};

// End-to-end solve: assemble the problem, run the chosen solver, binarize and
// certify, and emit all artifacts into the output directory.
inline ExperimentResult run_solve(const ExperimentConfig& cfg) {
  Grid grid;
  Eigen::MatrixXd features;
  LabelSet labels;
  Eigen::MatrixXd s;

  if (cfg.benchmark) {
    BenchmarkProblem bench = generate_benchmark(*cfg.benchmark, cfg.seed);
    grid = bench.grid;
    features = bench.image;
    labels = bench.labels;
    if (cfg.prototypes) {
      labels.prototypes = *cfg.prototypes;
      labels.names.clear();
    }
    bench.labels = labels;
    s = assemble_data_term(bench);
  } else {
    Image img = read_pnm(*cfg.image_path);
    grid = img.grid();
    features = img.values;
    labels.prototypes = *cfg.prototypes;
    if (labels.feature_dim() != img.channels())
      throw ConfigError("labels.prototypes: feature dimension " +
                        std::to_string(labels.feature_dim()) + " does not match image channels (" +
                        std::to_string(img.channels()) + ")");
    s = build_l1_data_term(features, labels);
  }

  PotentialSpec pot = cfg.potential;
  if (cfg.potential_matrix_path) {
    pot.custom = matrix_from_json(read_json(*cfg.potential_matrix_path).at("d"));
    if (pot.custom.rows() != labels.count())
      throw ConfigError("potential.path: matrix has " + std::to_string(pot.custom.rows()) +
                        " labels, problem has " + std::to_string(labels.count()));
  }

  // Zero-distance classes are merged before validation; the per-pixel decision
  // is replayed after the solve.
  const Eigen::MatrixXd s_original = s;
  const Eigen::MatrixXd D_raw = pot.kind == PotentialKind::Custom
                                    ? pot.custom
                                    : build_named_potential(pot, labels.count()).distances;
  CollapseResult collapse = collapse_zero_distance_classes(s, D_raw);
  if (collapse.collapsed) {
    s = collapse.s;
    pot.kind = PotentialKind::Custom;
    pot.custom = collapse.metric.distances;
  }
  const int l = static_cast<int>(s.cols());

  RegularizerSpec reg = build_regularizer(pot, cfg.reg_kind, cfg.lambda, l);
  SaddleProblem problem = make_saddle_problem(grid, s, reg);
  SolverReport report = solve(problem, cfg.method, cfg.solver);

  DiscreteLabeling reduced = cfg.binarization == "first_max"
                                 ? binarize_first_max(grid, report.u)
                                 : binarize_psi_nearest(grid, report.u, reg);
  BinarizationReport bin =
      binarization_bound(reduced, report.u, report.v, problem, cfg.binarization);
  DiscreteLabeling labeling =
      collapse.collapsed ? expand_labeling(reduced, s_original, collapse) : reduced;

  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);
  const auto out = [&](const std::string& name) { return (fs::path(cfg.output_dir) / name).string(); };

  write_report_csv(out("log.csv"), report);
  write_json(out("relaxed.json"), relaxed_to_json(grid, report.u));
  if (grid.dim() == 2)
    for (int c = 0; c < report.u.cols(); ++c)
      write_pnm(out("relaxed_class" + std::to_string(c + 1) + ".pgm"),
                channel_image(grid, report.u.col(c)));
  write_json(out("labels.json"), labeling_to_json(labeling));
  if (grid.dim() == 2) write_label_pgm(out("labels.pgm"), labeling, labels.count());

  nlohmann::json summary = report_summary_json(report);
  summary["seed"] = cfg.seed;
  summary["lambda"] = cfg.lambda;
  summary["labels"] = labels.count();
  summary["grid"] = grid.dims;
  summary["binarization"] = binarization_to_json(bin);
  if (collapse.collapsed) summary["collapsed_classes"] = collapse.class_map;
  write_json(out("summary.json"), summary);

  ExperimentResult res;
  res.report = std::move(report);
  res.labeling = std::move(labeling);
  res.binarization = bin;
  res.exit_code = res.report.termination == Termination::MaxIter ? 2 : 0;
  return res;
}

}  // namespace mlabel
