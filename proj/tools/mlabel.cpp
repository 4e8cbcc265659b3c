// Command-line front end: solve experiments from a JSON config, compute
// Euclidean label embeddings, and run the solver-comparison benchmark.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mlabel/experiment.hpp"

namespace {

using namespace mlabel;

int cmd_solve(const std::string& config_path, int threads) {
  ExperimentConfig cfg = load_experiment_config(config_path);
  if (threads > 1) {
    cfg.threads = threads;
    cfg.solver.threads = threads;
  }
  ExperimentResult res = run_solve(cfg);
  std::cerr << "solver " << solver_name(res.report.method) << " finished after "
            << res.report.iterations << " iterations (" << termination_name(res.report.termination)
            << "), dual " << res.report.final_dual;
  if (res.report.gap_available)
    std::cerr << ", rel gap " << res.report.final_rel_gap;
  else
    std::cerr << ", gap unavailable (envelope regularizer)";
  std::cerr << "\nbinarization bound " << res.binarization.suboptimality_bound * 100.0 << "%"
            << (res.binarization.exact ? "" : " (approximate)") << "\n";
  return res.exit_code;
}

Metric embed_input_metric(const std::string& potential, const std::string& matrix_path, int labels,
                          double c, double cap) {
  if (!matrix_path.empty()) {
    const Eigen::MatrixXd D = matrix_from_json(read_json(matrix_path).at("d"));
    auto validated = validate_metric(D);
    if (auto* viol = std::get_if<MetricViolation>(&validated))
      throw ConfigError("potential matrix: " + viol->message());
    return std::get<Metric>(validated);
  }
  PotentialSpec spec;
  if (potential == "potts")
    spec.kind = PotentialKind::Potts;
  else if (potential == "linear")
    spec.kind = PotentialKind::Linear;
  else if (potential == "truncated_linear")
    spec.kind = PotentialKind::TruncatedLinear;
  else
    throw ConfigError("--potential: unknown potential '" + potential + "'");
  spec.c = c;
  spec.cap = cap;
  if (labels < 2) throw ConfigError("--labels: need at least 2");
  return build_named_potential(spec, labels);
}

int cmd_embed(const std::string& potential, const std::string& matrix_path, int labels, double c,
              double cap, const std::string& out_path) {
  const Metric metric = embed_input_metric(potential, matrix_path, labels, c, cap);
  const EmbeddingMatrix emb = classical_scaling_embed(metric);
  write_json(out_path, embedding_to_json(emb));

  std::printf("embedding: l=%d k=%d eps_e=%.6g -> %s\n", emb.labels(), emb.k(), emb.eps_e,
              out_path.c_str());
  std::printf("%4s %4s %12s %12s %12s\n", "i", "j", "d(i,j)", "||ai-aj||", "error");
  for (int i = 0; i < emb.labels(); ++i)
    for (int j = i + 1; j < emb.labels(); ++j) {
      const double want = metric(i, j);
      const double got = emb.pair_distance(i, j);
      std::printf("%4d %4d %12.6f %12.6f %12.3e\n", i + 1, j + 1, want, got,
                  std::abs(got - want));
    }
  return 0;
}

std::vector<int> parse_sizes(const std::string& csv) {
  std::vector<int> sizes;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const int v = std::stoi(tok);
    if (v < 8) throw ConfigError("--sizes: sizes must be >= 8");
    sizes.push_back(v);
  }
  if (sizes.empty()) throw ConfigError("--sizes: empty list");
  return sizes;
}

// All three solvers on the four-colors benchmark at each size, fixed target
// relative gap, scaling table as CSV. Lambda scales with the image width so
// the problems stay structurally comparable across sizes.
int cmd_bench(const std::string& suite, const std::string& sizes_csv, std::uint64_t seed,
              double target, int max_iter, double lambda_base, const std::string& out_path,
              int threads) {
  if (suite != "fourcolors") throw ConfigError("--suite: only 'fourcolors' is available");
  const std::vector<int> sizes = parse_sizes(sizes_csv);

  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!out_path.empty()) {
    file.open(out_path);
    if (!file) throw ConfigError("--out: cannot write '" + out_path + "'");
    out = &file;
  }
  *out << "# mlabel-bench-v1\n";
  *out << "suite,size,solver,lambda,target_rel_gap,iterations,converged,final_rel_gap,final_gap,"
          "final_dual,seconds\n";

  for (int size : sizes) {
    BenchmarkSpec bspec;
    bspec.kind = BenchmarkSpec::Kind::FourColors;
    bspec.size = size;
    BenchmarkProblem bench = generate_benchmark(bspec, seed);
    const double lambda = lambda_base * size / 256.0;
    RegularizerSpec reg =
        RegularizerSpec::euclidean(exact_embedding_potts(bench.labels.count()), lambda);
    SaddleProblem problem = make_saddle_problem(bench.grid, assemble_data_term(bench), reg);

    for (SolverMethod method :
         {SolverMethod::FPD, SolverMethod::Nesterov, SolverMethod::DouglasRachford}) {
      SolverConfig scfg;
      scfg.max_iter = max_iter;
      scfg.rel_gap_tol = target;
      scfg.threads = threads;
      scfg.seed = seed;
      SolverReport rep = solve(problem, method, scfg);
      const bool converged = rep.termination == Termination::GapReached;
      *out << suite << "," << size << "," << solver_name(method) << "," << format_double(lambda)
           << "," << format_double(target) << "," << rep.iterations << "," << (converged ? 1 : 0)
           << "," << format_double(rep.final_rel_gap) << "," << format_double(rep.final_gap) << ","
           << format_double(rep.final_dual) << "," << format_double(rep.wall_seconds) << "\n";
      std::cerr << "bench " << suite << " size " << size << " " << solver_name(method) << ": "
                << rep.iterations << " iters, rel gap " << rep.final_rel_gap << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"convex multiclass labeling solver"};
  app.require_subcommand(1);
  int threads = 1;
  app.add_option("--threads", threads, "worker thread cap for per-pixel loops");

  std::string config_path;
  auto* solve_cmd = app.add_subcommand("solve", "run an experiment from a JSON config");
  solve_cmd->add_option("config", config_path, "experiment config (JSON)")->required();

  std::string potential = "potts", matrix_path, embed_out = "embedding.json";
  int labels = 4;
  double pc = 1.0, pcap = 2.0;
  auto* embed_cmd = app.add_subcommand("embed", "Euclidean embedding of a potential");
  embed_cmd->add_option("--potential", potential, "potts|linear|truncated_linear");
  embed_cmd->add_option("--matrix", matrix_path, "JSON file with a distance matrix under 'd'");
  embed_cmd->add_option("--labels", labels, "label count for named potentials");
  embed_cmd->add_option("--c", pc, "step weight for (truncated) linear");
  embed_cmd->add_option("--cap", pcap, "truncation for truncated_linear");
  embed_cmd->add_option("--out", embed_out, "output JSON path");

  std::string suite = "fourcolors", sizes = "16,32,64", bench_out;
  std::uint64_t seed = 7;
  double target = 1e-4, lambda_base = 2.0;
  int bench_max_iter = 5000;
  auto* bench_cmd = app.add_subcommand("bench", "solver comparison on synthetic problems");
  bench_cmd->add_option("--suite", suite, "benchmark suite (fourcolors)");
  bench_cmd->add_option("--sizes", sizes, "comma-separated image sizes");
  bench_cmd->add_option("--seed", seed, "noise seed");
  bench_cmd->add_option("--target", target, "target relative gap");
  bench_cmd->add_option("--max-iter", bench_max_iter, "iteration cap per solver");
  bench_cmd->add_option("--lambda-base", lambda_base, "regularization weight at size 256");
  bench_cmd->add_option("--out", bench_out, "CSV output path (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve_cmd->parsed()) return cmd_solve(config_path, threads);
    if (embed_cmd->parsed())
      return cmd_embed(potential, matrix_path, labels, pc, pcap, embed_out);
    if (bench_cmd->parsed())
      return cmd_bench(suite, sizes, seed, target, bench_max_iter, lambda_base, bench_out,
                       threads);
  } catch (const mlabel::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
