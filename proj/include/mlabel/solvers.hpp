#pragma once

#include <Eigen/Dense>
#include <chrono>
#include <functional>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlabel/saddle.hpp"

namespace mlabel {

enum class SolverMethod { FPD, Nesterov, DouglasRachford, DouglasRachfordDual };

inline std::string solver_name(SolverMethod m) {
  switch (m) {
    case SolverMethod::FPD: return "fpd";
    case SolverMethod::Nesterov: return "nesterov";
    case SolverMethod::DouglasRachford: return "dr";
    case SolverMethod::DouglasRachfordDual: return "dr_dual";
  }
  return "?";
}

enum class Termination { GapReached, MaxIter, DualPlateau };

inline std::string termination_name(Termination t) {
  switch (t) {
    case Termination::GapReached: return "gap_reached";
    case Termination::MaxIter: return "max_iter";
    case Termination::DualPlateau: return "dual_plateau";
  }
  return "?";
}

struct SolverConfig {
  int max_iter = 5000;
  double rel_gap_tol = 1e-4;

  // FPD step sizes; <= 0 selects 1/(C (1+1e-6)) which satisfies the strict
  // step bound tau_p tau_d < 1/C^2.
  double tau_p = 0.0;
  double tau_d = 0.0;

  // Nesterov iteration count; < 0 means max_iter.
  int nesterov_n = -1;

  // Douglas-Rachford step size.
  double tau = 1.0;

  // Inner Dykstra loop for envelope projections.
  double dykstra_tol = 1e-2;
  int dykstra_cap = 50;

  int log_every = 10;
  std::uint64_t seed = 0;
  int threads = 1;

  // Optional initial iterates (defaults: uniform primal, zero dual).
  std::optional<Eigen::MatrixXd> u0;     // FPD/Nesterov primal, DR ubar
  std::optional<Eigen::MatrixXd> v0;     // FPD dual, dual-DR vbar
  std::optional<Eigen::MatrixXd> wbar0;  // DR auxiliary (default L u0)
  std::optional<Eigen::MatrixXd> zbar0;  // dual-DR auxiliary

  // Invoked with each feasible (u, v) pair as it is produced.
  std::function<void(int iter, const Eigen::MatrixXd& u, const Eigen::MatrixXd& v)> on_iterate;
};

struct LogRow {
  int iter = 0;
  double seconds = 0.0;
  double primal = std::numeric_limits<double>::quiet_NaN();
  double dual = std::numeric_limits<double>::quiet_NaN();
  double gap = std::numeric_limits<double>::quiet_NaN();
  double rel_gap = std::numeric_limits<double>::quiet_NaN();
};

struct SolverReport {
  SolverMethod method = SolverMethod::FPD;
  Termination termination = Termination::MaxIter;
  int iterations = 0;
  double wall_seconds = 0.0;
  bool gap_available = true;
  double norm_bound = 0.0;
  double nesterov_gap_bound = std::numeric_limits<double>::quiet_NaN();
  std::vector<LogRow> rows;

  Eigen::MatrixXd u;  // final primal iterate (feasible)
  Eigen::MatrixXd v;  // final dual iterate (feasible up to projection tol)

  double final_primal = std::numeric_limits<double>::quiet_NaN();
  double final_dual = std::numeric_limits<double>::quiet_NaN();
  double final_gap = std::numeric_limits<double>::quiet_NaN();
  double final_rel_gap = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

// Objective logging and the stopping rule shared by all solvers. Euclidean
// problems stop on the relative gap; envelope problems, where no gap exists,
// stop when the dual objective plateaus (relative change below 1e-8 over a
// 50-iteration window).
class ProgressMonitor {
 public:
  ProgressMonitor(const SaddleProblem& p, const SolverConfig& cfg, SolverReport& rep)
      : p_(p), cfg_(cfg), rep_(rep), start_(std::chrono::steady_clock::now()) {
    rep_.gap_available = p.euclidean;
  }

  // Records objectives on the logging cadence; returns true to stop.
  bool observe(int iter, const Eigen::MatrixXd& u, const Eigen::MatrixXd& v) {
    const bool last = iter >= cfg_.max_iter;
    if (iter % cfg_.log_every != 0 && !last) return false;

    LogRow row;
    row.iter = iter;
    row.seconds = elapsed();
    row.dual = dual_objective(v, p_);
    if (p_.euclidean) {
      row.primal = primal_objective(u, p_).value;
      row.gap = row.primal - row.dual;
      row.rel_gap = std::abs(row.dual) < 1e-12 ? row.gap : row.gap / std::abs(row.dual);
    }
    rep_.rows.push_back(row);

    bool stop = false;
    if (p_.euclidean && row.rel_gap <= cfg_.rel_gap_tol) {
      rep_.termination = Termination::GapReached;
      stop = true;
    } else if (!p_.euclidean && plateau(iter, row.dual)) {
      rep_.termination = Termination::DualPlateau;
      stop = true;
    } else if (last) {
      rep_.termination = Termination::MaxIter;
      stop = true;
    }
    if (stop) finalize(iter, u, v, row);
    return stop;
  }

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  bool plateau(int iter, double dual) {
    history_.emplace_back(iter, dual);
    for (auto it = history_.rbegin(); it != history_.rend(); ++it) {
      if (iter - it->first < 50) continue;
      return std::abs(dual - it->second) < 1e-8 * std::max(1.0, std::abs(dual));
    }
    return false;
  }

  void finalize(int iter, const Eigen::MatrixXd& u, const Eigen::MatrixXd& v,
                const LogRow& row) {
    rep_.iterations = iter;
    rep_.u = u;
    rep_.v = v;
    rep_.final_primal = row.primal;
    rep_.final_dual = row.dual;
    rep_.final_gap = row.gap;
    rep_.final_rel_gap = row.rel_gap;
    rep_.wall_seconds = elapsed();
  }

  const SaddleProblem& p_;
  const SolverConfig& cfg_;
  SolverReport& rep_;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::pair<int, double>> history_;
};

inline void validate_common(const SolverConfig& cfg) {
  if (cfg.max_iter < 1) throw std::invalid_argument("solver: max_iter must be >= 1");
  if (cfg.rel_gap_tol <= 0) throw std::invalid_argument("solver: rel_gap_tol must be positive");
  if (cfg.log_every < 1) throw std::invalid_argument("solver: log_every must be >= 1");
}

}  // namespace detail

// Alternating projected gradient descent/ascent with primal extrapolation.
inline SolverReport solve_fpd(const SaddleProblem& p, SolverConfig cfg) {
  detail::validate_common(cfg);
  const double C = p.norm_bound;
  if (C <= 0 && (cfg.tau_p <= 0 || cfg.tau_d <= 0))
    throw std::invalid_argument("solve_fpd: operator norm bound is zero, set step sizes");
  if (cfg.tau_p <= 0) cfg.tau_p = 1.0 / (C * (1.0 + 1e-6));
  if (cfg.tau_d <= 0) cfg.tau_d = 1.0 / (C * (1.0 + 1e-6));
  if (C > 0 && cfg.tau_p * cfg.tau_d >= 1.0 / (C * C))
    throw std::invalid_argument("solve_fpd: step sizes violate tau_p*tau_d < 1/||L||^2");

  SolverReport rep;
  rep.method = SolverMethod::FPD;
  rep.norm_bound = C;
  detail::ProgressMonitor monitor(p, cfg, rep);

  Eigen::MatrixXd u = cfg.u0.value_or(p.uniform_primal());
  Eigen::MatrixXd v = cfg.v0.value_or(p.zero_dual());
  Eigen::MatrixXd ubar = u;
  Eigen::MatrixXd unew;

  for (int k = 1; k <= cfg.max_iter; ++k) {
    v += cfg.tau_d * p.apply_L(ubar);
    if (p.has_bias()) v -= cfg.tau_d * p.b;
    p.project_D(v, cfg.dykstra_tol, cfg.dykstra_cap, cfg.threads);

    unew = u - cfg.tau_p * (p.apply_Lt(v) + p.s);
    p.project_C(unew, cfg.threads);

    ubar = 2.0 * unew - u;
    u.swap(unew);

    if (cfg.on_iterate) cfg.on_iterate(k, u, v);
    if (monitor.observe(k, u, v)) break;
  }
  return rep;
}

// Nesterov's smoothing scheme. The iterate pair after N+1 steps carries the a
// priori gap bound 2 r1 r2 C / (N+1), which is recorded in the report.
inline SolverReport solve_nesterov(const SaddleProblem& p, SolverConfig cfg) {
  detail::validate_common(cfg);
  const int N = cfg.nesterov_n >= 0 ? cfg.nesterov_n : cfg.max_iter;
  const double C = p.norm_bound;
  if (C <= 0) throw std::invalid_argument("solve_nesterov: operator norm bound is zero");

  const int n = p.pixels();
  const double r1 = std::sqrt(n * (p.l - 1.0) / p.l);
  const double r2 = p.euclidean ? std::sqrt(double(n)) : alpha_d(p.metric) * std::sqrt(double(n));
  const double mu = 2.0 * C * r1 / ((N + 1) * r2);
  const double step = mu / (C * C);

  SolverReport rep;
  rep.method = SolverMethod::Nesterov;
  rep.norm_bound = C;
  rep.nesterov_gap_bound = 2.0 * r1 * r2 * C / (N + 1);
  cfg.max_iter = N + 1;  // the monitor counts executed iterations
  detail::ProgressMonitor monitor(p, cfg, rep);

  Eigen::MatrixXd x = cfg.u0.value_or(p.uniform_primal());
  Eigen::MatrixXd wsum = p.zero_dual();
  Eigen::MatrixXd gsum = Eigen::MatrixXd::Zero(n, p.l);
  const Eigen::MatrixXd c1 = p.uniform_primal();
  Eigen::MatrixXd V, G, uk, zk, vk;

  for (int k = 0; k <= N; ++k) {
    V = p.apply_L(x);
    if (p.has_bias()) V -= p.b;
    V /= mu;
    p.project_D(V, cfg.dykstra_tol, cfg.dykstra_cap, cfg.threads);

    wsum += (k + 1.0) * V;

    G = p.s + p.apply_Lt(V);
    gsum += 0.5 * (k + 1.0) * G;

    uk = x - step * G;
    p.project_C(uk, cfg.threads);
    zk = c1 - step * gsum;
    p.project_C(zk, cfg.threads);

    const double theta = 2.0 / (k + 3.0);
    x = theta * zk + (1.0 - theta) * uk;

    const int iter = k + 1;
    if (cfg.on_iterate || iter % cfg.log_every == 0 || iter >= cfg.max_iter) {
      vk = (2.0 / ((k + 1.0) * (k + 2.0))) * wsum;
      if (cfg.on_iterate) cfg.on_iterate(iter, uk, vk);
      if (monitor.observe(iter, uk, vk)) break;
    }
  }
  return rep;
}

// Douglas-Rachford splitting on the constraint w = Lu; the resolvent of the
// coupling term is the spectral (I + L^T L) solve. Emits the feasible pair
// (u^k, w''^k) for gap-based stopping.
inline SolverReport solve_douglas_rachford(const SaddleProblem& p, SolverConfig cfg) {
  detail::validate_common(cfg);
  if (cfg.tau <= 0) throw std::invalid_argument("solve_douglas_rachford: tau must be positive");
  const double tau = cfg.tau;

  SolverReport rep;
  rep.method = SolverMethod::DouglasRachford;
  rep.norm_bound = p.norm_bound;
  detail::ProgressMonitor monitor(p, cfg, rep);

  Eigen::MatrixXd ubar = cfg.u0.value_or(p.uniform_primal());
  Eigen::MatrixXd wbar = cfg.wbar0.value_or(p.apply_L(ubar));
  Eigen::MatrixXd u, w2, u1, w1;

  for (int k = 1; k <= cfg.max_iter; ++k) {
    u = ubar - tau * p.s;
    p.project_C(u, cfg.threads);

    w2 = p.has_bias() ? Eigen::MatrixXd((wbar - p.b) / tau) : Eigen::MatrixXd(wbar / tau);
    p.project_D(w2, cfg.dykstra_tol, cfg.dykstra_cap, cfg.threads);

    u1 = p.ltl->solve((2.0 * u - ubar) + p.apply_Lt(wbar - 2.0 * tau * w2));
    w1 = p.apply_L(u1);

    ubar += u1 - u;
    wbar = w1 + tau * w2;

    if (cfg.on_iterate) cfg.on_iterate(k, u, w2);
    if (monitor.observe(k, u, w2)) break;
  }
  return rep;
}

// Douglas-Rachford applied to the dual problem (v <-> u, C <-> D, b <-> s,
// L <-> -L^T). (I + L L^T)^{-1} is reduced to the primal solver through the
// Woodbury identity. With tau_dual = 1/tau and coupled initialization its
// v-iterates coincide with the primal algorithm's w'' sequence.
inline SolverReport solve_douglas_rachford_dual(const SaddleProblem& p, SolverConfig cfg) {
  detail::validate_common(cfg);
  if (cfg.tau <= 0)
    throw std::invalid_argument("solve_douglas_rachford_dual: tau must be positive");
  const double tau = cfg.tau;

  SolverReport rep;
  rep.method = SolverMethod::DouglasRachfordDual;
  rep.norm_bound = p.norm_bound;
  detail::ProgressMonitor monitor(p, cfg, rep);

  Eigen::MatrixXd vbar = cfg.v0.value_or(p.zero_dual());
  Eigen::MatrixXd zbar = cfg.zbar0.value_or(Eigen::MatrixXd::Zero(p.pixels(), p.l));
  Eigen::MatrixXd v, z2, y, v1, z1;

  for (int k = 1; k <= cfg.max_iter; ++k) {
    v = vbar;
    if (p.has_bias()) v -= tau * p.b;
    p.project_D(v, cfg.dykstra_tol, cfg.dykstra_cap, cfg.threads);

    z2 = (zbar - p.s) / tau;
    p.project_C(z2, cfg.threads);

    y = (2.0 * v - vbar) - p.apply_L(zbar - 2.0 * tau * z2);
    v1 = y - p.apply_L(p.ltl->solve(p.apply_Lt(y)));
    z1 = -p.apply_Lt(v1);

    vbar += v1 - v;
    zbar = z1 + tau * z2;

    if (cfg.on_iterate) cfg.on_iterate(k, z2, v);
    if (monitor.observe(k, z2, v)) break;
  }
  return rep;
}

inline SolverReport solve(const SaddleProblem& p, SolverMethod method, SolverConfig cfg) {
  switch (method) {
    case SolverMethod::FPD: return solve_fpd(p, cfg);
    case SolverMethod::Nesterov: return solve_nesterov(p, cfg);
    case SolverMethod::DouglasRachford: return solve_douglas_rachford(p, cfg);
    case SolverMethod::DouglasRachfordDual: return solve_douglas_rachford_dual(p, cfg);
  }
  throw std::invalid_argument("solve: unknown method");
}

}  // namespace mlabel
