#include "transduct/solver.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "transduct/affinity.hpp"
#include "transduct/zero_shot.hpp"

namespace transduct {
namespace {

// x * log(x) with the 0 log 0 = 0 convention.
double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

double row_dot(const Matrix& a, Eigen::Index i, const Matrix& b, Eigen::Index j) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < a.cols(); ++k) s += a(i, k) * b(j, k);
  return s;
}

double support_weight(const Problem& p) {
  return p.n_support > 0 ? p.hyper.gamma / static_cast<double>(p.n_support) : 0.0;
}

double query_weight(const Problem& p) { return 1.0 / static_cast<double>(p.n_query); }

}  // namespace

const char* to_string(Block b) {
  switch (b) {
    case Block::Init: return "init";
    case Block::Z: return "z";
    case Block::Mu: return "mu";
    case Block::Sigma: return "sigma";
  }
  return "?";
}

Problem make_problem(const TaskSpec& raw, Exec exec) {
  const TaskSpec spec = validate_task(raw);
  Problem p;
  p.n_query = spec.query.n_rows();
  p.n_classes = spec.n_classes();
  p.hyper = spec.hyper;
  const Eigen::Index d = spec.query.data().cols();
  if (spec.support) {
    p.n_support = spec.support->embeddings.n_rows();
    p.support_labels = spec.support->labels;
  } else {
    p.hyper.gamma = 0.0;
  }
  p.features.resize(static_cast<Eigen::Index>(p.n_total()), d);
  if (p.n_support > 0) p.features.topRows(static_cast<Eigen::Index>(p.n_support)) = spec.support->embeddings.data();
  p.features.bottomRows(static_cast<Eigen::Index>(p.n_query)) = spec.query.data();

  p.soft_labels = compute_soft_labels(spec.query, spec.text, spec.tau, exec).z;
  p.log_prior = p.soft_labels.unaryExpr([](double v) { return std::log(std::max(v, kProbFloor)); });
  return p;
}

SolverState initial_state(const Problem& problem, Exec exec) {
  const auto d = problem.features.cols();
  GmmParams gmm;
  if (problem.n_support > 0) {
    const auto support = EmbeddingMatrix::from_rows(problem.features.topRows(static_cast<Eigen::Index>(problem.n_support)));
    gmm.mu = init_prototypes_support(support, problem.support_labels, problem.n_classes);
  } else {
    const auto query = EmbeddingMatrix::from_rows(problem.features.bottomRows(static_cast<Eigen::Index>(problem.n_query)));
    gmm.mu = init_prototypes_topk(query, SimplexAssignments{problem.soft_labels},
                                  static_cast<std::size_t>(problem.hyper.top_m_init));
  }
  gmm.sigma_diag = Vector::Constant(d, 1.0 / static_cast<double>(d));
  return initial_state(problem, std::move(gmm), exec);
}

SolverState initial_state(const Problem& problem, GmmParams gmm, Exec exec) {
  const auto kc = static_cast<Eigen::Index>(problem.n_classes);
  if (gmm.mu.rows() != kc || gmm.mu.cols() != problem.features.cols() || gmm.sigma_diag.size() != problem.features.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "initial GMM parameters do not match the task shape");
  }
  SolverState s;
  s.gmm = std::move(gmm);
  s.gmm.sigma_diag = s.gmm.sigma_diag.cwiseMax(kVarianceFloor);

  if (problem.hyper.k_nn > 0) {
    s.graph = kernels::knn_graph(problem.features, static_cast<std::size_t>(problem.hyper.k_nn), exec);
    if (problem.hyper.symmetrize_graph) s.graph = symmetrize(s.graph);
  } else {
    s.graph = AffinityGraph::empty(problem.n_total());
  }

  s.z = Matrix::Zero(static_cast<Eigen::Index>(problem.n_total()), kc);
  for (std::size_t i = 0; i < problem.n_support; ++i) {
    s.z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(problem.support_labels[i])) = 1.0;
  }
  s.z.bottomRows(static_cast<Eigen::Index>(problem.n_query)) = problem.soft_labels;
  return s;
}

Matrix gmm_log_probs(const Matrix& f, const GmmParams& gmm, Exec exec) {
  Matrix out;
  kernels::gmm_log_probs(f, gmm.mu, gmm.sigma_diag, out, exec);
  return out;
}

const Matrix& refresh_log_probs(SolverState& state, const Problem& problem, Exec exec) {
  if (!state.log_probs_current) {
    kernels::gmm_log_probs(problem.features, state.gmm.mu, state.gmm.sigma_diag, state.log_probs, exec);
    state.log_probs_current = true;
  }
  return state.log_probs;
}

void z_step(SolverState& state, const Problem& problem, Exec exec) {
  const Matrix& lp = refresh_log_probs(state, problem, exec);
  Matrix next;
  kernels::z_sweep(state.z, lp, problem.log_prior, problem.hyper.lambda, state.graph, problem.n_support, next, exec);
  state.z = std::move(next);
}

void mu_step(SolverState& state, const Problem& problem) {
  const double ws = support_weight(problem), wq = query_weight(problem);
  const Eigen::Index n_s = static_cast<Eigen::Index>(problem.n_support);
  const Eigen::Index n = static_cast<Eigen::Index>(problem.n_total());
  const Eigen::Index d = problem.features.cols();
  Vector num(d);
  for (Eigen::Index k = 0; k < state.gmm.mu.rows(); ++k) {
    num.setZero();
    double den = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double w = (i < n_s ? ws : wq) * state.z(i, k);
      if (w == 0.0) continue;
      for (Eigen::Index c = 0; c < d; ++c) num[c] += w * problem.features(i, c);
      den += w;
    }
    if (den < 1e-12) continue;
    for (Eigen::Index c = 0; c < d; ++c) state.gmm.mu(k, c) = num[c] / den;
  }
  state.log_probs_current = false;
}

void sigma_step(SolverState& state, const Problem& problem) {
  const double ws = support_weight(problem), wq = query_weight(problem);
  const Eigen::Index n_s = static_cast<Eigen::Index>(problem.n_support);
  const Eigen::Index n = static_cast<Eigen::Index>(problem.n_total());
  const Eigen::Index d = problem.features.cols();
  const Eigen::Index kc = state.gmm.mu.rows();
  Vector scatter = Vector::Zero(d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double wi = i < n_s ? ws : wq;
    for (Eigen::Index k = 0; k < kc; ++k) {
      const double w = wi * state.z(i, k);
      if (w == 0.0) continue;
      for (Eigen::Index c = 0; c < d; ++c) {
        const double diff = problem.features(i, c) - state.gmm.mu(k, c);
        scatter[c] += w * diff * diff;
      }
    }
  }
  const double denom = problem.hyper.gamma + 1.0;
  for (Eigen::Index c = 0; c < d; ++c) state.gmm.sigma_diag[c] = std::max(scatter[c] / denom, kVarianceFloor);
  state.log_probs_current = false;
}

double objective(const SolverState& state, const Problem& problem, ObjectiveKind kind, Exec exec) {
  Matrix local;
  const Matrix* lp = &state.log_probs;
  if (!state.log_probs_current) {
    kernels::gmm_log_probs(problem.features, state.gmm.mu, state.gmm.sigma_diag, local, exec);
    lp = &local;
  }
  const Eigen::Index n_s = static_cast<Eigen::Index>(problem.n_support);
  const Eigen::Index n = static_cast<Eigen::Index>(problem.n_total());
  const Eigen::Index kc = state.z.cols();
  const double lambda = problem.hyper.lambda;

  // Per-row terms are computed independently, then summed in row order.
  std::vector<double> gmm_term(static_cast<std::size_t>(n)), kl_term(static_cast<std::size_t>(n), 0.0),
      lap_term(static_cast<std::size_t>(n));
  auto row = [&](Eigen::Index i) {
    double g = 0.0;
    for (Eigen::Index k = 0; k < kc; ++k) g -= state.z(i, k) * (*lp)(i, k);
    gmm_term[static_cast<std::size_t>(i)] = g;
    if (i >= n_s) {
      double kl = 0.0;
      for (Eigen::Index k = 0; k < kc; ++k) {
        const double zik = state.z(i, k);
        kl += xlogx(zik);
        if (lambda != 0.0 && zik != 0.0) kl -= lambda * zik * problem.log_prior(i - n_s, k);
      }
      kl_term[static_cast<std::size_t>(i)] = kl;
    }
    double lap = 0.0;
    const auto node = static_cast<std::size_t>(i);
    for (const Edge* e = state.graph.begin(node); e != state.graph.end(node); ++e) {
      lap += e->weight * row_dot(state.z, i, state.z, static_cast<Eigen::Index>(e->target));
    }
    lap_term[static_cast<std::size_t>(i)] = lap;
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) row(i);
  } else {
    for (Eigen::Index i = 0; i < n; ++i) row(i);
  }

  double gmm_s = 0.0, gmm_q = 0.0, kl = 0.0, lap = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    (i < n_s ? gmm_s : gmm_q) += gmm_term[u];
    kl += kl_term[u];
    lap += lap_term[u];
  }
  const double nq = static_cast<double>(problem.n_query);
  const double ns = static_cast<double>(problem.n_support);
  const double gamma = problem.hyper.gamma;
  const double support_scale = problem.n_support > 0 ? gamma / ns : 0.0;
  if (kind == ObjectiveKind::PaperLiteral) {
    return gmm_q / nq - lap + kl + support_scale * gmm_s;
  }
  return gmm_q + kl - lap + support_scale * nq * gmm_s;
}

void run_iterations(SolverState& state, const Problem& problem, const RunOptions& options) {
  const Exec exec = options.exec;
  auto after_block = [&](Block block, int iteration, int inner) {
    if (options.record_trace) {
      if (block != Block::Z) refresh_log_probs(state, problem, exec);
      TraceEntry e;
      e.iteration = iteration;
      e.block = block;
      e.inner = inner;
      e.paper_literal = objective(state, problem, ObjectiveKind::PaperLiteral, exec);
      e.update_consistent = objective(state, problem, ObjectiveKind::UpdateConsistent, exec);
      state.trace.push_back(e);
    }
    if (options.observer) options.observer(state, block, iteration, inner);
  };

  if (state.trace.empty()) after_block(Block::Init, 0, 0);
  for (int t = 1; t <= problem.hyper.outer_iters; ++t) {
    for (int s = 1; s <= problem.hyper.inner_z_iters; ++s) {
      z_step(state, problem, exec);
      after_block(Block::Z, t, s);
    }
    mu_step(state, problem);
    after_block(Block::Mu, t, 0);
    sigma_step(state, problem);
    after_block(Block::Sigma, t, 0);
  }
}

RunResult run(const TaskSpec& spec, const RunOptions& options) {
  RunResult r;
  r.problem = make_problem(spec, options.exec);
  r.state = initial_state(r.problem, options.exec);
  run_iterations(r.state, r.problem, options);
  r.query_z.z = r.state.z.bottomRows(static_cast<Eigen::Index>(r.problem.n_query));
  r.predictions = hard_predict(r.query_z.z);
  r.zero_shot_predictions = hard_predict(r.problem.soft_labels);
  return r;
}

void write_trace_csv(const std::vector<TraceEntry>& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path + " for writing");
  out << "iteration,block,paper_literal,update_consistent\n";
  char buf[128];
  for (const TraceEntry& e : trace) {
    std::string block = to_string(e.block);
    if (e.block == Block::Z) block += std::to_string(e.inner);
    std::snprintf(buf, sizeof buf, "%.17g,%.17g", e.paper_literal, e.update_consistent);
    out << e.iteration << ',' << block << ',' << buf << '\n';
  }
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path);
}

}  // namespace transduct
