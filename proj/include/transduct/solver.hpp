#pragma once

// Block majorize-minimize solver for the text-regularized GMM objective.
//
// Rows of every D-indexed array are laid out support first, then query, so
// query row q lives at index n_support + q. Support rows of z are one-hot and
// never touched by z_step.

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "transduct/kernels.hpp"
#include "transduct/types.hpp"

namespace transduct {

enum class ObjectiveKind {
  /// GMM term carries 1/|Q|, support term gamma/|S|.
  PaperLiteral,
  /// Query GMM term at unit weight, support term gamma*|Q|/|S|. The z, mu and
  /// sigma updates are exact block minimizers (z: of its majorizer) of this one.
  UpdateConsistent,
};

enum class Block { Init, Z, Mu, Sigma };

const char* to_string(Block b);

struct TraceEntry {
  int iteration = 0;  // outer iteration, 1-based; 0 for Init
  Block block = Block::Init;
  int inner = 0;      // z sweep index within the outer iteration, 1-based
  double paper_literal = 0.0;
  double update_consistent = 0.0;
};

/// A validated task laid out over D = S u Q.
struct Problem {
  Matrix features;  // (|S| + |Q|) x d
  Labels support_labels;
  std::size_t n_support = 0;
  std::size_t n_query = 0;
  std::size_t n_classes = 0;
  Matrix soft_labels;  // |Q| x K
  Matrix log_prior;    // log(max(soft_labels, kProbFloor))
  Hyperparams hyper;   // gamma is 0 whenever the support set is empty

  std::size_t n_total() const noexcept { return n_support + n_query; }
};

/// Validates `spec`, stacks support and query rows, computes soft labels.
Problem make_problem(const TaskSpec& spec, Exec exec = Exec::Parallel);

struct SolverState {
  Matrix z;  // (|S| + |Q|) x K
  GmmParams gmm;
  AffinityGraph graph;
  std::vector<TraceEntry> trace;

  // Cache of gmm_log_probs over all D rows; invalidated by mu/sigma updates.
  Matrix log_probs;
  bool log_probs_current = false;
};

/// Builds the kNN graph, then initializes mu (support class means when a
/// support set exists, else top-m confident queries), diag(Sigma) = 1/d,
/// z = soft labels on query rows and one-hot labels on support rows.
SolverState initial_state(const Problem& problem, Exec exec = Exec::Parallel);

/// Same as above with caller-supplied GMM parameters.
SolverState initial_state(const Problem& problem, GmmParams gmm, Exec exec = Exec::Parallel);

/// GMM log-likelihoods (without the 2 pi constant) of every row of F.
Matrix gmm_log_probs(const Matrix& f, const GmmParams& gmm, Exec exec = Exec::Parallel);

/// Recomputes state.log_probs if stale and returns it.
const Matrix& refresh_log_probs(SolverState& state, const Problem& problem, Exec exec = Exec::Parallel);

/// One Jacobi sweep of the decoupled z update over query rows.
void z_step(SolverState& state, const Problem& problem, Exec exec = Exec::Parallel);

/// Closed-form class means. A class whose weighted mass is below 1e-12 keeps
/// its previous mean.
void mu_step(SolverState& state, const Problem& problem);

/// Closed-form shared diagonal variance, floored at kVarianceFloor.
void sigma_step(SolverState& state, const Problem& problem);

/// Objective value; 0 log 0 is taken as 0.
double objective(const SolverState& state, const Problem& problem, ObjectiveKind kind, Exec exec = Exec::Parallel);

using BlockObserver = std::function<void(const SolverState&, Block, int iteration, int inner)>;

struct RunOptions {
  Exec exec = Exec::Parallel;
  bool record_trace = true;
  BlockObserver observer;  // called after init and after every block
};

/// Runs hyper.outer_iters rounds of (inner_z_iters z sweeps, mu, sigma) on
/// `state`.
void run_iterations(SolverState& state, const Problem& problem, const RunOptions& options = {});

struct RunResult {
  Problem problem;
  SolverState state;
  SimplexAssignments query_z;          // |Q| x K
  std::vector<std::size_t> predictions;  // argmax of query_z
  std::vector<std::size_t> zero_shot_predictions;  // argmax of soft labels
};

/// Full pipeline on a task: make_problem, initial_state, run_iterations.
RunResult run(const TaskSpec& spec, const RunOptions& options = {});

/// CSV "iteration,block,paper_literal,update_consistent". Block is one of
/// init, z<inner>, mu, sigma.
void write_trace_csv(const std::vector<TraceEntry>& trace, const std::string& path);

}  // namespace transduct
