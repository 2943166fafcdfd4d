#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace transduct {

/// Dense row-major storage used for every N x d / N x K array in the library.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Labels = std::vector<std::int64_t>;

enum class ErrorCode {
  DimensionMismatch,
  NonFiniteValue,
  LabelOutOfRange,
  NormTooFarFromUnit,
  EmptyClass,
  InsufficientShots,
  InvalidArgument,
  BadMagic,
  TruncatedFile,
  RaggedCsv,
  ParseError,
  NegativeLabel,
  IoFailure,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Rows further than this from unit L2 norm are rejected at validation.
inline constexpr double kUnitNormTolerance = 1e-2;
/// Lower bound applied to every per-dimension variance.
inline constexpr double kVarianceFloor = 1e-12;
/// Floor applied to soft labels before taking logs.
inline constexpr double kProbFloor = 1e-300;

/// N x d matrix of L2-normalized rows. Only constructible through
/// from_rows(), which checks finiteness and renormalizes near-unit rows.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;

  /// Validates `data` and renormalizes every row to unit norm. Throws
  /// NonFiniteValue, NormTooFarFromUnit or InvalidArgument (empty input).
  static EmbeddingMatrix from_rows(Matrix data);

  const Matrix& data() const noexcept { return data_; }
  std::size_t n_rows() const noexcept { return static_cast<std::size_t>(data_.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(data_.cols()); }

 private:
  explicit EmbeddingMatrix(Matrix data) : data_(std::move(data)) {}
  Matrix data_;
};

/// N x K matrix whose rows lie on the probability simplex.
struct SimplexAssignments {
  Matrix z;

  std::size_t n_rows() const noexcept { return static_cast<std::size_t>(z.rows()); }
  std::size_t n_classes() const noexcept { return static_cast<std::size_t>(z.cols()); }
};

/// True when every entry is in [0, 1] and every row sums to 1 within `tol`.
bool is_simplex(const Matrix& z, double tol = 1e-9);

/// Class means (K x d) and the shared diagonal covariance (d).
struct GmmParams {
  Matrix mu;
  Vector sigma_diag;
};

struct Edge {
  std::size_t target;
  double weight;
};

/// Sparse directed graph in CSR layout. Node i's out-edges are
/// edges[offsets[i] .. offsets[i + 1]), sorted by descending weight.
struct AffinityGraph {
  std::size_t n_nodes = 0;
  std::vector<std::size_t> offsets{0};
  std::vector<Edge> edges;

  std::size_t degree(std::size_t i) const { return offsets[i + 1] - offsets[i]; }
  const Edge* begin(std::size_t i) const { return edges.data() + offsets[i]; }
  const Edge* end(std::size_t i) const { return edges.data() + offsets[i + 1]; }

  /// Graph with `n` nodes and no edges.
  static AffinityGraph empty(std::size_t n);
};

struct Hyperparams {
  double lambda = 1.0;
  double gamma = 0.0;
  int outer_iters = 10;
  int inner_z_iters = 5;
  int k_nn = 3;
  int top_m_init = 8;
  bool symmetrize_graph = false;

  static Hyperparams zero_shot_defaults();
  static Hyperparams few_shot_defaults();
};

struct LabeledSet {
  EmbeddingMatrix embeddings;
  Labels labels;
};

/// One transduction problem. K is the number of text prototypes.
struct TaskSpec {
  EmbeddingMatrix query;
  EmbeddingMatrix text;
  std::optional<LabeledSet> support;
  double tau = 100.0;
  Hyperparams hyper;

  std::size_t n_classes() const noexcept { return text.n_rows(); }
};

/// Checks cross-field invariants (dims, label range, tau, hyper ranges).
/// Embedding invariants are already held by EmbeddingMatrix, so calling this
/// twice is a no-op. Returns the task unchanged on success.
TaskSpec validate_task(TaskSpec spec);

}  // namespace transduct
