#include "transduct/types.hpp"

#include <cmath>
#include <sstream>

namespace transduct {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::NormTooFarFromUnit: return "NormTooFarFromUnit";
    case ErrorCode::EmptyClass: return "EmptyClass";
    case ErrorCode::InsufficientShots: return "InsufficientShots";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::RaggedCsv: return "RaggedCsv";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NegativeLabel: return "NegativeLabel";
    case ErrorCode::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

EmbeddingMatrix EmbeddingMatrix::from_rows(Matrix data) {
  if (data.rows() < 1 || data.cols() < 1) {
    throw Error(ErrorCode::InvalidArgument, "embedding matrix must have at least one row and one column");
  }
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    double sq = 0.0;
    for (Eigen::Index c = 0; c < data.cols(); ++c) {
      const double v = data(i, c);
      if (!std::isfinite(v)) {
        std::ostringstream msg;
        msg << "row " << i << " column " << c << " is not finite";
        throw Error(ErrorCode::NonFiniteValue, msg.str());
      }
      sq += v * v;
    }
    const double norm = std::sqrt(sq);
    if (std::abs(norm - 1.0) > kUnitNormTolerance) {
      std::ostringstream msg;
      msg << "row " << i << " has L2 norm " << norm << " (expected 1 +/- " << kUnitNormTolerance << ")";
      throw Error(ErrorCode::NormTooFarFromUnit, msg.str());
    }
    // Rows already at unit norm to rounding are left bit-identical, which
    // keeps from_rows idempotent.
    if (std::abs(norm - 1.0) > 1e-12) data.row(i) /= norm;
  }
  return EmbeddingMatrix(std::move(data));
}

bool is_simplex(const Matrix& z, double tol) {
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    double sum = 0.0;
    for (Eigen::Index k = 0; k < z.cols(); ++k) {
      const double v = z(i, k);
      if (!(v >= 0.0 && v <= 1.0)) return false;
      sum += v;
    }
    if (std::abs(sum - 1.0) > tol) return false;
  }
  return true;
}

AffinityGraph AffinityGraph::empty(std::size_t n) {
  AffinityGraph g;
  g.n_nodes = n;
  g.offsets.assign(n + 1, 0);
  return g;
}

Hyperparams Hyperparams::zero_shot_defaults() { return Hyperparams{}; }

Hyperparams Hyperparams::few_shot_defaults() {
  Hyperparams h;
  h.lambda = 0.5;
  return h;
}

TaskSpec validate_task(TaskSpec spec) {
  const std::size_t d = spec.query.dim();
  if (spec.query.n_rows() == 0 || spec.text.n_rows() == 0) {
    throw Error(ErrorCode::InvalidArgument, "query and text prototypes must be non-empty");
  }
  if (spec.text.dim() != d) {
    std::ostringstream msg;
    msg << "query dim " << d << " != text dim " << spec.text.dim();
    throw Error(ErrorCode::DimensionMismatch, msg.str());
  }
  if (!(spec.tau > 0.0) || !std::isfinite(spec.tau)) {
    throw Error(ErrorCode::InvalidArgument, "temperature must be finite and positive");
  }
  const Hyperparams& h = spec.hyper;
  if (!(h.lambda >= 0.0) || !(h.gamma >= 0.0) || !std::isfinite(h.lambda) || !std::isfinite(h.gamma)) {
    throw Error(ErrorCode::InvalidArgument, "lambda and gamma must be finite and non-negative");
  }
  if (h.outer_iters < 0 || h.inner_z_iters < 0 || h.k_nn < 0 || h.top_m_init < 1) {
    throw Error(ErrorCode::InvalidArgument, "iteration counts and k_nn must be >= 0, top_m_init >= 1");
  }
  if (spec.support) {
    const LabeledSet& s = *spec.support;
    if (s.embeddings.dim() != d) {
      std::ostringstream msg;
      msg << "support dim " << s.embeddings.dim() << " != query dim " << d;
      throw Error(ErrorCode::DimensionMismatch, msg.str());
    }
    if (s.labels.size() != s.embeddings.n_rows()) {
      std::ostringstream msg;
      msg << s.labels.size() << " support labels for " << s.embeddings.n_rows() << " support rows";
      throw Error(ErrorCode::DimensionMismatch, msg.str());
    }
    const auto k = static_cast<std::int64_t>(spec.n_classes());
    for (std::size_t i = 0; i < s.labels.size(); ++i) {
      if (s.labels[i] < 0 || s.labels[i] >= k) {
        std::ostringstream msg;
        msg << "support label " << s.labels[i] << " at row " << i << " outside [0, " << k << ")";
        throw Error(ErrorCode::LabelOutOfRange, msg.str());
      }
    }
  }
  return spec;
}

}  // namespace transduct
