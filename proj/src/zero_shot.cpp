#include "transduct/zero_shot.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace transduct {

SimplexAssignments compute_soft_labels(const EmbeddingMatrix& f, const EmbeddingMatrix& t, double tau, Exec exec) {
  if (f.dim() != t.dim()) {
    std::ostringstream msg;
    msg << "embedding dim " << f.dim() << " != prototype dim " << t.dim();
    throw Error(ErrorCode::DimensionMismatch, msg.str());
  }
  if (!(tau >= 0.0)) throw Error(ErrorCode::InvalidArgument, "temperature must be non-negative");
  SimplexAssignments y;
  kernels::soft_labels(f.data(), t.data(), tau, y.z, exec);
  return y;
}

std::vector<std::size_t> hard_predict(const Matrix& y) {
  std::vector<std::size_t> out(static_cast<std::size_t>(y.rows()), 0);
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < y.cols(); ++k) {
      if (y(i, k) > y(i, best)) best = k;
    }
    out[static_cast<std::size_t>(i)] = static_cast<std::size_t>(best);
  }
  return out;
}

Matrix init_prototypes_topk(const EmbeddingMatrix& f, const SimplexAssignments& y, std::size_t m) {
  if (m < 1) throw Error(ErrorCode::InvalidArgument, "top-m initialization needs m >= 1");
  if (y.n_rows() != f.n_rows()) throw Error(ErrorCode::DimensionMismatch, "soft labels and embeddings differ in rows");
  const std::size_t n = f.n_rows(), kc = y.n_classes();
  const std::size_t take = std::min(m, n);
  Matrix mu = Matrix::Zero(static_cast<Eigen::Index>(kc), f.data().cols());
  std::vector<std::size_t> order(n);
  for (std::size_t k = 0; k < kc; ++k) {
    std::iota(order.begin(), order.end(), 0);
    const auto col = static_cast<Eigen::Index>(k);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        const double ya = y.z(static_cast<Eigen::Index>(a), col);
                        const double yb = y.z(static_cast<Eigen::Index>(b), col);
                        return ya > yb || (ya == yb && a < b);
                      });
    for (std::size_t r = 0; r < take; ++r) mu.row(col) += f.data().row(static_cast<Eigen::Index>(order[r]));
    mu.row(col) /= static_cast<double>(take);
  }
  return mu;
}

Matrix init_prototypes_support(const EmbeddingMatrix& support, const Labels& labels, std::size_t n_classes) {
  if (labels.size() != support.n_rows()) {
    throw Error(ErrorCode::DimensionMismatch, "support labels and embeddings differ in length");
  }
  Matrix mu = Matrix::Zero(static_cast<Eigen::Index>(n_classes), support.data().cols());
  std::vector<std::size_t> count(n_classes, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto k = static_cast<std::size_t>(labels[i]);
    if (labels[i] < 0 || k >= n_classes) throw Error(ErrorCode::LabelOutOfRange, "support label outside class range");
    mu.row(static_cast<Eigen::Index>(k)) += support.data().row(static_cast<Eigen::Index>(i));
    ++count[k];
  }
  for (std::size_t k = 0; k < n_classes; ++k) {
    if (count[k] == 0) {
      std::ostringstream msg;
      msg << "class " << k << " has no support sample";
      throw Error(ErrorCode::EmptyClass, msg.str());
    }
    mu.row(static_cast<Eigen::Index>(k)) /= static_cast<double>(count[k]);
  }
  return mu;
}

}  // namespace transduct
