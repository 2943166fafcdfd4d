#pragma once

#include <cstddef>
#include <vector>

#include "transduct/kernels.hpp"
#include "transduct/types.hpp"

namespace transduct {

/// Text-driven soft pseudo-labels: row i is softmax_k(tau * f_i . t_k).
/// Throws DimensionMismatch when F and T differ in width.
SimplexAssignments compute_soft_labels(const EmbeddingMatrix& f, const EmbeddingMatrix& t, double tau,
                                       Exec exec = Exec::Parallel);

/// Per-row argmax; ties go to the lowest class index.
std::vector<std::size_t> hard_predict(const Matrix& y);
inline std::vector<std::size_t> hard_predict(const SimplexAssignments& y) { return hard_predict(y.z); }

/// Class means over the min(m, N) samples most confident for each class
/// (ranking by y(i, k) descending, ties by lower sample index). A sample may
/// feed several classes. Means are not renormalized.
Matrix init_prototypes_topk(const EmbeddingMatrix& f, const SimplexAssignments& y, std::size_t m);

/// Per-class mean of the support rows. Throws EmptyClass when a class in
/// [0, n_classes) has no shot.
Matrix init_prototypes_support(const EmbeddingMatrix& support, const Labels& labels, std::size_t n_classes);

}  // namespace transduct
