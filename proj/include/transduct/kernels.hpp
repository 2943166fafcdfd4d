#pragma once

// Row-parallel numerical kernels. Every kernel has a serial reference path
// and an OpenMP path that run the same per-row code; rows are independent and
// each row reduces left to right, so both paths are bit-identical regardless
// of thread count.

#include <cstddef>
#include <vector>

#include "transduct/types.hpp"

namespace transduct {

enum class Exec { Serial, Parallel };

namespace kernels {

/// out(i, k) = softmax_k(tau * <a_i, b_k>), max-subtracted.
void soft_labels(const Matrix& a, const Matrix& b, double tau, Matrix& out, Exec exec);

/// out(i, k) = -1/2 * sum_d [log sigma_d + (f_id - mu_kd)^2 / sigma_d].
/// The -(d/2) log(2 pi) constant is omitted.
void gmm_log_probs(const Matrix& f, const Matrix& mu, const Vector& sigma_diag, Matrix& out, Exec exec);

/// One Jacobi sweep over rows [first_row, z_prev.rows()) of z:
///   z_next_i = softmax(lambda * log_prior_{i - first_row} + log_probs_i + sum_j w_ij z_prev_j)
/// Rows before first_row are copied from z_prev unchanged.
void z_sweep(const Matrix& z_prev, const Matrix& log_probs, const Matrix& log_prior, double lambda,
             const AffinityGraph& graph, std::size_t first_row, Matrix& z_next, Exec exec);

/// Exact directed kNN on cosine similarity. Neighbors are ranked by
/// similarity (ties: lower index) and stored with weight max(0, cos).
AffinityGraph knn_graph(const Matrix& f, std::size_t k, Exec exec);

/// For each row of `probe`, index of the row of `pool` with the highest
/// inner product (ties: lower index).
std::vector<std::size_t> nearest_rows(const Matrix& probe, const Matrix& pool, Exec exec);

/// In-place max-subtracted softmax of `row[0..n)`.
void softmax_inplace(double* row, std::size_t n);

}  // namespace kernels
}  // namespace transduct
