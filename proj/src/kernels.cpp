#include "transduct/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace transduct::kernels {
namespace {

template <class RowFn>
void for_rows(std::ptrdiff_t begin, std::ptrdiff_t end, Exec exec, RowFn&& fn) {
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = begin; i < end; ++i) fn(i);
  } else {
    for (std::ptrdiff_t i = begin; i < end; ++i) fn(i);
  }
}

double dot(const double* a, const double* b, std::ptrdiff_t n) {
  double s = 0.0;
  for (std::ptrdiff_t c = 0; c < n; ++c) s += a[c] * b[c];
  return s;
}

}  // namespace

void softmax_inplace(double* row, std::size_t n) {
  if (n == 0) return;
  double mx = row[0];
  for (std::size_t k = 1; k < n; ++k) mx = std::max(mx, row[k]);
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    row[k] = std::exp(row[k] - mx);
    sum += row[k];
  }
  for (std::size_t k = 0; k < n; ++k) row[k] /= sum;
}

void soft_labels(const Matrix& a, const Matrix& b, double tau, Matrix& out, Exec exec) {
  const std::ptrdiff_t n = a.rows(), kc = b.rows(), d = a.cols();
  out.resize(n, kc);
  for_rows(0, n, exec, [&](std::ptrdiff_t i) {
    double* row = out.row(i).data();
    for (std::ptrdiff_t k = 0; k < kc; ++k) row[k] = tau * dot(a.row(i).data(), b.row(k).data(), d);
    softmax_inplace(row, static_cast<std::size_t>(kc));
  });
}

void gmm_log_probs(const Matrix& f, const Matrix& mu, const Vector& sigma_diag, Matrix& out, Exec exec) {
  const std::ptrdiff_t n = f.rows(), kc = mu.rows(), d = f.cols();
  out.resize(n, kc);
  Vector inv_var(d);
  double log_det = 0.0;
  for (std::ptrdiff_t c = 0; c < d; ++c) {
    inv_var[c] = 1.0 / sigma_diag[c];
    log_det += std::log(sigma_diag[c]);
  }
  for_rows(0, n, exec, [&](std::ptrdiff_t i) {
    const double* fi = f.row(i).data();
    for (std::ptrdiff_t k = 0; k < kc; ++k) {
      const double* mk = mu.row(k).data();
      double maha = 0.0;
      for (std::ptrdiff_t c = 0; c < d; ++c) {
        const double diff = fi[c] - mk[c];
        maha += diff * diff * inv_var[c];
      }
      out(i, k) = -0.5 * (log_det + maha);
    }
  });
}

void z_sweep(const Matrix& z_prev, const Matrix& log_probs, const Matrix& log_prior, double lambda,
             const AffinityGraph& graph, std::size_t first_row, Matrix& z_next, Exec exec) {
  const std::ptrdiff_t n = z_prev.rows(), kc = z_prev.cols();
  const auto first = static_cast<std::ptrdiff_t>(first_row);
  z_next.resize(n, kc);
  z_next.topRows(first) = z_prev.topRows(first);
  for_rows(first, n, exec, [&](std::ptrdiff_t i) {
    double* out = z_next.row(i).data();
    const double* prior = log_prior.row(i - first).data();
    const double* lp = log_probs.row(i).data();
    for (std::ptrdiff_t k = 0; k < kc; ++k) out[k] = lambda * prior[k] + lp[k];
    const auto node = static_cast<std::size_t>(i);
    for (const Edge* e = graph.begin(node); e != graph.end(node); ++e) {
      const double* zj = z_prev.row(static_cast<std::ptrdiff_t>(e->target)).data();
      for (std::ptrdiff_t k = 0; k < kc; ++k) out[k] += e->weight * zj[k];
    }
    softmax_inplace(out, static_cast<std::size_t>(kc));
  });
}

AffinityGraph knn_graph(const Matrix& f, std::size_t k, Exec exec) {
  const std::ptrdiff_t n = f.rows(), d = f.cols();
  const std::size_t per_node = std::min<std::size_t>(k, n > 0 ? static_cast<std::size_t>(n - 1) : 0);
  AffinityGraph g;
  g.n_nodes = static_cast<std::size_t>(n);
  g.offsets.resize(g.n_nodes + 1);
  for (std::size_t i = 0; i <= g.n_nodes; ++i) g.offsets[i] = i * per_node;
  g.edges.resize(g.n_nodes * per_node);
  if (per_node == 0) return g;

  for_rows(0, n, exec, [&](std::ptrdiff_t i) {
    thread_local std::vector<std::pair<double, std::size_t>> cand;
    cand.clear();
    cand.reserve(static_cast<std::size_t>(n));
    const double* fi = f.row(i).data();
    for (std::ptrdiff_t j = 0; j < n; ++j) {
      if (j == i) continue;
      cand.emplace_back(dot(fi, f.row(j).data(), d), static_cast<std::size_t>(j));
    }
    auto better = [](const auto& a, const auto& b) {
      return a.first > b.first || (a.first == b.first && a.second < b.second);
    };
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(per_node), cand.end(), better);
    Edge* out = g.edges.data() + static_cast<std::size_t>(i) * per_node;
    for (std::size_t r = 0; r < per_node; ++r) out[r] = Edge{cand[r].second, std::max(0.0, cand[r].first)};
  });
  return g;
}

std::vector<std::size_t> nearest_rows(const Matrix& probe, const Matrix& pool, Exec exec) {
  const std::ptrdiff_t n = probe.rows(), m = pool.rows(), d = probe.cols();
  std::vector<std::size_t> out(static_cast<std::size_t>(n), 0);
  for_rows(0, n, exec, [&](std::ptrdiff_t i) {
    double best = -std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::ptrdiff_t j = 0; j < m; ++j) {
      const double s = dot(probe.row(i).data(), pool.row(j).data(), d);
      if (s > best) {
        best = s;
        arg = static_cast<std::size_t>(j);
      }
    }
    out[static_cast<std::size_t>(i)] = arg;
  });
  return out;
}

}  // namespace transduct::kernels
