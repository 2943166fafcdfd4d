#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace oracles {
namespace {

using HP = boost::multiprecision::cpp_bin_float_50;

double g_value(const Vec& a, const Vec& z) {
  double s = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) {
    s += z[k] * a[k];
    if (z[k] > 0.0) s += z[k] * std::log(z[k]);
  }
  return s;
}

}  // namespace

std::vector<EmIterate> em_reference(const Mat& x, const Mat& mu0, const Vec& var0, int iters) {
  const std::size_t n = x.size(), kc = mu0.size(), d = var0.size();
  Mat mu = mu0;
  Vec var = var0;
  std::vector<EmIterate> history;
  for (int it = 0; it < iters; ++it) {
    EmIterate step;
    // E-step: equal mixing weights, so responsibilities are a softmax of the
    // component log-densities; the log-determinant is shared and cancels.
    step.responsibilities.assign(n, Vec(kc, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      Vec logd(kc, 0.0);
      for (std::size_t k = 0; k < kc; ++k) {
        double q = 0.0;
        for (std::size_t c = 0; c < d; ++c) q += (x[i][c] - mu[k][c]) * (x[i][c] - mu[k][c]) / var[c];
        logd[k] = -0.5 * q;
      }
      const double mx = *std::max_element(logd.begin(), logd.end());
      double total = 0.0;
      for (std::size_t k = 0; k < kc; ++k) total += std::exp(logd[k] - mx);
      for (std::size_t k = 0; k < kc; ++k) step.responsibilities[i][k] = std::exp(logd[k] - mx) / total;
    }
    // M-step.
    const Mat& r = step.responsibilities;
    for (std::size_t k = 0; k < kc; ++k) {
      double nk = 0.0;
      Vec acc(d, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        nk += r[i][k];
        for (std::size_t c = 0; c < d; ++c) acc[c] += r[i][k] * x[i][c];
      }
      if (nk > 0.0) {
        for (std::size_t c = 0; c < d; ++c) mu[k][c] = acc[c] / nk;
      }
    }
    for (std::size_t c = 0; c < d; ++c) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < kc; ++k) s += r[i][k] * (x[i][c] - mu[k][c]) * (x[i][c] - mu[k][c]);
      }
      var[c] = std::max(s / static_cast<double>(n), 1e-12);
    }
    step.means = mu;
    step.variances = var;
    history.push_back(std::move(step));
  }
  return history;
}

double gmm_neg_complete_loglik(const Mat& x, const Mat& z, const Mat& mu, const Vec& var) {
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t k = 0; k < mu.size(); ++k) {
      if (z[i][k] == 0.0) continue;
      double e = 0.0;
      for (std::size_t c = 0; c < var.size(); ++c) {
        e += std::log(var[c]) + (x[i][c] - mu[k][c]) * (x[i][c] - mu[k][c]) / var[c];
      }
      total += z[i][k] * 0.5 * e;
    }
  }
  return total;
}

Vec project_simplex(const Vec& v) {
  Vec u = v;
  std::sort(u.begin(), u.end(), std::greater<>());
  double css = 0.0, theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    css += u[j];
    const double t = (css - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  Vec out(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) out[k] = std::max(v[k] - theta, 0.0);
  return out;
}

Vec simplex_pg_minimize(const Vec& a, int steps, double step_size) {
  // Gradient projection in the metric diag(1/z): the projection of
  // y = z - step * diag(z) g is x_k = max(0, y_k - nu z_k) with nu found by
  // bisection so that x sums to 1. Armijo backtracking along x - z, with the
  // step kept short of the boundary so z stays strictly positive.
  const std::size_t kc = a.size();
  Vec z(kc, 1.0 / static_cast<double>(kc));
  double f = g_value(a, z);
  for (int s = 0; s < steps; ++s) {
    Vec g(kc);
    for (std::size_t k = 0; k < kc; ++k) g[k] = a[k] + std::log(z[k]) + 1.0;
    auto mass = [&](double nu) {
      double m = 0.0;
      for (std::size_t k = 0; k < kc; ++k) m += std::max(0.0, z[k] - step_size * z[k] * g[k] - nu * z[k]);
      return m;
    };
    double lo = -1.0, hi = 1.0;
    while (mass(lo) < 1.0) lo *= 2.0;
    while (mass(hi) > 1.0) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-300; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      (mass(mid) > 1.0 ? lo : hi) = mid;
    }
    const double nu = 0.5 * (lo + hi);
    Vec d(kc);
    double gd = 0.0, t_max = 1.0, dmax = 0.0;
    for (std::size_t k = 0; k < kc; ++k) {
      d[k] = std::max(0.0, z[k] - step_size * z[k] * g[k] - nu * z[k]) - z[k];
      gd += g[k] * d[k];
      dmax = std::max(dmax, std::abs(d[k]));
      if (d[k] < 0.0) t_max = std::min(t_max, 0.99 * z[k] / -d[k]);
    }
    if (dmax < 1e-14 || gd >= 0.0) break;
    double t = t_max;
    Vec next(kc);
    double f_next = f;
    bool accepted = false;
    for (int bt = 0; bt < 100; ++bt) {
      for (std::size_t k = 0; k < kc; ++k) next[k] = z[k] + t * d[k];
      f_next = g_value(a, next);
      if (f_next <= f + 1e-4 * t * gd) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
    double sum = 0.0;
    for (double v : next) sum += v;
    for (double& v : next) v /= sum;
    z = next;
    f = g_value(a, z);
  }
  return z;
}

Vec finite_diff_grad(const std::function<double(const Vec&)>& fn, const Vec& point, double h) {
  Vec g(point.size());
  Vec p = point;
  for (std::size_t i = 0; i < point.size(); ++i) {
    p[i] = point[i] + h;
    const double up = fn(p);
    p[i] = point[i] - h;
    const double down = fn(p);
    p[i] = point[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

std::vector<std::vector<std::pair<std::size_t, double>>> brute_force_knn(const Mat& x, std::size_t k) {
  const std::size_t n = x.size();
  std::vector<std::vector<std::pair<std::size_t, double>>> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      double s = 0.0;
      for (std::size_t c = 0; c < x[i].size(); ++c) s += x[i][c] * x[j][c];
      all.emplace_back(s, j);
    }
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    for (std::size_t r = 0; r < std::min(k, all.size()); ++r) {
      out[i].emplace_back(all[r].second, std::max(0.0, all[r].first));
    }
  }
  return out;
}

Mat mu_update_hp(const Mat& f_support, const Mat& z_support, const Mat& f_query, const Mat& z_query, double gamma) {
  const std::size_t kc = z_query.front().size(), d = f_query.front().size();
  const HP ws = f_support.empty() ? HP(0) : HP(gamma) / HP(f_support.size());
  const HP wq = HP(1) / HP(f_query.size());
  Mat mu(kc, Vec(d));
  for (std::size_t k = 0; k < kc; ++k) {
    HP den = 0;
    std::vector<HP> num(d, HP(0));
    for (std::size_t i = 0; i < f_support.size(); ++i) {
      den += ws * z_support[i][k];
      for (std::size_t c = 0; c < d; ++c) num[c] += ws * z_support[i][k] * f_support[i][c];
    }
    for (std::size_t i = 0; i < f_query.size(); ++i) {
      den += wq * z_query[i][k];
      for (std::size_t c = 0; c < d; ++c) num[c] += wq * z_query[i][k] * f_query[i][c];
    }
    for (std::size_t c = 0; c < d; ++c) mu[k][c] = static_cast<double>(num[c] / den);
  }
  return mu;
}

Vec sigma_update_hp(const Mat& f_support, const Mat& z_support, const Mat& f_query, const Mat& z_query,
                    const Mat& mu, double gamma) {
  const std::size_t kc = mu.size(), d = mu.front().size();
  const HP ws = f_support.empty() ? HP(0) : HP(gamma) / HP(f_support.size());
  const HP wq = HP(1) / HP(f_query.size());
  Vec out(d);
  for (std::size_t c = 0; c < d; ++c) {
    HP s = 0;
    for (std::size_t i = 0; i < f_support.size(); ++i) {
      for (std::size_t k = 0; k < kc; ++k) {
        const HP diff = HP(f_support[i][c]) - HP(mu[k][c]);
        s += ws * z_support[i][k] * diff * diff;
      }
    }
    for (std::size_t i = 0; i < f_query.size(); ++i) {
      for (std::size_t k = 0; k < kc; ++k) {
        const HP diff = HP(f_query[i][c]) - HP(mu[k][c]);
        s += wq * z_query[i][k] * diff * diff;
      }
    }
    const HP g = f_support.empty() ? HP(0) : HP(gamma);
    out[c] = std::max(static_cast<double>(s / (g + 1)), 1e-12);
  }
  return out;
}

Vec softmax_hp(const Vec& logits) {
  std::vector<HP> e(logits.size());
  HP total = 0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    e[k] = boost::multiprecision::exp(HP(logits[k]));
    total += e[k];
  }
  Vec out(logits.size());
  for (std::size_t k = 0; k < logits.size(); ++k) out[k] = static_cast<double>(e[k] / total);
  return out;
}

}  // namespace oracles
