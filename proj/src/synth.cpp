#include "transduct/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include "transduct/data_io.hpp"

namespace transduct {
namespace {

using Rng = std::mt19937_64;

Vector gaussian(Rng& rng, std::size_t d) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(static_cast<Eigen::Index>(d));
  for (Eigen::Index c = 0; c < v.size(); ++c) v[c] = normal(rng);
  return v;
}

// Unit-normalizes and rounds to float32, as the row will be stored on disk.
void store_row(Matrix& m, Eigen::Index r, const Vector& v) {
  const double norm = v.norm();
  for (Eigen::Index c = 0; c < v.size(); ++c) m(r, c) = static_cast<double>(static_cast<float>(v[c] / norm));
}

void sample_class_rows(Rng& rng, const Matrix& dirs, double sep, std::size_t per_class, Matrix& out, Labels& labels) {
  const auto kc = static_cast<std::size_t>(dirs.rows());
  out.resize(static_cast<Eigen::Index>(kc * per_class), dirs.cols());
  labels.clear();
  Eigen::Index r = 0;
  for (std::size_t k = 0; k < kc; ++k) {
    for (std::size_t n = 0; n < per_class; ++n, ++r) {
      Vector x = sep * dirs.row(static_cast<Eigen::Index>(k)).transpose() + gaussian(rng, static_cast<std::size_t>(dirs.cols()));
      store_row(out, r, x);
      labels.push_back(static_cast<std::int64_t>(k));
    }
  }
}

}  // namespace

SynthTask generate_task(const SynthConfig& cfg) {
  if (cfg.n_classes < 1 || cfg.dim < 2 || !(cfg.class_sep > 0.0) || !(cfg.prototype_noise >= 0.0) ||
      cfg.query_per_class < 1) {
    throw Error(ErrorCode::InvalidArgument, "synth needs classes >= 1, dim >= 2, query-per-class >= 1, sep > 0, noise >= 0");
  }
  Rng rng(cfg.seed);
  const auto kc = static_cast<Eigen::Index>(cfg.n_classes);
  const auto d = static_cast<Eigen::Index>(cfg.dim);

  Matrix dirs(kc, d);
  for (Eigen::Index k = 0; k < kc; ++k) {
    Vector g = gaussian(rng, cfg.dim);
    dirs.row(k) = (g / g.norm()).transpose();
  }

  SynthTask t;
  t.text_raw.resize(kc, d);
  for (Eigen::Index k = 0; k < kc; ++k) {
    Vector g = gaussian(rng, cfg.dim);
    store_row(t.text_raw, k, dirs.row(k).transpose() + cfg.prototype_noise * g);
  }

  Matrix query_sorted;
  Labels truth_sorted;
  sample_class_rows(rng, dirs, cfg.class_sep, cfg.query_per_class, query_sorted, truth_sorted);
  std::vector<std::size_t> perm(truth_sorted.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  t.query_raw.resize(query_sorted.rows(), d);
  t.truth.resize(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) {
    t.query_raw.row(static_cast<Eigen::Index>(i)) = query_sorted.row(static_cast<Eigen::Index>(perm[i]));
    t.truth[i] = truth_sorted[perm[i]];
  }

  Labels support_labels, validation_labels;
  sample_class_rows(rng, dirs, cfg.class_sep, cfg.shots_per_class, t.support_raw, support_labels);
  sample_class_rows(rng, dirs, cfg.class_sep, cfg.validation_per_class, t.validation_raw, validation_labels);

  t.task.query = EmbeddingMatrix::from_rows(t.query_raw);
  t.task.text = EmbeddingMatrix::from_rows(t.text_raw);
  t.task.tau = cfg.tau;
  if (cfg.shots_per_class > 0) {
    t.task.support = LabeledSet{EmbeddingMatrix::from_rows(t.support_raw), support_labels};
    t.task.hyper = Hyperparams::few_shot_defaults();
  }
  if (cfg.validation_per_class > 0) {
    t.validation = LabeledSet{EmbeddingMatrix::from_rows(t.validation_raw), validation_labels};
  }
  return t;
}

void write_task_dir(const SynthTask& t, const SynthConfig& cfg, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir + ": " + ec.message());
  const fs::path root(dir);
  write_embeddings(t.query_raw, (root / "query.emb").string());
  write_embeddings(t.text_raw, (root / "text.emb").string());
  write_labels(t.truth, (root / "truth.labels").string());
  if (t.task.support) {
    write_embeddings(t.support_raw, (root / "support.emb").string());
    write_labels(t.task.support->labels, (root / "support.labels").string());
  }
  if (t.validation) {
    write_embeddings(t.validation_raw, (root / "validation.emb").string());
    write_labels(t.validation->labels, (root / "validation.labels").string());
  }
  std::ofstream cfg_out(root / "task.cfg", std::ios::binary | std::ios::trunc);
  if (!cfg_out) throw Error(ErrorCode::IoFailure, "cannot write task.cfg in " + dir);
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "# synth --classes %zu --dim %zu --query-per-class %zu --shots %zu --validation-per-class %zu"
                " --sep %.17g --noise %.17g --seed %llu\n"
                "tau=%.17g\n",
                cfg.n_classes, cfg.dim, cfg.query_per_class, cfg.shots_per_class, cfg.validation_per_class,
                cfg.class_sep, cfg.prototype_noise, static_cast<unsigned long long>(cfg.seed), cfg.tau);
  cfg_out << buf;
  if (!cfg_out) throw Error(ErrorCode::IoFailure, "write failed for task.cfg in " + dir);
}

}  // namespace transduct
