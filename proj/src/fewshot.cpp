#include "transduct/fewshot.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "transduct/kernels.hpp"

namespace transduct {
namespace {

std::vector<std::vector<std::size_t>> rows_by_class(const Labels& labels, std::size_t n_classes) {
  std::vector<std::vector<std::size_t>> out(n_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= n_classes) {
      throw Error(ErrorCode::LabelOutOfRange, "label outside class range");
    }
    out[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  return out;
}

LabeledSet subset(const LabeledSet& set, const std::vector<std::size_t>& rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), set.embeddings.data().cols());
  Labels labels;
  labels.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    m.row(static_cast<Eigen::Index>(r)) = set.embeddings.data().row(static_cast<Eigen::Index>(rows[r]));
    labels.push_back(set.labels[rows[r]]);
  }
  return LabeledSet{EmbeddingMatrix::from_rows(std::move(m)), std::move(labels)};
}

}  // namespace

ShotSplit split_shots(const LabeledSet& support, std::size_t n_classes, std::uint64_t seed,
                      const std::optional<LabeledSet>& pool) {
  if (pool && pool->embeddings.dim() != support.embeddings.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "validation pool and support differ in dimension");
  }
  const auto shots = rows_by_class(support.labels, n_classes);
  const auto pool_rows = pool ? rows_by_class(pool->labels, n_classes) : std::vector<std::vector<std::size_t>>{};
  std::mt19937_64 rng(seed);

  ShotSplit split;
  split.from_pool = pool.has_value();
  for (std::size_t k = 0; k < n_classes; ++k) {
    const std::size_t n_k = shots[k].size();
    if (n_k == 0) {
      std::ostringstream msg;
      msg << "class " << k << " has no support shot";
      throw Error(ErrorCode::InsufficientShots, msg.str());
    }
    const std::size_t n_val = std::min(kMaxValidationShots, n_k);
    std::vector<std::size_t> candidates = pool ? pool_rows[k] : shots[k];
    const std::size_t needed = pool ? n_val : n_val + 1;
    if (candidates.size() < needed) {
      std::ostringstream msg;
      msg << "class " << k << " needs " << n_val << " validation shot(s)"
          << (pool ? " from the validation pool, which has " : " plus one training shot, support has ")
          << candidates.size();
      throw Error(ErrorCode::InsufficientShots, msg.str());
    }
    std::shuffle(candidates.begin(), candidates.end(), rng);
    std::vector<std::size_t> chosen(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(n_val));
    split.validation_index.insert(split.validation_index.end(), chosen.begin(), chosen.end());
    if (!pool) {
      for (std::size_t row : shots[k]) {
        if (std::find(chosen.begin(), chosen.end(), row) == chosen.end()) split.train_index.push_back(row);
      }
    }
  }
  if (pool) {
    split.train_index.resize(support.labels.size());
    for (std::size_t i = 0; i < split.train_index.size(); ++i) split.train_index[i] = i;
  }
  std::sort(split.train_index.begin(), split.train_index.end());
  std::sort(split.validation_index.begin(), split.validation_index.end());
  split.train = subset(support, split.train_index);
  split.validation = subset(pool ? *pool : support, split.validation_index);
  return split;
}

double one_nn_accuracy(const LabeledSet& validation, const Matrix& query, const std::vector<std::size_t>& query_pred,
                       Exec exec) {
  const auto nearest = kernels::nearest_rows(validation.embeddings.data(), query, exec);
  std::size_t correct = 0;
  for (std::size_t v = 0; v < nearest.size(); ++v) {
    if (static_cast<std::int64_t>(query_pred[nearest[v]]) == validation.labels[v]) ++correct;
  }
  return nearest.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(nearest.size());
}

GammaSearch search_gamma(const TaskSpec& base, const LabeledSet& validation, std::span<const double> grid,
                         const RunOptions& options) {
  if (grid.empty()) throw Error(ErrorCode::InvalidArgument, "gamma grid is empty");
  if (validation.embeddings.dim() != base.query.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "validation and query embeddings differ in dimension");
  }
  GammaSearch out;
  RunOptions quiet = options;
  quiet.record_trace = false;
  for (double gamma : grid) {
    TaskSpec task = base;
    task.hyper.gamma = gamma;
    const RunResult r = run(task, quiet);
    out.scores.push_back(GammaScore{gamma, one_nn_accuracy(validation, base.query.data(), r.predictions, options.exec)});
  }
  const GammaScore* best = &out.scores.front();
  for (const GammaScore& s : out.scores) {
    if (s.validation_accuracy > best->validation_accuracy ||
        (s.validation_accuracy == best->validation_accuracy && s.gamma < best->gamma)) {
      best = &s;
    }
  }
  out.best_gamma = best->gamma;
  return out;
}

FewShotResult run_fewshot(const TaskSpec& spec, const FewShotOptions& fs, const RunOptions& options) {
  if (!spec.support) throw Error(ErrorCode::InvalidArgument, "few-shot run needs a support set");
  TaskSpec task = validate_task(spec);
  task.hyper.lambda = fs.lambda;

  FewShotResult out;
  if (fs.fixed_gamma) {
    out.gamma = *fs.fixed_gamma;
  } else {
    if (fs.grid.empty()) throw Error(ErrorCode::InvalidArgument, "gamma grid is empty");
    const ShotSplit split = split_shots(*task.support, task.n_classes(), fs.seed, fs.validation_pool);
    TaskSpec search_task = task;
    search_task.support = split.train;
    const GammaSearch search = search_gamma(search_task, split.validation, fs.grid, options);
    out.gamma = search.best_gamma;
    out.scores = search.scores;
  }
  task.hyper.gamma = out.gamma;
  out.run = run(task, options);
  return out;
}

void write_scores_csv(const std::vector<GammaScore>& scores, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path + " for writing");
  out << "gamma,validation_accuracy\n";
  char buf[96];
  for (const GammaScore& s : scores) {
    std::snprintf(buf, sizeof buf, "%.9g,%.9g\n", s.gamma, s.validation_accuracy);
    out << buf;
  }
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path);
}

}  // namespace transduct
