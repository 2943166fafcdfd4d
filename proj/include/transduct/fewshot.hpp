#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "transduct/solver.hpp"
#include "transduct/types.hpp"

namespace transduct {

/// Gamma values searched by default in the few-shot protocol.
inline constexpr double kDefaultGammaGrid[] = {0.002, 0.01, 0.02, 0.2};
inline constexpr std::size_t kMaxValidationShots = 4;
inline constexpr double kFewShotLambda = 0.5;

struct ShotSplit {
  LabeledSet train;
  LabeledSet validation;
  std::vector<std::size_t> train_index;       // rows of the support set
  std::vector<std::size_t> validation_index;  // rows of the pool, or of the support when carved
  bool from_pool = false;
};

/// Draws min(4, n_k) validation shots per class, n_k being the class's shot
/// count in `support`. With a pool they are sampled from it and the whole
/// support is kept for training; without one they are carved out of the
/// support, which must leave at least one training shot per class.
/// Throws InsufficientShots when a class cannot supply its share.
ShotSplit split_shots(const LabeledSet& support, std::size_t n_classes, std::uint64_t seed,
                      const std::optional<LabeledSet>& pool = std::nullopt);

struct GammaScore {
  double gamma;
  double validation_accuracy;
};

struct GammaSearch {
  double best_gamma = 0.0;
  std::vector<GammaScore> scores;  // grid order
};

/// Fraction of `validation` samples whose label equals the transduced class
/// of their cosine-nearest query sample.
double one_nn_accuracy(const LabeledSet& validation, const Matrix& query, const std::vector<std::size_t>& query_pred,
                       Exec exec = Exec::Parallel);

/// Solves `base` once per gamma and scores each run with the 1-NN validation
/// rule. Highest accuracy wins; ties go to the smaller gamma.
GammaSearch search_gamma(const TaskSpec& base, const LabeledSet& validation, std::span<const double> grid,
                         const RunOptions& options = {});

struct FewShotOptions {
  std::vector<double> grid{std::begin(kDefaultGammaGrid), std::end(kDefaultGammaGrid)};
  std::optional<double> fixed_gamma;  // skips the search
  double lambda = kFewShotLambda;
  std::optional<LabeledSet> validation_pool;
  std::uint64_t seed = 0;
};

struct FewShotResult {
  RunResult run;
  double gamma = 0.0;
  std::vector<GammaScore> scores;  // empty when the gamma was fixed
};

/// Gamma search on a train/validation split, then a final solve with the
/// chosen gamma on the full support set.
FewShotResult run_fewshot(const TaskSpec& spec, const FewShotOptions& fs = {}, const RunOptions& options = {});

/// CSV "gamma,validation_accuracy".
void write_scores_csv(const std::vector<GammaScore>& scores, const std::string& path);

}  // namespace transduct
