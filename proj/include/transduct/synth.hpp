#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include "transduct/types.hpp"

namespace transduct {

struct SynthConfig {
  std::size_t n_classes = 10;
  std::size_t dim = 32;
  std::size_t query_per_class = 200;
  std::size_t shots_per_class = 4;
  std::size_t validation_per_class = 4;
  double class_sep = 3.0;
  double prototype_noise = 0.6;
  double tau = 30.0;
  std::uint64_t seed = 7;
};

/// A generated task. The *_raw matrices hold the float32-rounded rows that go
/// to disk, so reading the written files reproduces `task` exactly.
struct SynthTask {
  TaskSpec task;
  Labels truth;
  std::optional<LabeledSet> validation;
  Matrix query_raw, text_raw, support_raw, validation_raw;
};

/// Class directions uniform on the sphere; queries, shots and validation
/// samples are normalize(sep * direction + N(0, I)); text prototypes are
/// normalize(direction + noise * N(0, I)). Queries are shuffled. Fully
/// determined by the seed, and the random stream does not depend on
/// prototype_noise, class_sep or tau.
SynthTask generate_task(const SynthConfig& cfg);

/// Writes query.emb, text.emb, truth.labels, task.cfg and, when present,
/// support.emb/support.labels and validation.emb/validation.labels.
void write_task_dir(const SynthTask& t, const SynthConfig& cfg, const std::string& dir);

}  // namespace transduct
