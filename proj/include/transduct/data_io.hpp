#pragma once

// File formats.
//
// EMB1: "EMB1" | u32 LE n_rows | u32 LE dim | n_rows*dim float32 LE, row-major.
// CSV embeddings: one row per line, comma-separated decimals, uniform width.
// Labels: newline-separated non-negative integers, trailing newline optional.
// Predictions: "index,pred,conf,p_0,...,p_{K-1}" with %.9g values.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "transduct/types.hpp"

namespace transduct {

/// Upper bound on the payload a header may declare.
inline constexpr std::uint64_t kMaxPayloadBytes = std::uint64_t{1} << 30;

/// Float32 matrix exactly as stored on disk.
struct RawMatrix {
  std::uint32_t n_rows = 0;
  std::uint32_t dim = 0;
  std::vector<float> values;  // row-major
};

RawMatrix read_emb1(const std::string& path);
void write_emb1(const RawMatrix& m, const std::string& path);

/// Reads EMB1 (detected by magic) or CSV (".csv" extension), then validates
/// and renormalizes rows. Any other file without the magic is BadMagic.
EmbeddingMatrix read_embeddings(const std::string& path);

/// Writes EMB1, rounding to float32.
void write_embeddings(const EmbeddingMatrix& m, const std::string& path);
void write_embeddings(const Matrix& m, const std::string& path);

Labels read_labels(const std::string& path);
void write_labels(const Labels& labels, const std::string& path);

void write_predictions(const SimplexAssignments& a, const std::string& path);

/// Returns the `pred` column of a predictions CSV.
std::vector<std::size_t> read_prediction_classes(const std::string& path);

}  // namespace transduct
