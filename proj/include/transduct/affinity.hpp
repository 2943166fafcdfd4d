#pragma once

#include <cstddef>
#include <iosfwd>

#include "transduct/kernels.hpp"
#include "transduct/types.hpp"

namespace transduct {

/// Directed kNN graph over the rows of `all` (support rows first, then query
/// rows). Each node keeps its min(k, N - 1) most cosine-similar other nodes,
/// weighted max(0, cos). No self-edges, no symmetrization.
AffinityGraph build_knn(const EmbeddingMatrix& all, std::size_t k, Exec exec = Exec::Parallel);

/// (W + W^T) / 2 of a directed graph. Lists stay sorted by descending weight
/// (ties by target index) but may exceed the original k.
AffinityGraph symmetrize(const AffinityGraph& g);

/// Debug dump, one "i j w" line per edge.
void write_graph(const AffinityGraph& g, std::ostream& out);

}  // namespace transduct
