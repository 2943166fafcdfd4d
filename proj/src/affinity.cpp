#include "transduct/affinity.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <ostream>

namespace transduct {

AffinityGraph build_knn(const EmbeddingMatrix& all, std::size_t k, Exec exec) {
  return kernels::knn_graph(all.data(), k, exec);
}

AffinityGraph symmetrize(const AffinityGraph& g) {
  std::vector<std::map<std::size_t, double>> rows(g.n_nodes);
  for (std::size_t i = 0; i < g.n_nodes; ++i) {
    for (const Edge* e = g.begin(i); e != g.end(i); ++e) {
      rows[i][e->target] += 0.5 * e->weight;
      rows[e->target][i] += 0.5 * e->weight;
    }
  }
  AffinityGraph out = AffinityGraph::empty(g.n_nodes);
  for (std::size_t i = 0; i < g.n_nodes; ++i) {
    std::vector<Edge> list;
    list.reserve(rows[i].size());
    for (const auto& [j, w] : rows[i]) list.push_back(Edge{j, w});
    std::stable_sort(list.begin(), list.end(), [](const Edge& a, const Edge& b) { return a.weight > b.weight; });
    out.edges.insert(out.edges.end(), list.begin(), list.end());
    out.offsets[i + 1] = out.edges.size();
  }
  return out;
}

void write_graph(const AffinityGraph& g, std::ostream& out) {
  char buf[64];
  for (std::size_t i = 0; i < g.n_nodes; ++i) {
    for (const Edge* e = g.begin(i); e != g.end(i); ++e) {
      std::snprintf(buf, sizeof buf, "%.9g", e->weight);
      out << i << ' ' << e->target << ' ' << buf << '\n';
    }
  }
}

}  // namespace transduct
