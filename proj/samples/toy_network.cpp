// Six-person toy network: what individual 1 sees at depths 1 and 2.

#include <iostream>

#include "pinet/perception.hpp"

int main() {
  using namespace pinet;
  // 1-2, 1-3, 1-4, 2-3, 4-5, 4-6, 5-6 (0-based below)
  const auto A = AdjacencyMatrix::from_edges(6, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {3, 4}, {3, 5}, {4, 5}});

  for (int depth : {2, 1}) {
    const auto view = perceive_based(A, 0, depth);
    const auto st = view_stats(A, view);
    const auto within = perceive_within(view);
    std::cout << "depth " << depth << "\n" << view.B.entries().cast<int>() << "\n";
    std::cout << "observed edges " << st.observed_edge_ratio.num << "/" << st.observed_edge_ratio.den
              << ", nodes within depth " << within.graph.n() << "\n\n";
  }
}
