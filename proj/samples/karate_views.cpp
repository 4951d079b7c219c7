// Detect the karate club split from a few members' depth-2 views.

#include <iostream>

#include "pinet/bench.hpp"

int main() {
  using namespace pinet;
  const auto rows = run_karate({"H", "A", "20", "32"}, {{"A", "20"}});
  emit_karate_csv(rows, std::cout);

  const auto g = data::karate_graph();
  const auto view = perceive_based(g, data::karate_node("32"));
  const auto det = detect_communities(view, 2, 7);
  std::cout << to_json(det).dump(2) << "\n";
}
