#pragma once

// Zachary's karate club: 34 members, 78 friendship ties, and the faction each
// member joined after the split. Member "H" (the instructor) is node 1 and
// "A" (the officer) is node 34.

#include <array>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pinet/errors.hpp"
#include "pinet/netcore.hpp"

namespace pinet::data {

inline constexpr Index karate_nodes = 34;

inline constexpr std::array<std::pair<int, int>, 78> karate_edges{{
    {1, 2},   {1, 3},   {1, 4},   {1, 5},   {1, 6},   {1, 7},   {1, 8},   {1, 9},   {1, 11},  {1, 12},
    {1, 13},  {1, 14},  {1, 18},  {1, 20},  {1, 22},  {1, 32},  {2, 3},   {2, 4},   {2, 8},   {2, 14},
    {2, 18},  {2, 20},  {2, 22},  {2, 31},  {3, 4},   {3, 8},   {3, 9},   {3, 10},  {3, 14},  {3, 28},
    {3, 29},  {3, 33},  {4, 8},   {4, 13},  {4, 14},  {5, 7},   {5, 11},  {6, 7},   {6, 11},  {6, 17},
    {7, 17},  {9, 31},  {9, 33},  {9, 34},  {10, 34}, {14, 34}, {15, 33}, {15, 34}, {16, 33}, {16, 34},
    {19, 33}, {19, 34}, {20, 34}, {21, 33}, {21, 34}, {23, 33}, {23, 34}, {24, 26}, {24, 28}, {24, 30},
    {24, 33}, {24, 34}, {25, 26}, {25, 28}, {25, 32}, {26, 32}, {27, 30}, {27, 34}, {28, 34}, {29, 32},
    {29, 34}, {30, 33}, {30, 34}, {31, 33}, {31, 34}, {32, 33}, {32, 34}, {33, 34},
}};

// 0 = the instructor's faction, 1 = the officer's.
inline constexpr std::array<int, 34> karate_faction{
    0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 0, 0, 0, 0, 1, 1, 0,
    0, 1, 0, 1, 0, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1,
};

inline AdjacencyMatrix karate_graph() {
  std::vector<std::pair<Index, Index>> edges;
  edges.reserve(karate_edges.size());
  for (auto [u, v] : karate_edges) edges.emplace_back(u - 1, v - 1);
  AdjacencyMatrix g = AdjacencyMatrix::from_edges(karate_nodes, edges);
  std::vector<std::string> labels;
  for (Index i = 1; i <= karate_nodes; ++i) labels.push_back(std::to_string(i));
  g.set_labels(std::move(labels));
  return g;
}

inline std::vector<Index> karate_truth() { return {karate_faction.begin(), karate_faction.end()}; }

/// 0-based node for a member id: "1".."34", or "H" / "A".
inline Index karate_node(std::string_view id) {
  if (id == "H" || id == "h") return 0;
  if (id == "A" || id == "a") return karate_nodes - 1;
  int v = 0;
  for (char c : id) {
    if (c < '0' || c > '9' || v > 100) throw UnknownAnchor("unknown karate member '" + std::string(id) + "'");
    v = v * 10 + (c - '0');
  }
  if (id.empty() || v < 1 || v > karate_nodes) throw UnknownAnchor("unknown karate member '" + std::string(id) + "'");
  return v - 1;
}

}  // namespace pinet::data
