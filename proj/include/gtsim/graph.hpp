#pragma once

// Undirected communication topologies. Graphs are immutable after
// construction and always connected; edges are stored as normalized
// (i < j) pairs in sorted order.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gtsim/errors.hpp"

namespace gtsim {

enum class GraphKind { ring, star, grid2d, complete, custom };

inline const char* to_string(GraphKind k) {
  switch (k) {
    case GraphKind::ring: return "ring";
    case GraphKind::star: return "star";
    case GraphKind::grid2d: return "grid2d";
    case GraphKind::complete: return "complete";
    case GraphKind::custom: return "custom";
  }
  return "?";
}

inline GraphKind graph_kind_from_string(const std::string& s) {
  if (s == "ring") return GraphKind::ring;
  if (s == "star") return GraphKind::star;
  if (s == "grid2d") return GraphKind::grid2d;
  if (s == "complete") return GraphKind::complete;
  if (s == "custom") return GraphKind::custom;
  throw ConfigError("unknown topology kind '" + s + "'");
}

using Edge = std::pair<std::size_t, std::size_t>;

class Graph {
 public:
  // Validates vertex range, self-loops, duplicates, and connectivity.
  Graph(std::size_t n, std::vector<Edge> edges, GraphKind kind = GraphKind::custom)
      : n_(n), kind_(kind) {
    if (n < 2) throw ConfigError("graph needs at least 2 vertices, got " + std::to_string(n));
    std::set<Edge> unique;
    for (auto [i, j] : edges) {
      if (i >= n || j >= n)
        throw TopologyError("edge (" + std::to_string(i) + ", " + std::to_string(j) +
                            ") out of range for n = " + std::to_string(n));
      if (i == j) throw TopologyError("self-loop at vertex " + std::to_string(i));
      if (i > j) std::swap(i, j);
      if (!unique.insert({i, j}).second)
        throw TopologyError("duplicate edge (" + std::to_string(i) + ", " + std::to_string(j) + ")");
    }
    edges_.assign(unique.begin(), unique.end());
    degrees_.assign(n_, 0);
    adjacency_.assign(n_, {});
    for (auto [i, j] : edges_) {
      ++degrees_[i];
      ++degrees_[j];
      adjacency_[i].push_back(j);
      adjacency_[j].push_back(i);
    }
    if (!connected()) throw TopologyError("graph is disconnected");
  }

  std::size_t n() const { return n_; }
  GraphKind kind() const { return kind_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t degree(std::size_t v) const { return degrees_[v]; }
  const std::vector<std::size_t>& neighbors(std::size_t v) const { return adjacency_[v]; }

 private:
  bool connected() const {
    std::vector<char> seen(n_, 0);
    std::queue<std::size_t> q;
    q.push(0);
    seen[0] = 1;
    std::size_t count = 1;
    while (!q.empty()) {
      const std::size_t v = q.front();
      q.pop();
      for (std::size_t u : adjacency_[v])
        if (!seen[u]) {
          seen[u] = 1;
          ++count;
          q.push(u);
        }
    }
    return count == n_;
  }

  std::size_t n_;
  GraphKind kind_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> degrees_;
  std::vector<std::vector<std::size_t>> adjacency_;
};

inline Graph build_graph(GraphKind kind, std::size_t n) {
  if (n < 2) throw ConfigError("topology needs n >= 2, got " + std::to_string(n));
  std::vector<Edge> edges;
  switch (kind) {
    case GraphKind::ring:
      if (n == 2) {
        edges.push_back({0, 1});
      } else {
        for (std::size_t i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n});
      }
      break;
    case GraphKind::star:
      for (std::size_t i = 1; i < n; ++i) edges.push_back({0, i});
      break;
    case GraphKind::grid2d: {
      const auto side = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(n))));
      if (side * side != n)
        throw ConfigError("grid2d needs a perfect-square n, got " + std::to_string(n));
      for (std::size_t r = 0; r < side; ++r)
        for (std::size_t c = 0; c < side; ++c) {
          const std::size_t v = r * side + c;
          if (c + 1 < side) edges.push_back({v, v + 1});
          if (r + 1 < side) edges.push_back({v, v + side});
        }
      break;
    }
    case GraphKind::complete:
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) edges.push_back({i, j});
      break;
    case GraphKind::custom:
      throw ConfigError("custom graphs come from an edge-list file, not build_graph");
  }
  return Graph(n, std::move(edges), kind);
}

// Edge-list text format: first line holds n, then one "i j" pair per line,
// 0-indexed, whitespace-separated.
inline Graph parse_edge_list(std::istream& in) {
  std::size_t n = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    if (ss >> n) break;
    if (!line.empty() && line.find_first_not_of(" \t\r") != std::string::npos)
      throw IoError("edge list line " + std::to_string(lineno) + ": expected vertex count");
  }
  if (n == 0) throw IoError("edge list: missing vertex count");
  std::vector<Edge> edges;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ss(line);
    long long i = -1, j = -1;
    if (!(ss >> i >> j) || i < 0 || j < 0)
      throw IoError("edge list line " + std::to_string(lineno) + ": expected 'i j' pair");
    edges.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j)});
  }
  return Graph(n, std::move(edges), GraphKind::custom);
}

inline Graph load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open edge list '" + path + "'");
  return parse_edge_list(in);
}

}  // namespace gtsim
