#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <queue>
#include <vector>

#include "covdecomp/matrix.hpp"
#include "covdecomp/rng.hpp"

namespace testing {

struct TreeModel {
  covdecomp::SymmetricMatrix j;
  Eigen::VectorXd h;
  int diameter;
};

// Eccentricity-based diameter by two BFS sweeps.
inline int tree_diameter(const std::vector<std::vector<int>>& adj) {
  auto bfs = [&](int s) {
    std::vector<int> dist(adj.size(), -1);
    std::queue<int> q;
    dist[static_cast<std::size_t>(s)] = 0;
    q.push(s);
    int far = s;
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      if (dist[static_cast<std::size_t>(u)] > dist[static_cast<std::size_t>(far)]) far = u;
      for (int v : adj[static_cast<std::size_t>(u)])
        if (dist[static_cast<std::size_t>(v)] < 0) {
          dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + 1;
          q.push(v);
        }
    }
    return std::pair{far, dist[static_cast<std::size_t>(far)]};
  };
  return bfs(bfs(0).first).second;
}

// shape: 0 random recursive tree, 1 chain, 2 star. PD by construction (the
// diagonal exceeds the absolute row sum), although not every instance is
// strongly dominant.
inline TreeModel random_tree(int p, int shape, covdecomp::Rng& rng) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(p, p);
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(p));
  for (int k = 1; k < p; ++k) {
    int parent = 0;
    if (shape == 0) parent = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(k)));
    if (shape == 1) parent = k - 1;
    const double w = (rng.coin() ? 1.0 : -1.0) * (0.2 + 0.8 * rng.uniform01());
    j(k, parent) = j(parent, k) = w;
    adj[static_cast<std::size_t>(k)].push_back(parent);
    adj[static_cast<std::size_t>(parent)].push_back(k);
  }
  for (int i = 0; i < p; ++i) j(i, i) = j.row(i).cwiseAbs().sum() + 0.05 + rng.uniform01();
  Eigen::VectorXd h(p);
  for (int i = 0; i < p; ++i) h(i) = 2 * rng.uniform01() - 1;
  return {covdecomp::SymmetricMatrix(j), h, p > 1 ? tree_diameter(adj) : 0};
}

}  // namespace testing
