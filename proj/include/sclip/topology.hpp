#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

namespace sclip {

enum class NetworkKind { Complete, CycleWithDegree, Custom };

// Undirected communication graph. Self-loops are implicit.
struct Network {
  int n = 0;
  NetworkKind kind = NetworkKind::Custom;
  std::vector<std::uint8_t> adj;  // row-major n*n, symmetric, zero diagonal

  bool adjacent(int i, int j) const { return adj[static_cast<std::size_t>(i) * n + j] != 0; }
  int degree(int i) const;
};

// Doubly stochastic weights and the operator norm of W - (1/n)11^T.
struct MixingMatrix {
  Eigen::MatrixXd W;
  double lambda = 0.0;
};

Network buildComplete(int n);

// Circulant graph: node i adjacent to i+-1, ..., i+-degree/2 (mod n).
// degree must be even and < n.
Network buildCycleWithDegree(int n, int degree);

// Odd-degree circulant variant for even n: i+-1, i+-2 plus the antipode
// i + n/2, giving degree 5.
Network buildCycleAntipodal(int n);

Network buildCustom(int n, const std::vector<std::pair<int, int>>& edges);

// Reads "i j" pairs, one per line, 0-indexed; '#' lines are comments.
Network loadEdgeList(const std::string& path);

bool isConnected(const Network& net);

// Metropolis weights w_ij = 1/(1 + max(deg_i, deg_j)) on edges, with the
// residual on the diagonal. Throws Disconnected for disconnected graphs.
MixingMatrix metropolisWeights(const Network& net);

// W = (1/n)11^T, lambda = 0 exactly.
MixingMatrix completeUniform(int n);

// Largest singular value of W - (1/n)11^T via power iteration on the Gram
// matrix, to 1e-10 relative tolerance. Throws NonStochastic when row or
// column sums deviate from 1 by more than 1e-9.
double spectralGap(const Eigen::MatrixXd& W);

}  // namespace sclip
