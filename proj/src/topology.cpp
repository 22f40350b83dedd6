#include "sclip/topology.hpp"

#include <cmath>
#include <fstream>
#include <queue>
#include <sstream>
#include <string>

#include "sclip/errors.hpp"
#include "sclip/rng.hpp"

namespace sclip {

namespace {

Network emptyNetwork(int n, NetworkKind kind) {
  if (n < 1) throw ValidationError("network size must be positive");
  Network net;
  net.n = n;
  net.kind = kind;
  net.adj.assign(static_cast<std::size_t>(n) * n, 0);
  return net;
}

void addEdge(Network& net, int i, int j) {
  if (i < 0 || j < 0 || i >= net.n || j >= net.n)
    throw ValidationError("edge endpoint out of range");
  if (i == j) return;
  net.adj[static_cast<std::size_t>(i) * net.n + j] = 1;
  net.adj[static_cast<std::size_t>(j) * net.n + i] = 1;
}

}  // namespace

int Network::degree(int i) const {
  int d = 0;
  for (int j = 0; j < n; ++j) d += adjacent(i, j) ? 1 : 0;
  return d;
}

Network buildComplete(int n) {
  Network net = emptyNetwork(n, NetworkKind::Complete);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) addEdge(net, i, j);
  return net;
}

Network buildCycleWithDegree(int n, int degree) {
  if (degree < 2 || degree % 2 != 0)
    throw ValidationError("circulant degree must be even and >= 2");
  if (degree >= n) throw DegreeTooLarge("degree must be smaller than the node count");
  Network net = emptyNetwork(n, NetworkKind::CycleWithDegree);
  const int half = degree / 2;
  for (int i = 0; i < n; ++i)
    for (int s = 1; s <= half; ++s) addEdge(net, i, (i + s) % n);
  return net;
}

Network buildCycleAntipodal(int n) {
  if (n % 2 != 0) throw ValidationError("antipodal circulant requires an even node count");
  if (n < 6) throw DegreeTooLarge("antipodal circulant requires n >= 6");
  Network net = buildCycleWithDegree(n, 4);
  net.kind = NetworkKind::CycleWithDegree;
  for (int i = 0; i < n; ++i) addEdge(net, i, (i + n / 2) % n);
  return net;
}

Network buildCustom(int n, const std::vector<std::pair<int, int>>& edges) {
  Network net = emptyNetwork(n, NetworkKind::Custom);
  for (const auto& [i, j] : edges) addEdge(net, i, j);
  return net;
}

Network loadEdgeList(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open edge list file: " + path);
  std::vector<std::pair<int, int>> edges;
  int maxNode = -1;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    int i, j;
    if (!(ls >> i >> j)) throw ParseError("bad edge list line: " + line);
    edges.emplace_back(i, j);
    maxNode = std::max(maxNode, std::max(i, j));
  }
  if (maxNode < 0) throw ParseError("edge list file has no edges: " + path);
  return buildCustom(maxNode + 1, edges);
}

bool isConnected(const Network& net) {
  if (net.n == 1) return true;
  std::vector<char> seen(net.n, 0);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = 1;
  int count = 1;
  while (!frontier.empty()) {
    const int i = frontier.front();
    frontier.pop();
    for (int j = 0; j < net.n; ++j) {
      if (net.adjacent(i, j) && !seen[j]) {
        seen[j] = 1;
        ++count;
        frontier.push(j);
      }
    }
  }
  return count == net.n;
}

MixingMatrix metropolisWeights(const Network& net) {
  if (!isConnected(net)) throw Disconnected("metropolis weights require a connected graph");
  const int n = net.n;
  MixingMatrix mix;
  mix.W = Eigen::MatrixXd::Zero(n, n);
  std::vector<int> deg(n);
  for (int i = 0; i < n; ++i) deg[i] = net.degree(i);
  for (int i = 0; i < n; ++i) {
    double offDiag = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i == j || !net.adjacent(i, j)) continue;
      const double w = 1.0 / (1.0 + std::max(deg[i], deg[j]));
      mix.W(i, j) = w;
      offDiag += w;
    }
    mix.W(i, i) = 1.0 - offDiag;
  }
  mix.lambda = spectralGap(mix.W);
  return mix;
}

MixingMatrix completeUniform(int n) {
  if (n < 1) throw ValidationError("network size must be positive");
  MixingMatrix mix;
  mix.W = Eigen::MatrixXd::Constant(n, n, 1.0 / n);
  mix.lambda = 0.0;
  return mix;
}

double spectralGap(const Eigen::MatrixXd& W) {
  const int n = static_cast<int>(W.rows());
  if (W.cols() != n) throw NonStochastic("mixing matrix must be square");
  for (int i = 0; i < n; ++i) {
    if (std::abs(W.row(i).sum() - 1.0) > 1e-9)
      throw NonStochastic("row sums must equal 1");
    if (std::abs(W.col(i).sum() - 1.0) > 1e-9)
      throw NonStochastic("column sums must equal 1");
  }
  if (n == 1) return 0.0;
  const Eigen::MatrixXd B = W - Eigen::MatrixXd::Constant(n, n, 1.0 / n);
  const Eigen::MatrixXd G = B.transpose() * B;
  // Power iteration on the Gram matrix with a deterministic start vector;
  // the Rayleigh quotient doubles the convergence order of the estimate.
  RngStream stream(deriveKey({0x5EC7BA1ULL, static_cast<std::uint64_t>(n)}));
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = stream.nextUniform(-1.0, 1.0);
  if (v.norm() == 0.0) v.setOnes();
  v.normalize();
  double prev = -1.0;
  for (int iter = 0; iter < 500000; ++iter) {
    const Eigen::VectorXd y = G * v;
    const double rq = v.dot(y);
    if (rq <= 1e-300) return 0.0;  // B is numerically zero
    if (prev >= 0.0 && std::abs(rq - prev) <= 1e-12 * std::max(1.0, rq))
      return std::sqrt(rq);
    prev = rq;
    v = y / y.norm();
  }
  return std::sqrt(prev);
}

}  // namespace sclip
