#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "sclip/errors.hpp"
#include "sclip/topology.hpp"

using namespace sclip;

namespace {
void checkDoublyStochastic(const Eigen::MatrixXd& W) {
  for (int i = 0; i < W.rows(); ++i) {
    CHECK(W.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(W.col(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK((W - W.transpose()).cwiseAbs().maxCoeff() < 1e-12);
}
}  // namespace

TEST_CASE("complete graph adjacency and uniform averaging") {
  Network net = buildComplete(5);
  CHECK(net.n == 5);
  for (int i = 0; i < 5; ++i) {
    CHECK(net.degree(i) == 4);
    CHECK_FALSE(net.adjacent(i, i));
  }
  MixingMatrix uni = completeUniform(5);
  CHECK(uni.lambda == 0.0);
  checkDoublyStochastic(uni.W);
  CHECK(uni.W(0, 0) == doctest::Approx(0.2));
  CHECK(uni.W(2, 4) == doctest::Approx(0.2));
  CHECK(spectralGap(uni.W) < 1e-9);
}

TEST_CASE("metropolis weights on the complete graph") {
  Network net = buildComplete(4);
  MixingMatrix mix = metropolisWeights(net);
  checkDoublyStochastic(mix.W);
  // Off-diagonal weight 1/(1 + max(3,3)) = 0.25, diagonal residual 0.25.
  CHECK(mix.W(0, 1) == doctest::Approx(0.25));
  CHECK(mix.W(0, 0) == doctest::Approx(0.25));
  CHECK(mix.lambda == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("degree-2 ring eigenvalue has a closed form") {
  // For the 1/(1+2) Metropolis ring on n nodes the mixing spectrum is
  // 1/3 + (2/3) cos(2 pi k / n); the gap value for n=6 is 2/3.
  Network net = buildCycleWithDegree(6, 2);
  for (int i = 0; i < 6; ++i) CHECK(net.degree(i) == 2);
  CHECK(net.adjacent(0, 1));
  CHECK(net.adjacent(0, 5));
  CHECK_FALSE(net.adjacent(0, 2));
  MixingMatrix mix = metropolisWeights(net);
  checkDoublyStochastic(mix.W);
  CHECK(mix.lambda == doctest::Approx(2.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("degree-4 circulant on 20 nodes matches the analytic eigenvalue") {
  Network net = buildCycleWithDegree(20, 4);
  for (int i = 0; i < 20; ++i) CHECK(net.degree(i) == 4);
  CHECK(net.adjacent(0, 1));
  CHECK(net.adjacent(0, 2));
  CHECK(net.adjacent(0, 18));
  CHECK(net.adjacent(0, 19));
  CHECK_FALSE(net.adjacent(0, 3));
  MixingMatrix mix = metropolisWeights(net);
  checkDoublyStochastic(mix.W);
  // Circulant spectrum (1 + 2cos(2 pi k/20) + 2cos(4 pi k/20))/5, maximized
  // over k != 0 at k=1.
  const double expected = (1.0 + 2.0 * std::cos(M_PI / 10.0) + 2.0 * std::cos(M_PI / 5.0)) / 5.0;
  CHECK(expected == doctest::Approx(0.9040294042680404).epsilon(1e-12));
  CHECK(mix.lambda == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("antipodal ring adds the diameter chord") {
  Network net = buildCycleAntipodal(20);
  for (int i = 0; i < 20; ++i) CHECK(net.degree(i) == 5);
  CHECK(net.adjacent(0, 10));
  CHECK(net.adjacent(3, 13));
  MixingMatrix mix = metropolisWeights(net);
  checkDoublyStochastic(mix.W);
  CHECK(mix.lambda == doctest::Approx(0.70601132958329828).epsilon(1e-9));
  CHECK_THROWS_AS(buildCycleAntipodal(7), ValidationError);
}

TEST_CASE("circulant construction rejects bad degrees") {
  CHECK_THROWS_AS(buildCycleWithDegree(10, 3), ValidationError);
  CHECK_THROWS_AS(buildCycleWithDegree(10, 10), DegreeTooLarge);
  CHECK_THROWS_AS(buildCycleWithDegree(10, 12), DegreeTooLarge);
  CHECK_THROWS_AS(buildCycleWithDegree(10, 0), ValidationError);
  CHECK_NOTHROW(buildCycleWithDegree(10, 8));
}

TEST_CASE("custom graphs, connectivity, and the disconnected guard") {
  std::vector<std::pair<int, int>> path{{0, 1}, {1, 2}, {2, 3}};
  Network net = buildCustom(4, path);
  CHECK(isConnected(net));
  CHECK(net.degree(0) == 1);
  CHECK(net.degree(1) == 2);
  MixingMatrix mix = metropolisWeights(net);
  checkDoublyStochastic(mix.W);
  // Edge (0,1): 1/(1 + max(1,2)) = 1/3.
  CHECK(mix.W(0, 1) == doctest::Approx(1.0 / 3.0));
  CHECK(mix.W(0, 0) == doctest::Approx(2.0 / 3.0));

  std::vector<std::pair<int, int>> split{{0, 1}, {2, 3}};
  Network broken = buildCustom(4, split);
  CHECK_FALSE(isConnected(broken));
  CHECK_THROWS_AS(metropolisWeights(broken), Disconnected);
}

TEST_CASE("edge list file round trip with comments") {
  const std::string path = "test_edges.txt";
  {
    std::ofstream out(path);
    out << "# simple triangle plus a pendant\n";
    out << "0 1\n1 2\n2 0\n2 3\n";
  }
  Network net = loadEdgeList(path);
  CHECK(net.n == 4);
  CHECK(net.adjacent(0, 1));
  CHECK(net.adjacent(2, 3));
  CHECK(net.degree(2) == 3);
  CHECK(isConnected(net));
  std::remove(path.c_str());
  CHECK_THROWS_AS(loadEdgeList("does_not_exist_edges.txt"), ParseError);

  const std::string bad = "test_edges_bad.txt";
  {
    std::ofstream out(bad);
    out << "0 notanumber\n";
  }
  CHECK_THROWS_AS(loadEdgeList(bad), ParseError);
  std::remove(bad.c_str());
}

TEST_CASE("spectral gap guards non-stochastic input") {
  Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(3, 3) * 0.5;
  CHECK_THROWS_AS(spectralGap(bad), NonStochastic);
  Eigen::MatrixXd one = Eigen::MatrixXd::Ones(1, 1);
  CHECK(spectralGap(one) == doctest::Approx(0.0));
  Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(4, 4);
  CHECK(spectralGap(eye) == doctest::Approx(1.0).epsilon(1e-9));
}
