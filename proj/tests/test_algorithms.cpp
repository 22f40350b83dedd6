#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "sclip/algorithms.hpp"
#include "sclip/errors.hpp"
#include "sclip/noise.hpp"
#include "sclip/problem.hpp"
#include "sclip/rng.hpp"
#include "sclip/topology.hpp"

using namespace sclip;

namespace {

QuadraticProblem twinProblem() {
  // Two identical 1-d nodes f_i(x) = x^2, so grad f_i(1) = 2.
  QuadraticProblem p;
  p.n = 2;
  p.d = 1;
  p.A = {Eigen::MatrixXd::Constant(1, 1, 2.0), Eigen::MatrixXd::Constant(1, 1, 2.0)};
  p.b = {Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1)};
  finalizeProblem(p);
  return p;
}

NoiseModel zeroNoise() {
  NoiseModel z = makeNoiseModel(NoiseKind::Zero);
  buildTruncatedSampler(z);
  return z;
}

NoiseModel heavyNoise() {
  NoiseModel m = makeNoiseModel(NoiseKind::ExampleHeavyTail);
  buildTruncatedSampler(m);
  return m;
}

}  // namespace

TEST_CASE("algorithm kind names and classification") {
  for (AlgoKind k : {AlgoKind::SClipEF, AlgoKind::SClipEFNetwork, AlgoKind::DSGD,
                     AlgoKind::NetworkGClip, AlgoKind::NetworkCClip, AlgoKind::DistGClip,
                     AlgoKind::DistCClip}) {
    CHECK(algoKindFromName(algoKindName(k)) == k);
  }
  CHECK_THROWS_AS(algoKindFromName("nope"), ValidationError);
  CHECK(isNetworkKind(AlgoKind::SClipEFNetwork));
  CHECK(isNetworkKind(AlgoKind::DSGD));
  CHECK(isNetworkKind(AlgoKind::NetworkGClip));
  CHECK(isNetworkKind(AlgoKind::NetworkCClip));
  CHECK_FALSE(isNetworkKind(AlgoKind::SClipEF));
  CHECK_FALSE(isNetworkKind(AlgoKind::DistGClip));
  CHECK(usesSchedule(AlgoKind::SClipEF));
  CHECK(usesSchedule(AlgoKind::SClipEFNetwork));
  CHECK_FALSE(usesSchedule(AlgoKind::DSGD));
}

TEST_CASE("first error-feedback step has the closed form") {
  QuadraticProblem p = twinProblem();
  NoiseModel z = zeroNoise();
  MixingMatrix W = completeUniform(2);
  AlgoState st;
  initState(st, AlgoKind::SClipEFNetwork, 2, 1, Eigen::VectorXd::Constant(1, 1.0));
  NoiseContext ctx = makeNoiseContext(1, z, 2, 1);
  Schedule s{1.0, 3.0, 0.5, 1.0};
  stepSClipEFNetwork(st, p, ctx, W, s);
  // m^1 = beta_0 * 0 + (1 - beta_0) Psi_0(2) = 0.5 * 2/sqrt(7) = 1/sqrt(7).
  const double m1 = 0.37796447300922725;
  CHECK(st.M(0, 0) == doctest::Approx(m1).epsilon(1e-15));
  CHECK(st.M(1, 0) == doctest::Approx(m1).epsilon(1e-15));
  CHECK(st.X(0, 0) == doctest::Approx(1.0 - m1).epsilon(1e-14));
  CHECK(st.X(1, 0) == doctest::Approx(1.0 - m1).epsilon(1e-14));
  CHECK(st.t == 1);
  CHECK_FALSE(st.diverged);
  CHECK(st.noiseChecksum == 0.0);
}

TEST_CASE("uniform mixing collapses the network variant onto the server one") {
  RngStream gen(deriveKey({2024}));
  QuadraticProblem p = generateProblem(6, 3, gen);
  NoiseModel noise = heavyNoise();
  MixingMatrix W = completeUniform(6);
  Schedule s{2.0, 30.0, 0.5, 1.0};

  AlgoState net, srv;
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(3);
  initState(net, AlgoKind::SClipEFNetwork, 6, 3, x0);
  initState(srv, AlgoKind::SClipEF, 6, 3, x0);
  NoiseContext ctx = makeNoiseContext(77, noise, 6, 3);

  double worst = 0.0;
  for (int t = 0; t < 300; ++t) {
    stepSClipEFNetwork(net, p, ctx, W, s);
    stepSClipEF(srv, p, ctx, s);
    for (int i = 0; i < 6; ++i) {
      worst = std::max(worst,
                       (net.X.row(i) - srv.X.row(0)).cwiseAbs().maxCoeff());
    }
    worst = std::max(worst, (net.M - srv.M).cwiseAbs().maxCoeff());
  }
  CHECK(worst <= 1e-10);
  CHECK(net.noiseChecksum == srv.noiseChecksum);
}

TEST_CASE("doubly stochastic mixing preserves the average update identity") {
  RngStream gen(deriveKey({11}));
  QuadraticProblem p = generateProblem(8, 4, gen);
  NoiseModel noise = heavyNoise();
  MixingMatrix W = metropolisWeights(buildCycleWithDegree(8, 2));
  Schedule s{2.0, 30.0, 0.5, 1.0};

  AlgoState st;
  initState(st, AlgoKind::SClipEFNetwork, 8, 4, Eigen::VectorXd::Zero(4));
  NoiseContext ctx = makeNoiseContext(5, noise, 8, 4);
  const Eigen::VectorXd xbarBefore = st.X.colwise().mean().transpose();
  const double eta0 = scheduleAt(s, 0).etaT;
  stepSClipEFNetwork(st, p, ctx, W, s);
  const Eigen::VectorXd xbarAfter = st.X.colwise().mean().transpose();
  const Eigen::VectorXd mMean = st.M.colwise().mean().transpose();
  CHECK((xbarAfter - (xbarBefore - eta0 * mMean)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("baselines with an inactive clip threshold reproduce DSGD exactly") {
  RngStream gen(deriveKey({31}));
  QuadraticProblem p = generateProblem(5, 3, gen);
  NoiseModel noise = heavyNoise();
  MixingMatrix W = metropolisWeights(buildCycleWithDegree(5, 2));

  AlgoSpec dsgd;
  dsgd.kind = AlgoKind::DSGD;
  dsgd.stepA = 0.5;
  AlgoSpec gclip = dsgd;
  gclip.kind = AlgoKind::NetworkGClip;
  gclip.clipLambda = 1e15;
  AlgoSpec cclip = dsgd;
  cclip.kind = AlgoKind::NetworkCClip;
  cclip.clipLambda = 1e15;

  Trace a = runTrajectory(dsgd, p, noise, W, 100, 42);
  Trace b = runTrajectory(gclip, p, noise, W, 100, 42);
  Trace c = runTrajectory(cclip, p, noise, W, 100, 42);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t r = 0; r < a.rows.size(); ++r) {
    CHECK(a.rows[r].mseToOpt == b.rows[r].mseToOpt);
    CHECK(a.rows[r].mseToOpt == c.rows[r].mseToOpt);
    CHECK(a.rows[r].consensusError == b.rows[r].consensusError);
  }
  CHECK(a.noiseChecksum == b.noiseChecksum);
  CHECK(a.noiseChecksum == c.noiseChecksum);
}

TEST_CASE("a tight component clamp changes the trajectory") {
  RngStream gen(deriveKey({32}));
  QuadraticProblem p = generateProblem(5, 3, gen);
  NoiseModel noise = heavyNoise();
  MixingMatrix W = metropolisWeights(buildCycleWithDegree(5, 2));
  AlgoSpec dsgd;
  dsgd.kind = AlgoKind::DSGD;
  dsgd.stepA = 0.5;
  AlgoSpec tight = dsgd;
  tight.kind = AlgoKind::NetworkCClip;
  tight.clipLambda = 0.05;
  Trace a = runTrajectory(dsgd, p, noise, W, 50, 9);
  Trace b = runTrajectory(tight, p, noise, W, 50, 9);
  CHECK(a.rows.back().mseToOpt != b.rows.back().mseToOpt);
}

TEST_CASE("server baselines with zero noise follow the deterministic recursion") {
  QuadraticProblem p = twinProblem();
  NoiseModel z = zeroNoise();
  MixingMatrix W = completeUniform(2);
  AlgoSpec spec;
  spec.kind = AlgoKind::DistGClip;
  spec.stepA = 0.2;
  spec.clipLambda = 1e15;
  Eigen::VectorXd x0 = Eigen::VectorXd::Constant(1, 1.0);
  Trace tr = runTrajectory(spec, p, z, W, 20, 0, &x0);

  // x_{t+1} = x_t - (0.2/(t+1)) * 2 x_t on the average cost x^2.
  double x = 1.0;
  for (int t = 0; t <= 20; ++t) {
    const double expectMse = (x - 0.0) * (x - 0.0);
    CHECK(tr.rows[static_cast<std::size_t>(t)].mseToOpt ==
          doctest::Approx(expectMse).epsilon(1e-13));
    x -= 0.2 / (t + 1.0) * 2.0 * x;
  }
  CHECK_FALSE(tr.diverged);
  CHECK(tr.lambda == 0.0);

  AlgoSpec net = spec;
  net.kind = AlgoKind::DSGD;
  Trace tr2 = runTrajectory(net, p, z, W, 20, 0, &x0);
  for (std::size_t r = 0; r < tr.rows.size(); ++r) {
    CHECK(tr2.rows[r].mseToOpt == doctest::Approx(tr.rows[r].mseToOpt).epsilon(1e-12));
  }
}

TEST_CASE("per-step displacement of clipped baselines is bounded by eta lambda") {
  RngStream gen(deriveKey({71}));
  QuadraticProblem p = generateProblem(6, 3, gen);
  NoiseModel noise = heavyNoise();
  MixingMatrix W = metropolisWeights(buildCycleWithDegree(6, 2));
  AlgoState st;
  initState(st, AlgoKind::NetworkGClip, 6, 3, Eigen::VectorXd::Zero(3));
  NoiseContext ctx = makeNoiseContext(123, noise, 6, 3);
  const double lambda = 0.3;
  const double stepA = 2.0;
  for (int t = 0; t < 30; ++t) {
    const Eigen::MatrixXd mixedPrev = W.W * st.X;
    const double eta = stepA / (t + 1.0);
    stepNetworkClip(st, p, ctx, W, stepA, lambda, ClipVariant::Global);
    for (int i = 0; i < 6; ++i) {
      CHECK((st.X.row(i) - mixedPrev.row(i)).norm() <= eta * lambda + 1e-12);
    }
  }
}

TEST_CASE("divergence guard freezes the iterate but not the accounting") {
  RngStream gen(deriveKey({55}));
  QuadraticProblem p = generateProblem(4, 3, gen);
  NoiseModel noise = heavyNoise();
  MixingMatrix W = completeUniform(4);

  AlgoSpec wild;
  wild.kind = AlgoKind::DSGD;
  wild.stepA = 1000.0;
  Trace tr = runTrajectory(wild, p, noise, W, 50, 7);
  CHECK(tr.diverged);
  CHECK(tr.rows.back().diverged);
  CHECK(tr.rows.size() == 51);
  // Find the freeze point and confirm the recorded iterate stops moving.
  std::size_t frozenFrom = tr.rows.size();
  for (std::size_t r = 0; r < tr.rows.size(); ++r) {
    if (tr.rows[r].diverged) {
      frozenFrom = r;
      break;
    }
  }
  REQUIRE(frozenFrom < tr.rows.size());
  CHECK(frozenFrom >= 1);
  for (std::size_t r = frozenFrom + 1; r < tr.rows.size(); ++r) {
    CHECK(tr.rows[r].mseToOpt == tr.rows[frozenFrom].mseToOpt);
  }

  // Noise accounting continues through the freeze: an algorithm that never
  // diverges on the same seed consumes the identical draw set.
  AlgoSpec calm;
  calm.kind = AlgoKind::SClipEFNetwork;
  calm.schedule = Schedule{2.0, 30.0, 0.5, 1.0};
  Trace tame = runTrajectory(calm, p, noise, W, 50, 7);
  CHECK_FALSE(tame.diverged);
  CHECK(tame.noiseChecksum == tr.noiseChecksum);
}

TEST_CASE("trajectories are bitwise deterministic in the run seed") {
  RngStream gen(deriveKey({88}));
  QuadraticProblem p = generateProblem(5, 2, gen);
  NoiseModel noise = heavyNoise();
  MixingMatrix W = metropolisWeights(buildCycleWithDegree(5, 2));
  AlgoSpec spec;
  spec.kind = AlgoKind::SClipEFNetwork;
  spec.schedule = Schedule{2.0, 30.0, 0.5, 1.0};

  Trace a = runTrajectory(spec, p, noise, W, 50, 13);
  Trace b = runTrajectory(spec, p, noise, W, 50, 13);
  Trace c = runTrajectory(spec, p, noise, W, 50, 14);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t r = 0; r < a.rows.size(); ++r) {
    CHECK(a.rows[r].mseToOpt == b.rows[r].mseToOpt);
    CHECK(a.rows[r].gapLog10 == b.rows[r].gapLog10);
    CHECK(a.rows[r].consensusError == b.rows[r].consensusError);
    CHECK(a.rows[r].mInfMax == b.rows[r].mInfMax);
  }
  CHECK(a.noiseChecksum == b.noiseChecksum);
  CHECK(a.noiseChecksum != c.noiseChecksum);
}

TEST_CASE("per-trajectory monitors hold along a real run") {
  RngStream gen(deriveKey({419}));
  QuadraticProblem p = generateProblem(10, 5, gen);
  NoiseModel noise = heavyNoise();
  MixingMatrix W = metropolisWeights(buildCycleWithDegree(10, 2));
  AlgoSpec spec;
  spec.kind = AlgoKind::SClipEFNetwork;
  spec.schedule = Schedule{2.0, 30.0, 0.5, 1.0};
  Trace tr = runTrajectory(spec, p, noise, W, 500, 3);
  CHECK_FALSE(tr.diverged);
  CHECK(tr.lambda == doctest::Approx(W.lambda));
  CHECK(tr.usedSchedule);
  for (const TraceRow& row : tr.rows) {
    CHECK(row.mBoundOk == 1);
    CHECK(row.consensusBoundOk == 1);
    CHECK(row.driftBoundOk == 1);
    CHECK(row.mInfMax <= spec.schedule.cPhi);
  }
  CHECK(tr.rows[1].consensusError > 0.0);

  AlgoSpec plain;
  plain.kind = AlgoKind::DSGD;
  plain.stepA = 0.1;
  Trace base = runTrajectory(plain, p, noise, W, 20, 3);
  for (const TraceRow& row : base.rows) {
    CHECK(row.mBoundOk == -1);
    CHECK(row.consensusBoundOk == -1);
    CHECK(row.driftBoundOk == -1);
    CHECK(std::isnan(row.mInfMax));
    CHECK(std::isnan(row.mBoundSlack));
  }
}

TEST_CASE("trajectory edges: T=0, initial row semantics, bad inputs") {
  QuadraticProblem p = twinProblem();
  NoiseModel z = zeroNoise();
  MixingMatrix W = completeUniform(2);
  AlgoSpec spec;
  spec.kind = AlgoKind::SClipEFNetwork;
  Trace tr = runTrajectory(spec, p, z, W, 0, 1);
  REQUIRE(tr.rows.size() == 1);
  CHECK(tr.rows[0].t == 0);
  CHECK(tr.rows[0].gapLog10 == 0.0);
  CHECK(tr.rows[0].consensusError == 0.0);
  CHECK(tr.rows[0].xbarDriftInf == 0.0);
  CHECK(tr.rows[0].mBoundOk == 1);
  CHECK(tr.rows[0].mBoundSlack == doctest::Approx(spec.schedule.cPhi));

  CHECK_THROWS_AS(runTrajectory(spec, p, z, W, -1, 1), ValidationError);

  AlgoState st;
  CHECK_THROWS_AS(initState(st, AlgoKind::SClipEF, 2, 1, Eigen::VectorXd::Zero(3)),
                  ValidationError);
}
