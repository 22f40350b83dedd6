#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "sclip/clipcore.hpp"
#include "sclip/noise.hpp"
#include "sclip/problem.hpp"
#include "sclip/rng.hpp"
#include "sclip/topology.hpp"

namespace sclip {

enum class AlgoKind {
  SClipEF,          // server-client smoothed clipping with error feedback
  SClipEFNetwork,   // decentralized variant over a mixing matrix
  DSGD,             // decentralized SGD, eta_t = a/(t+1)
  NetworkGClip,     // decentralized, globally clipped gradients
  NetworkCClip,     // decentralized, component-clipped gradients
  DistGClip,        // server-client, globally clipped gradients
  DistCClip,        // server-client, component-clipped gradients
};

std::string algoKindName(AlgoKind kind);
AlgoKind algoKindFromName(const std::string& name);

// Kinds that hold one iterate per node and mix through W.
bool isNetworkKind(AlgoKind kind);
// Kinds driven by the decaying-schedule clipping (the SClip pair).
bool usesSchedule(AlgoKind kind);

struct AlgoSpec {
  AlgoKind kind = AlgoKind::SClipEFNetwork;
  std::string name;  // defaults to the kind name
  Schedule schedule;
  double stepA = 1.0;        // baseline step constant, eta_t = a/(t+1)
  double clipLambda = 1e15;  // baseline clip threshold
};

// Iteration state. X holds one row per node for network kinds and a single
// row otherwise; M holds one row per node for the SClip kinds and is empty
// otherwise. Once the divergence guard trips, X and M freeze and only the
// iteration counter and noise accounting advance.
struct AlgoState {
  long long t = 0;
  Eigen::MatrixXd X;
  Eigen::MatrixXd M;
  bool diverged = false;
  double noiseChecksum = 0.0;
};

// Counter-based noise access: the draw for (node, iteration, coordinate) is
// a pure function of the key, so algorithms sharing a key consume identical
// noise (common random numbers).
struct NoiseContext {
  RngStream stream{0};
  int n = 0;
  int d = 0;
  const NoiseModel* model = nullptr;

  double draw(int i, long long t, int k) const {
    const std::uint64_t idx =
        (static_cast<std::uint64_t>(t) * n + static_cast<std::uint64_t>(i)) * d +
        static_cast<std::uint64_t>(k);
    return model->sampleOne(stream.unitAt(idx));
  }
};

NoiseContext makeNoiseContext(std::uint64_t runSeed, const NoiseModel& model, int n, int d);

// Iterate-magnitude guard: beyond this the run is flagged diverged.
inline constexpr double kDivergenceGuard = 1e30;

void initState(AlgoState& state, AlgoKind kind, int n, int d, const Eigen::VectorXd& x0);

void stepSClipEFNetwork(AlgoState& state, const QuadraticProblem& p, const NoiseContext& ctx,
                        const MixingMatrix& W, const Schedule& sched);
void stepSClipEF(AlgoState& state, const QuadraticProblem& p, const NoiseContext& ctx,
                 const Schedule& sched);
void stepDSGD(AlgoState& state, const QuadraticProblem& p, const NoiseContext& ctx,
              const MixingMatrix& W, double stepA);
enum class ClipVariant { Global, Component };
void stepNetworkClip(AlgoState& state, const QuadraticProblem& p, const NoiseContext& ctx,
                     const MixingMatrix& W, double stepA, double lambda, ClipVariant variant);
void stepDistClip(AlgoState& state, const QuadraticProblem& p, const NoiseContext& ctx,
                  double stepA, double lambda, ClipVariant variant);

// Dispatches to the step function selected by spec.kind.
void stepAlgorithm(AlgoState& state, const AlgoSpec& spec, const QuadraticProblem& p,
                   const NoiseContext& ctx, const MixingMatrix& W);

struct TraceRow {
  long long t = 0;
  double gapLog10 = 0.0;
  double mseToOpt = 0.0;
  double consensusError = 0.0;
  double mInfMax = 0.0;       // NaN when not applicable
  double xbarDriftInf = 0.0;
  int mBoundOk = -1;          // 1 pass, 0 fail, -1 not applicable
  int consensusBoundOk = -1;
  int driftBoundOk = -1;
  double mBoundSlack = 0.0;   // bound minus value; NaN when not applicable
  double consensusBoundSlack = 0.0;
  double driftBoundSlack = 0.0;
  bool diverged = false;
};

struct Trace {
  std::string algoName;
  AlgoKind kind = AlgoKind::SClipEFNetwork;
  std::uint64_t runSeed = 0;
  std::uint32_t runIndex = 0;
  std::string configHash;
  int n = 0;
  int d = 0;
  long long T = 0;
  double lambda = 0.0;
  bool usedSchedule = false;
  Schedule schedule;
  double stepA = 0.0;
  double clipLambda = 0.0;
  double gap0 = 0.0;
  double noiseChecksum = 0.0;
  bool diverged = false;
  std::vector<TraceRow> rows;
};

// Executes T steps from x0 (zeros when null), recording one row per state
// including the initial one. Deterministic given runSeed; for server-client
// kinds W is ignored.
Trace runTrajectory(const AlgoSpec& spec, const QuadraticProblem& p, const NoiseModel& noise,
                    const MixingMatrix& W, long long T, std::uint64_t runSeed,
                    const Eigen::VectorXd* x0 = nullptr);

}  // namespace sclip
