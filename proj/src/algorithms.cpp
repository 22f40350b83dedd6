#include "sclip/algorithms.hpp"

#include <cmath>
#include <limits>

#include "sclip/errors.hpp"

namespace sclip {

namespace {

constexpr std::uint64_t kNoisePurpose = 0x6E6F697365ULL;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Eigen::VectorXd noisyGradient(const QuadraticProblem& p, int i, const Eigen::VectorXd& x,
                              const NoiseContext& ctx, long long t, double& checksum) {
  Eigen::VectorXd g = p.A[static_cast<std::size_t>(i)] * x + p.b[static_cast<std::size_t>(i)];
  for (int k = 0; k < p.d; ++k) {
    const double u = ctx.draw(i, t, k);
    checksum += u;
    g[k] += u;
  }
  return g;
}

// Applies the candidate update unless the state is frozen or the candidate
// trips the magnitude guard (NaN counts as tripping). Always advances t.
void commit(AlgoState& state, Eigen::MatrixXd&& Xnew, Eigen::MatrixXd* Mnew) {
  if (!state.diverged) {
    const double mx = Xnew.array().abs().maxCoeff();
    if (!(mx <= kDivergenceGuard)) {
      state.diverged = true;
    } else {
      state.X = std::move(Xnew);
      if (Mnew != nullptr) state.M = std::move(*Mnew);
    }
  }
  ++state.t;
}

double baselineEta(double stepA, long long t) { return stepA / static_cast<double>(t + 1); }

Eigen::VectorXd applyClip(const Eigen::VectorXd& y, double lambda, ClipVariant variant) {
  return variant == ClipVariant::Global ? hardClipGlobal(y, lambda)
                                        : hardClipComponent(y, lambda);
}

}  // namespace

std::string algoKindName(AlgoKind kind) {
  switch (kind) {
    case AlgoKind::SClipEF: return "SClipEF";
    case AlgoKind::SClipEFNetwork: return "SClipEFNetwork";
    case AlgoKind::DSGD: return "DSGD";
    case AlgoKind::NetworkGClip: return "NetworkGClip";
    case AlgoKind::NetworkCClip: return "NetworkCClip";
    case AlgoKind::DistGClip: return "DistGClip";
    case AlgoKind::DistCClip: return "DistCClip";
  }
  throw ValidationError("unknown algorithm kind");
}

AlgoKind algoKindFromName(const std::string& name) {
  if (name == "SClipEF") return AlgoKind::SClipEF;
  if (name == "SClipEFNetwork") return AlgoKind::SClipEFNetwork;
  if (name == "DSGD") return AlgoKind::DSGD;
  if (name == "NetworkGClip") return AlgoKind::NetworkGClip;
  if (name == "NetworkCClip") return AlgoKind::NetworkCClip;
  if (name == "DistGClip") return AlgoKind::DistGClip;
  if (name == "DistCClip") return AlgoKind::DistCClip;
  throw ValidationError("unknown algorithm kind: " + name);
}

bool isNetworkKind(AlgoKind kind) {
  return kind == AlgoKind::SClipEFNetwork || kind == AlgoKind::DSGD ||
         kind == AlgoKind::NetworkGClip || kind == AlgoKind::NetworkCClip;
}

bool usesSchedule(AlgoKind kind) {
  return kind == AlgoKind::SClipEF || kind == AlgoKind::SClipEFNetwork;
}

NoiseContext makeNoiseContext(std::uint64_t runSeed, const NoiseModel& model, int n, int d) {
  NoiseContext ctx;
  ctx.stream = RngStream(deriveKey({runSeed, kNoisePurpose}));
  ctx.n = n;
  ctx.d = d;
  ctx.model = &model;
  return ctx;
}

void initState(AlgoState& state, AlgoKind kind, int n, int d, const Eigen::VectorXd& x0) {
  if (x0.size() != d) throw ValidationError("initial point dimension mismatch");
  const int rows = isNetworkKind(kind) ? n : 1;
  state.t = 0;
  state.X = x0.transpose().replicate(rows, 1);
  state.M = usesSchedule(kind) ? Eigen::MatrixXd::Zero(n, d) : Eigen::MatrixXd();
  state.diverged = false;
  state.noiseChecksum = 0.0;
}

void stepSClipEFNetwork(AlgoState& state, const QuadraticProblem& p, const NoiseContext& ctx,
                        const MixingMatrix& W, const Schedule& sched) {
  const ScheduleValues sv = scheduleAt(sched, state.t);
  const int n = ctx.n;
  Eigen::MatrixXd Mnew(n, p.d);
  double checksum = 0.0;
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd g =
        noisyGradient(p, i, state.X.row(i).transpose(), ctx, state.t, checksum);
    const Eigen::VectorXd y = g - state.M.row(i).transpose();
    Mnew.row(i) = (sv.betaT * state.M.row(i).transpose() +
                   (1.0 - sv.betaT) * smoothClipVector(y, sv.phiT, sv.epsT))
                      .transpose();
  }
  Eigen::MatrixXd Xnew = W.W * (state.X - sv.etaT * Mnew);
  state.noiseChecksum += checksum;
  commit(state, std::move(Xnew), &Mnew);
}

void stepSClipEF(AlgoState& state, const QuadraticProblem& p, const NoiseContext& ctx,
                 const Schedule& sched) {
  const ScheduleValues sv = scheduleAt(sched, state.t);
  const int n = ctx.n;
  const Eigen::VectorXd x = state.X.row(0).transpose();
  Eigen::MatrixXd Mnew(n, p.d);
  double checksum = 0.0;
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd g = noisyGradient(p, i, x, ctx, state.t, checksum);
    const Eigen::VectorXd y = g - state.M.row(i).transpose();
    Mnew.row(i) = (sv.betaT * state.M.row(i).transpose() +
                   (1.0 - sv.betaT) * smoothClipVector(y, sv.phiT, sv.epsT))
                      .transpose();
  }
  Eigen::MatrixXd Xnew =
      (x - (sv.etaT / n) * Mnew.colwise().sum().transpose()).transpose();
  state.noiseChecksum += checksum;
  commit(state, std::move(Xnew), &Mnew);
}

void stepDSGD(AlgoState& state, const QuadraticProblem& p, const NoiseContext& ctx,
              const MixingMatrix& W, double stepA) {
  const double eta = baselineEta(stepA, state.t);
  const int n = ctx.n;
  Eigen::MatrixXd G(n, p.d);
  double checksum = 0.0;
  for (int i = 0; i < n; ++i) {
    G.row(i) =
        noisyGradient(p, i, state.X.row(i).transpose(), ctx, state.t, checksum).transpose();
  }
  Eigen::MatrixXd Xnew = W.W * (state.X - eta * G);
  state.noiseChecksum += checksum;
  commit(state, std::move(Xnew), nullptr);
}

void stepNetworkClip(AlgoState& state, const QuadraticProblem& p, const NoiseContext& ctx,
                     const MixingMatrix& W, double stepA, double lambda, ClipVariant variant) {
  const double eta = baselineEta(stepA, state.t);
  const int n = ctx.n;
  Eigen::MatrixXd G(n, p.d);
  double checksum = 0.0;
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd g =
        noisyGradient(p, i, state.X.row(i).transpose(), ctx, state.t, checksum);
    G.row(i) = applyClip(g, lambda, variant).transpose();
  }
  Eigen::MatrixXd Xnew = W.W * (state.X - eta * G);
  state.noiseChecksum += checksum;
  commit(state, std::move(Xnew), nullptr);
}

void stepDistClip(AlgoState& state, const QuadraticProblem& p, const NoiseContext& ctx,
                  double stepA, double lambda, ClipVariant variant) {
  const double eta = baselineEta(stepA, state.t);
  const int n = ctx.n;
  const Eigen::VectorXd x = state.X.row(0).transpose();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(p.d);
  double checksum = 0.0;
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd g = noisyGradient(p, i, x, ctx, state.t, checksum);
    sum += applyClip(g, lambda, variant);
  }
  Eigen::MatrixXd Xnew = (x - (eta / n) * sum).transpose();
  state.noiseChecksum += checksum;
  commit(state, std::move(Xnew), nullptr);
}

void stepAlgorithm(AlgoState& state, const AlgoSpec& spec, const QuadraticProblem& p,
                   const NoiseContext& ctx, const MixingMatrix& W) {
  switch (spec.kind) {
    case AlgoKind::SClipEFNetwork:
      stepSClipEFNetwork(state, p, ctx, W, spec.schedule);
      return;
    case AlgoKind::SClipEF:
      stepSClipEF(state, p, ctx, spec.schedule);
      return;
    case AlgoKind::DSGD:
      stepDSGD(state, p, ctx, W, spec.stepA);
      return;
    case AlgoKind::NetworkGClip:
      stepNetworkClip(state, p, ctx, W, spec.stepA, spec.clipLambda, ClipVariant::Global);
      return;
    case AlgoKind::NetworkCClip:
      stepNetworkClip(state, p, ctx, W, spec.stepA, spec.clipLambda, ClipVariant::Component);
      return;
    case AlgoKind::DistGClip:
      stepDistClip(state, p, ctx, spec.stepA, spec.clipLambda, ClipVariant::Global);
      return;
    case AlgoKind::DistCClip:
      stepDistClip(state, p, ctx, spec.stepA, spec.clipLambda, ClipVariant::Component);
      return;
  }
  throw ValidationError("unknown algorithm kind");
}

namespace {

// Per-iteration metric and monitor extraction. The consensus-bound partial
// sum Q_t = sum_{k<t} lambda^{t-k} / (k+1)^{7/10} advances with the
// iteration: Q_{t+1} = lambda (Q_t + 1/(t+1)^{7/10}), Q_0 = 0.
struct Monitors {
  double Q = 0.0;
  Eigen::VectorXd xbar0;

  TraceRow record(const AlgoState& state, const AlgoSpec& spec, const QuadraticProblem& p,
                  double gap0) const {
    const bool network = isNetworkKind(spec.kind);
    const bool sclip = usesSchedule(spec.kind);
    const int n = p.n;
    const int d = p.d;
    const long long t = state.t;

    TraceRow row;
    row.t = t;
    row.diverged = state.diverged;

    const Eigen::VectorXd xbar =
        network ? Eigen::VectorXd(state.X.colwise().mean().transpose())
                : Eigen::VectorXd(state.X.row(0).transpose());
    const double gap = std::max(objectiveGap(p, xbar), 1e-300);
    row.gapLog10 = std::log10(gap / gap0);
    row.mseToOpt = (xbar - p.xStar).squaredNorm();
    row.consensusError =
        network ? (state.X - Eigen::MatrixXd(xbar.transpose().replicate(n, 1))).norm() : 0.0;
    row.xbarDriftInf = (xbar - xbar0).lpNorm<Eigen::Infinity>();

    if (!sclip) {
      row.mInfMax = kNaN;
      row.mBoundSlack = row.consensusBoundSlack = row.driftBoundSlack = kNaN;
      return row;
    }

    const Schedule& s = spec.schedule;
    const auto check = [](double value, double bound, int& ok, double& slack) {
      ok = value <= bound + 1e-9 * (1.0 + bound) ? 1 : 0;
      slack = bound - value;
    };

    row.mInfMax = state.M.size() > 0 ? state.M.array().abs().maxCoeff() : 0.0;
    const double mBound =
        t == 0 ? s.cPhi : std::min(s.cPhi, 2.0 * s.cPhi / std::sqrt(static_cast<double>(t)));
    check(row.mInfMax, mBound, row.mBoundOk, row.mBoundSlack);

    const double driftBound =
        (20.0 / 3.0) * s.cEta * s.cPhi * std::pow(static_cast<double>(t), 0.3);
    check(row.xbarDriftInf, driftBound, row.driftBoundOk, row.driftBoundSlack);

    if (network) {
      const double consensusBound =
          2.0 * s.cPhi * s.cEta * std::sqrt(static_cast<double>(d) * n) * Q;
      check(row.consensusError, consensusBound, row.consensusBoundOk, row.consensusBoundSlack);
    } else {
      row.consensusBoundSlack = kNaN;
    }
    return row;
  }

  void advance(double lambda, long long tBefore) {
    Q = lambda * (Q + std::pow(static_cast<double>(tBefore + 1), -0.7));
  }
};

}  // namespace

Trace runTrajectory(const AlgoSpec& spec, const QuadraticProblem& p, const NoiseModel& noise,
                    const MixingMatrix& W, long long T, std::uint64_t runSeed,
                    const Eigen::VectorXd* x0) {
  if (T < 0) throw ValidationError("negative iteration count");
  const bool network = isNetworkKind(spec.kind);

  const Eigen::VectorXd start = x0 != nullptr ? *x0 : Eigen::VectorXd::Zero(p.d);
  AlgoState state;
  initState(state, spec.kind, p.n, p.d, start);
  const NoiseContext ctx = makeNoiseContext(runSeed, noise, p.n, p.d);

  Trace tr;
  tr.algoName = spec.name.empty() ? algoKindName(spec.kind) : spec.name;
  tr.kind = spec.kind;
  tr.runSeed = runSeed;
  tr.n = p.n;
  tr.d = p.d;
  tr.T = T;
  tr.lambda = network ? W.lambda : 0.0;
  tr.usedSchedule = usesSchedule(spec.kind);
  tr.schedule = spec.schedule;
  tr.stepA = spec.stepA;
  tr.clipLambda = spec.clipLambda;
  tr.gap0 = std::max(objectiveGap(p, start), 1e-300);
  tr.rows.reserve(static_cast<std::size_t>(T) + 1);

  Monitors mon;
  mon.xbar0 = start;
  tr.rows.push_back(mon.record(state, spec, p, tr.gap0));
  for (long long t = 0; t < T; ++t) {
    stepAlgorithm(state, spec, p, ctx, W);
    mon.advance(tr.lambda, t);
    tr.rows.push_back(mon.record(state, spec, p, tr.gap0));
  }
  tr.noiseChecksum = state.noiseChecksum;
  tr.diverged = state.diverged;
  return tr;
}

}  // namespace sclip
