#include "sclip/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "sclip/errors.hpp"

namespace sclip {

double AggregateSeries::gapAuc() const {
  if (meanGapLog10.empty()) return 0.0;
  double sum = 0.0;
  for (double v : meanGapLog10) sum += v;
  return sum / static_cast<double>(meanGapLog10.size());
}

long long AggregateSeries::totalViolations() const {
  long long sum = 0;
  for (long long v : monitorViolationCount) sum += v;
  return sum;
}

RateFit fitRateExponent(const std::vector<double>& series, std::pair<double, double> window) {
  if (!(window.first >= 0.0 && window.first < window.second && window.second <= 1.0)) {
    throw ValidationError("rate-fit window must satisfy 0 <= lo < hi <= 1");
  }
  if (series.size() < 2) throw InsufficientData("rate fit needs at least two points");
  const long long T = static_cast<long long>(series.size()) - 1;
  const long long start = std::max<long long>(1, std::llround(window.first * T));
  const long long end = std::min<long long>(T, std::llround(window.second * T));
  const long long count = end - start + 1;
  if (count < 30) {
    throw InsufficientData("rate-fit window holds " + std::to_string(count) +
                           " points, need at least 30");
  }

  double sx = 0.0, sy = 0.0;
  for (long long t = start; t <= end; ++t) {
    const double v = series[static_cast<std::size_t>(t)];
    if (!(v > 0.0)) {
      throw NonPositiveValues("rate fit needs positive values, got " + std::to_string(v) +
                              " at t=" + std::to_string(t));
    }
    sx += std::log(static_cast<double>(t + 1));
    sy += std::log(v);
  }
  const double xbar = sx / count;
  const double ybar = sy / count;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (long long t = start; t <= end; ++t) {
    const double dx = std::log(static_cast<double>(t + 1)) - xbar;
    const double dy = std::log(series[static_cast<std::size_t>(t)]) - ybar;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }

  RateFit fit;
  fit.windowStart = start;
  fit.windowEnd = end;
  fit.slope = sxy / sxx;
  fit.intercept = ybar - fit.slope * xbar;
  const double ssRes = syy - fit.slope * sxy;
  fit.rSquared = syy > 0.0 ? std::clamp(1.0 - ssRes / syy, 0.0, 1.0) : 1.0;
  fit.deltaHat = -fit.slope;
  return fit;
}

RateFit fitRateExponent(const AggregateSeries& series, std::pair<double, double> window) {
  return fitRateExponent(series.meanMse, window);
}

bool LemmaReport::allPass() const {
  const auto ok = [](const LemmaCheck& c) { return !c.applicable || c.pass; };
  return ok(estimatorBound) && ok(consensusBound) && ok(driftBound);
}

namespace {

void checkBound(LemmaCheck& check, double value, double bound, long long t) {
  ++check.checked;
  const double slack = bound - value;
  check.minSlack = std::min(check.minSlack, slack);
  if (!(value <= bound + 1e-9 * (1.0 + bound))) {
    check.pass = false;
    if (check.firstViolation < 0) check.firstViolation = t;
  }
}

}  // namespace

LemmaReport verifyLemmaBounds(const Trace& trace, const Schedule& s, double lambda) {
  LemmaReport rep;
  const bool sclip = trace.usedSchedule;
  const bool network = isNetworkKind(trace.kind);
  rep.estimatorBound.applicable = sclip;
  rep.driftBound.applicable = sclip;
  rep.consensusBound.applicable = sclip && network;
  if (!sclip) return rep;

  const double consensusScale =
      2.0 * s.cPhi * s.cEta * std::sqrt(static_cast<double>(trace.d) * trace.n);
  double Q = 0.0;
  for (std::size_t i = 0; i < trace.rows.size(); ++i) {
    const TraceRow& row = trace.rows[i];
    const long long t = row.t;
    if (t != static_cast<long long>(i)) {
      throw MismatchedTraces("trace rows are not contiguous from t=0");
    }

    const double mBound =
        t == 0 ? s.cPhi : std::min(s.cPhi, 2.0 * s.cPhi / std::sqrt(static_cast<double>(t)));
    checkBound(rep.estimatorBound, row.mInfMax, mBound, t);

    const double driftBound =
        (20.0 / 3.0) * s.cEta * s.cPhi * std::pow(static_cast<double>(t), 0.3);
    checkBound(rep.driftBound, row.xbarDriftInf, driftBound, t);

    if (rep.consensusBound.applicable) {
      checkBound(rep.consensusBound, row.consensusError, consensusScale * Q, t);
    }
    Q = lambda * (Q + std::pow(static_cast<double>(t + 1), -0.7));
  }
  return rep;
}

LemmaReport verifyLemmaBounds(const Trace& trace) {
  return verifyLemmaBounds(trace, trace.schedule, trace.lambda);
}

bool CheckReport::allPass() const {
  for (const CheckRow& row : rows) {
    if (!row.pass) return false;
  }
  return true;
}

CheckReport verifyNoiseFacts(const NoiseModel& noise) {
  if (noise.kind != NoiseKind::ExampleHeavyTail) {
    throw ValidationError("noise facts apply to the heavy-tail example law only");
  }
  CheckReport rep;
  const double sigmaFull = noise.cp / std::log(2.0);

  for (double a : {1.0, 2.0, 5.0, 10.0, 50.0}) {
    const double mass = 1.0 - 2.0 * tailProbability(noise, a);
    const double lower = 1.0 - sigmaFull / a;
    rep.rows.push_back({"mass within [-a,a] >= 1 - sigma/a, a=" + std::to_string(a),
                        mass >= lower, mass, lower, ""});
  }

  for (double x : {4.0, 10.0, 50.0}) {
    const double tail = tailProbability(noise, x);
    const double lg = std::log(x * x + 2.0);
    const double lower = noise.cp / (4.0 * std::sqrt(x * x + 2.0) * lg * lg);
    rep.rows.push_back({"tail P(u>x) > cp/(4 sqrt(x^2+2) ln^2(x^2+2)), x=" + std::to_string(x),
                        tail > lower, tail, lower, ""});
  }

  {
    const double cutoff = 1e6;
    const double remainder = noise.cp / std::log(cutoff * cutoff + 2.0);
    const double direct = momentPartialIntegral(noise, 1.0, cutoff) + remainder;
    const double rel = std::abs(direct - sigmaFull) / sigmaFull;
    rep.rows.push_back({"first absolute moment matches cp/ln2", rel <= 1e-4, direct, sigmaFull,
                        "relative error " + std::to_string(rel)});
  }

  const double m15lo = momentPartialIntegral(noise, 1.5, 1e3);
  const double m15mid = momentPartialIntegral(noise, 1.5, 1e6);
  const double m15hi = momentPartialIntegral(noise, 1.5, 1e9);
  const double m11lo = momentPartialIntegral(noise, 1.1, 1e3);
  const double m11mid = momentPartialIntegral(noise, 1.1, 1e6);
  const double m11hi = momentPartialIntegral(noise, 1.1, 1e65);
  rep.rows.push_back({"partial 1.5-moment grows from X=1e3 to X=1e6", m15mid > m15lo, m15mid,
                      m15lo, ""});
  rep.rows.push_back({"partial 1.5-moment ratio X=1e9 over X=1e3 >= 10", m15hi >= 10.0 * m15lo,
                      m15hi / m15lo, 10.0, ""});
  rep.rows.push_back({"partial 1.1-moment grows from X=1e3 to X=1e6", m11mid > m11lo, m11mid,
                      m11lo, ""});
  rep.rows.push_back({"partial 1.1-moment ratio X=1e65 over X=1e3 >= 10", m11hi >= 10.0 * m11lo,
                      m11hi / m11lo, 10.0, ""});
  return rep;
}

HPhiReport verifyHPhiBounds(const Schedule& schedule, const TheoremConstants& tc,
                            const NoiseModel& noise, const std::vector<long long>& tGrid,
                            const std::vector<double>& wFractions, const QuadratureSpec& spec) {
  if (tGrid.empty() || wFractions.empty()) throw ValidationError("empty verification grid");
  for (double f : wFractions) {
    if (!(std::abs(f) > 0.0 && std::abs(f) <= 1.0)) {
      throw ValidationError("w fractions must be nonzero with magnitude <= 1");
    }
  }
  const auto band = operatorBandConstants(tc, schedule);

  HPhiReport rep;
  rep.allPass = true;
  for (long long t : tGrid) {
    if (t < 1) throw ValidationError("t grid entries must be >= 1");
    const double half = operatorWindowHalfWidth(tc, schedule, t);
    const double scale = std::pow(static_cast<double>(t + 1), -0.8);
    bool allW = true;
    for (double f : wFractions) {
      const double w = f * half;
      double phi = 0.0;
      try {
        phi = phiMeanQuadrature(w, schedule, t, noise, spec);
      } catch (const NonConvergence& e) {
        throw QuadratureFailure("averaged-operator quadrature failed at t=" + std::to_string(t) +
                                ", w=" + std::to_string(w) + ": " + e.what());
      }
      HPhiCell cell;
      cell.t = t;
      cell.w = w;
      cell.ratio = phi / w;
      cell.lo = band.first * scale;
      cell.hi = band.second * scale;
      cell.pass = cell.ratio >= cell.lo * (1.0 - 1e-9) && cell.ratio <= cell.hi * (1.0 + 1e-9);
      allW = allW && cell.pass;
      rep.cells.push_back(cell);
    }
    rep.allPass = rep.allPass && allW;
    if (allW && (rep.smallestPassingT < 0 || t < rep.smallestPassingT)) {
      rep.smallestPassingT = t;
    }
  }
  return rep;
}

AggregateSeries aggregate(const std::vector<Trace>& traces) {
  if (traces.empty()) throw MismatchedTraces("nothing to aggregate");
  const std::size_t len = traces.front().rows.size();
  const std::string& name = traces.front().algoName;
  for (const Trace& tr : traces) {
    if (tr.rows.size() != len) throw MismatchedTraces("trace lengths differ for " + name);
    if (tr.algoName != name) {
      throw MismatchedTraces("cannot aggregate " + tr.algoName + " with " + name);
    }
  }

  AggregateSeries out;
  out.algoName = name;
  out.runs = static_cast<int>(traces.size());
  out.meanMse.assign(len, 0.0);
  out.meanGapLog10.assign(len, 0.0);
  out.meanConsensusError.assign(len, 0.0);
  out.monitorViolationCount.assign(len, 0);
  for (const Trace& tr : traces) {
    if (tr.diverged) ++out.divergedRuns;
    for (std::size_t i = 0; i < len; ++i) {
      const TraceRow& row = tr.rows[i];
      out.meanMse[i] += row.mseToOpt;
      out.meanGapLog10[i] += row.gapLog10;
      out.meanConsensusError[i] += row.consensusError;
      out.monitorViolationCount[i] += (row.mBoundOk == 0 ? 1 : 0) +
                                      (row.consensusBoundOk == 0 ? 1 : 0) +
                                      (row.driftBoundOk == 0 ? 1 : 0);
    }
  }
  const double inv = 1.0 / static_cast<double>(traces.size());
  for (std::size_t i = 0; i < len; ++i) {
    out.meanMse[i] *= inv;
    out.meanGapLog10[i] *= inv;
    out.meanConsensusError[i] *= inv;
  }
  return out;
}

}  // namespace sclip
