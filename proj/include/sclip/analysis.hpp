#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "sclip/algorithms.hpp"
#include "sclip/clipcore.hpp"
#include "sclip/noise.hpp"
#include "sclip/quadrature.hpp"

namespace sclip {

struct RateFit {
  long long windowStart = 0;
  long long windowEnd = 0;
  double slope = 0.0;
  double intercept = 0.0;
  double rSquared = 0.0;
  double deltaHat = 0.0;  // -slope
};

struct AggregateSeries {
  std::string algoName;
  int runs = 0;
  std::vector<double> meanMse;
  std::vector<double> meanGapLog10;
  std::vector<double> meanConsensusError;
  std::vector<long long> monitorViolationCount;
  int divergedRuns = 0;

  double finalMeanGapLog10() const { return meanGapLog10.back(); }
  // Mean over iterations of the mean log10 relative gap.
  double gapAuc() const;
  long long totalViolations() const;
};

// Least-squares line on (log(t+1), log series[t]) over the tail window given
// as fractions of the last index; deltaHat = -slope. Requires >= 30 window
// points (InsufficientData) and positive values there (NonPositiveValues).
RateFit fitRateExponent(const std::vector<double>& series,
                        std::pair<double, double> window = {0.5, 1.0});
RateFit fitRateExponent(const AggregateSeries& series,
                        std::pair<double, double> window = {0.5, 1.0});

struct LemmaCheck {
  bool applicable = false;
  bool pass = true;
  long long firstViolation = -1;
  long long checked = 0;
  double minSlack = std::numeric_limits<double>::infinity();
};

struct LemmaReport {
  LemmaCheck estimatorBound;   // ||m^t||_inf against the decaying ceiling
  LemmaCheck consensusBound;   // ||X - 1 xbar^T||_F against the partial sum
  LemmaCheck driftBound;       // ||xbar^t - xbar^0||_inf growth bound
  bool allPass() const;
};

// Recomputes every bound from the schedule constants and spectral gap and
// compares against the recorded trace columns; never trusts stored flags.
LemmaReport verifyLemmaBounds(const Trace& trace, const Schedule& schedule, double lambda);
LemmaReport verifyLemmaBounds(const Trace& trace);

struct CheckRow {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double reference = 0.0;
  std::string note;
};

struct CheckReport {
  std::vector<CheckRow> rows;
  bool allPass() const;
};

// Numerical facts about the full-support heavy-tail law: mass inequality
// over an a-grid, tail lower bound, first-absolute-moment identity, and
// growth of partial higher moments. Requires the ExampleHeavyTail kind.
CheckReport verifyNoiseFacts(const NoiseModel& noise);

struct HPhiCell {
  long long t = 0;
  double w = 0.0;
  double ratio = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  bool pass = false;
};

struct HPhiReport {
  std::vector<HPhiCell> cells;
  long long smallestPassingT = -1;  // smallest t with all w passing; -1 if none
  bool allPass = false;
};

// Checks Phi_t(w)/w against [c1, c2]/(t+1)^{4/5} for each t in tGrid and
// each w = fraction * windowHalfWidth(t). Fractions must be nonzero with
// magnitude <= 1. Quadrature trouble surfaces as QuadratureFailure.
HPhiReport verifyHPhiBounds(const Schedule& schedule, const TheoremConstants& tc,
                            const NoiseModel& noise, const std::vector<long long>& tGrid,
                            const std::vector<double>& wFractions, const QuadratureSpec& spec);

// Element-wise means across runs of one algorithm. Throws MismatchedTraces
// on empty input, unequal lengths, or mixed algorithm names.
AggregateSeries aggregate(const std::vector<Trace>& traces);

}  // namespace sclip
