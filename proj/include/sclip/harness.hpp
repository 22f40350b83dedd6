#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sclip/algorithms.hpp"
#include "sclip/analysis.hpp"
#include "sclip/noise.hpp"
#include "sclip/problem.hpp"
#include "sclip/topology.hpp"

namespace sclip {

// Key-derivation purposes shared by the harness and the tests.
inline constexpr std::uint64_t kProblemPurpose = 0x70726F62ULL;
inline constexpr std::uint64_t kRunPurpose = 0x72756EULL;

struct ProblemConfig {
  int n = 20;
  int d = 10;
  std::uint64_t seed = 1;
};

struct TopologyConfig {
  // "complete" | "cycle" | "cycle_antipodal" | "custom"
  std::string kind = "cycle";
  int degree = 4;           // cycle only
  std::string edgeList;     // custom only
};

struct NoiseConfig {
  std::string kind = "example_heavy_tail";
  double param = 1.0;
  double lo = -100.0;
  double hi = 100.0;
  int gridSize = 4096;
};

struct ScheduleConfig {
  // "explicit" pins the four constants; "theorem" derives them from the
  // problem curvature and noise moment, with cBeta kept as given.
  std::string mode = "explicit";
  double cPhi = 1.0;
  double tau = 1.0;
  double cBeta = 0.5;
  double cEta = 1.0;
  double phiTilde = 0.0;  // theorem mode; <= 0 selects the default
  double budget = 0.0;    // theorem mode; <= 0 selects the default
};

struct AlgorithmConfig {
  std::string name;
  AlgoKind kind = AlgoKind::SClipEFNetwork;
  ScheduleConfig schedule;
  double stepA = 1.0;
  double clipLambda = 1e15;
};

struct GridSearchConfig {
  std::string algorithm;      // name of the tuned algorithm block
  std::string parameter;      // "step_a" | "clip_lambda"
  std::vector<double> values;
  std::string metric = "final_mean_gap";  // or "mean_gap_auc"
  int runs = 3;
  long long iterations = 0;   // 0: reuse the main iteration count
};

struct ExperimentConfig {
  ProblemConfig problem;
  TopologyConfig topology;
  NoiseConfig noise;
  std::vector<AlgorithmConfig> algorithms;
  long long iterations = 100000;
  int runs = 10;
  std::uint64_t masterSeed = 1;
  std::string outDir = "out";
  int workers = 0;  // 0: hardware concurrency
  std::optional<GridSearchConfig> gridSearch;
};

// Strict parsing: unknown or ill-typed keys raise ValidationError/ParseError
// naming the offending field path.
ExperimentConfig parseConfig(const std::string& text);
ExperimentConfig loadConfig(const std::string& path);

// Hash of the canonical serialized config; stamped into every trace header.
std::string configHash(const ExperimentConfig& cfg);

// Assembled experiment inputs shared by every run.
struct ExperimentSetup {
  QuadraticProblem problem;
  MixingMatrix mixing;
  NoiseModel noise;
  std::vector<AlgoSpec> specs;              // schedules resolved
  std::vector<TheoremConstants> constants;  // valid where theoremMode[i]
  std::vector<bool> theoremMode;
};

ExperimentSetup buildSetup(const ExperimentConfig& cfg);

void writeTraceCsv(const Trace& trace, const std::string& path);
Trace loadTraceCsv(const std::string& path);

struct ExperimentResult {
  std::string hash;
  std::vector<std::string> traceFiles;
  std::map<std::string, std::vector<Trace>> traces;      // by algorithm name
  std::map<std::string, AggregateSeries> aggregates;     // by algorithm name
  long long monitorViolations = 0;
  bool checksumsConsistent = true;
  std::string summaryPath;
};

// Runs every (algorithm, run) pair on a worker pool with common random
// numbers across algorithms, writes trace files, aggregates, and a summary
// file. Trace files for completed runs survive a failure elsewhere.
ExperimentResult runExperiment(const ExperimentConfig& cfg);

struct GridPoint {
  double value = 0.0;
  double metric = 0.0;
  int divergedRuns = 0;
};

struct GridSearchResult {
  std::string algorithm;
  std::string parameter;
  double bestValue = 0.0;
  double bestMetric = 0.0;
  std::vector<GridPoint> leaderboard;  // in the order given by the config
};

// Evaluates the configured parameter grid in memory with the reduced run
// count and returns the metric minimizer (ties break toward the smaller
// parameter value).
GridSearchResult gridSearch(const ExperimentConfig& cfg);

// Writes per-panel mean-gap curves: decentralized and server-client kinds
// each get one CSV with a column per algorithm. Empty panels are skipped.
std::vector<std::string> emitPlotData(const ExperimentConfig& cfg, const ExperimentResult& result);

}  // namespace sclip
