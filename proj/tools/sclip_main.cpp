#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sclip/analysis.hpp"
#include "sclip/errors.hpp"
#include "sclip/harness.hpp"

namespace {

std::pair<double, double> parseWindow(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) {
    throw sclip::ValidationError("window must be lo,hi fractions, e.g. 0.5,1.0");
  }
  try {
    return {std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1))};
  } catch (...) {
    throw sclip::ValidationError("window must be lo,hi fractions, e.g. 0.5,1.0");
  }
}

std::vector<double> loadCsvColumn(const std::string& path, const std::string& column) {
  std::ifstream in(path);
  if (!in) throw sclip::ParseError("cannot open csv: " + path);
  std::string line;
  if (!std::getline(in, line)) throw sclip::ParseError("empty csv: " + path);
  std::istringstream hs(line);
  std::vector<std::string> names;
  std::string field;
  while (std::getline(hs, field, ',')) names.push_back(field);
  std::size_t idx = names.size();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == column) idx = i;
  }
  if (idx == names.size()) {
    throw sclip::ValidationError("column '" + column + "' not found in " + path);
  }
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::vector<std::string> fields;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (fields.size() != names.size()) {
      throw sclip::ParseError("ragged csv row in " + path);
    }
    try {
      values.push_back(std::stod(fields[idx]));
    } catch (...) {
      throw sclip::ParseError("non-numeric value '" + fields[idx] + "' in " + path);
    }
  }
  return values;
}

int commandRun(const std::string& configPath, const std::string& outOverride, bool seedSet,
               std::uint64_t seed, int workers) {
  sclip::ExperimentConfig cfg = sclip::loadConfig(configPath);
  if (!outOverride.empty()) cfg.outDir = outOverride;
  if (seedSet) cfg.masterSeed = seed;
  if (workers >= 0) cfg.workers = workers;

  const sclip::ExperimentResult result = sclip::runExperiment(cfg);
  sclip::emitPlotData(cfg, result);

  std::printf("config %s -> %s\n", result.hash.c_str(), cfg.outDir.c_str());
  for (const auto& [name, agg] : result.aggregates) {
    std::printf("%-24s final mean log10 gap %+.4f  diverged %d/%d  violations %lld\n",
                name.c_str(), agg.finalMeanGapLog10(), agg.divergedRuns, agg.runs,
                static_cast<long long>(agg.totalViolations()));
  }
  if (!result.checksumsConsistent) {
    std::printf("WARNING: noise checksums differ across algorithms\n");
  }
  std::printf("summary: %s\n", result.summaryPath.c_str());
  return result.monitorViolations == 0 && result.checksumsConsistent ? 0 : 1;
}

int commandSweep(const std::string& configPath) {
  const sclip::ExperimentConfig cfg = sclip::loadConfig(configPath);
  const sclip::GridSearchResult result = sclip::gridSearch(cfg);
  std::printf("grid search over %s.%s\n", result.algorithm.c_str(), result.parameter.c_str());
  for (const sclip::GridPoint& point : result.leaderboard) {
    std::printf("  %-12g metric %+.6f  diverged %d\n", point.value, point.metric,
                point.divergedRuns);
  }
  std::printf("best: %s = %g (metric %+.6f)\n", result.parameter.c_str(), result.bestValue,
              result.bestMetric);
  return 0;
}

int commandVerifyNoise(double lo, double hi, int gridSize) {
  sclip::NoiseModel noise =
      sclip::makeNoiseModel(sclip::NoiseKind::ExampleHeavyTail, 1.0, lo, hi, gridSize);
  sclip::buildTruncatedSampler(noise);
  const sclip::CheckReport report = sclip::verifyNoiseFacts(noise);
  for (const sclip::CheckRow& row : report.rows) {
    std::printf("[%s] %-55s value %-14.8g ref %-14.8g %s\n", row.pass ? "PASS" : "FAIL",
                row.name.c_str(), row.value, row.reference, row.note.c_str());
  }
  std::printf("%s\n", report.allPass() ? "all noise facts hold" : "noise fact FAILURES");
  return report.allPass() ? 0 : 1;
}

void printLemmaCheck(const char* label, const sclip::LemmaCheck& check) {
  if (!check.applicable) {
    std::printf("[ na ] %-18s not applicable\n", label);
    return;
  }
  if (check.pass) {
    std::printf("[PASS] %-18s %lld rows, min slack %.6g\n", label,
                static_cast<long long>(check.checked), check.minSlack);
  } else {
    std::printf("[FAIL] %-18s first violation at t=%lld, min slack %.6g\n", label,
                static_cast<long long>(check.firstViolation), check.minSlack);
  }
}

int commandVerifyLemmas(const std::string& tracePath) {
  const sclip::Trace trace = sclip::loadTraceCsv(tracePath);
  const sclip::LemmaReport report = sclip::verifyLemmaBounds(trace);
  std::printf("trace %s (%s, run %u)\n", tracePath.c_str(), trace.algoName.c_str(),
              trace.runIndex);
  printLemmaCheck("estimator bound", report.estimatorBound);
  printLemmaCheck("consensus bound", report.consensusBound);
  printLemmaCheck("drift bound", report.driftBound);
  return report.allPass() ? 0 : 1;
}

int commandVerifyHPhi(const std::string& configPath, const std::vector<long long>& tGrid) {
  const sclip::ExperimentConfig cfg = sclip::loadConfig(configPath);
  const sclip::ExperimentSetup setup = sclip::buildSetup(cfg);
  if (setup.noise.kind != sclip::NoiseKind::ExampleHeavyTail) {
    throw sclip::ValidationError("operator band check needs the heavy-tail noise law");
  }
  const sclip::TheoremConstants tc =
      sclip::theoremConstants(setup.problem.mu, setup.problem.L, setup.noise.sigmaFirstMoment,
                              setup.problem.d);
  const sclip::Schedule schedule = sclip::scheduleFromTheorem(tc);
  std::vector<double> fractions;
  for (double f : {1e-4, 1e-3, 0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0}) {
    fractions.push_back(f);
    fractions.push_back(-f);
  }
  const sclip::HPhiReport report = sclip::verifyHPhiBounds(
      schedule, tc, setup.noise, tGrid, fractions, sclip::QuadratureSpec{});
  for (const sclip::HPhiCell& cell : report.cells) {
    std::printf("[%s] t=%-8lld w=%-14.6g ratio %.8e in [%.8e, %.8e]\n",
                cell.pass ? "PASS" : "FAIL", static_cast<long long>(cell.t), cell.w, cell.ratio,
                cell.lo, cell.hi);
  }
  if (report.smallestPassingT >= 0) {
    std::printf("smallest fully passing t: %lld\n",
                static_cast<long long>(report.smallestPassingT));
  } else {
    std::printf("no t in the grid passes for all w\n");
  }
  return report.allPass ? 0 : 1;
}

int commandFitRate(const std::string& csvPath, const std::string& column,
                   const std::string& windowText) {
  const std::vector<double> series = loadCsvColumn(csvPath, column);
  const std::pair<double, double> window = parseWindow(windowText);
  const sclip::RateFit fit = sclip::fitRateExponent(series, window);
  std::printf("fit on %s[%s], t in [%lld, %lld]\n", csvPath.c_str(), column.c_str(),
              static_cast<long long>(fit.windowStart), static_cast<long long>(fit.windowEnd));
  std::printf("delta_hat %.8f  r_squared %.6f  slope %.8f  intercept %.6f\n", fit.deltaHat,
              fit.rSquared, fit.slope, fit.intercept);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"decentralized heavy-tail optimization simulator"};
  app.require_subcommand(1);

  std::string runConfig, runOut;
  std::uint64_t runSeed = 0;
  int runWorkers = -1;
  CLI::App* run = app.add_subcommand("run", "execute an experiment config");
  run->add_option("--config", runConfig, "experiment config file")->required();
  run->add_option("--out", runOut, "output directory override");
  CLI::Option* seedOpt = run->add_option("--seed", runSeed, "master seed override");
  run->add_option("--workers", runWorkers, "worker thread bound");

  std::string sweepConfig;
  CLI::App* sweep = app.add_subcommand("sweep", "grid-search a baseline parameter");
  sweep->add_option("--config", sweepConfig, "experiment config file with grid_search")
      ->required();

  CLI::App* verify = app.add_subcommand("verify", "numerical verification suites");
  verify->require_subcommand(1);

  double noiseLo = -100.0, noiseHi = 100.0;
  int noiseGrid = 4096;
  CLI::App* vnoise = verify->add_subcommand("noise", "heavy-tail law facts");
  vnoise->add_option("--lo", noiseLo, "truncation lower end");
  vnoise->add_option("--hi", noiseHi, "truncation upper end");
  vnoise->add_option("--grid-size", noiseGrid, "sampler grid size");

  std::string tracePath;
  CLI::App* vlemmas = verify->add_subcommand("lemmas", "recheck per-trajectory bounds");
  vlemmas->add_option("trace", tracePath, "trace csv file")->required();

  std::string hphiConfig;
  std::vector<long long> hphiT{1000, 10000, 100000};
  CLI::App* vhphi = verify->add_subcommand("hphi", "averaged-operator band check");
  vhphi->add_option("--config", hphiConfig, "experiment config file")->required();
  vhphi->add_option("--t", hphiT, "iteration grid")->delimiter(',');

  std::string fitCsv, fitColumn = "mean_mse", fitWindow = "0.5,1.0";
  CLI::App* fit = app.add_subcommand("fit-rate", "tail-exponent fit on an aggregate csv");
  fit->add_option("csv", fitCsv, "aggregate csv file")->required();
  fit->add_option("--column", fitColumn, "column to fit");
  fit->add_option("--window", fitWindow, "tail window fractions lo,hi");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return commandRun(runConfig, runOut, seedOpt->count() > 0, runSeed, runWorkers);
    }
    if (sweep->parsed()) return commandSweep(sweepConfig);
    if (verify->parsed()) {
      if (vnoise->parsed()) return commandVerifyNoise(noiseLo, noiseHi, noiseGrid);
      if (vlemmas->parsed()) return commandVerifyLemmas(tracePath);
      if (vhphi->parsed()) return commandVerifyHPhi(hphiConfig, hphiT);
    }
    if (fit->parsed()) return commandFitRate(fitCsv, fitColumn, fitWindow);
  } catch (const sclip::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
