#include "sclip/harness.hpp"

#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "sclip/errors.hpp"

namespace sclip {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kTraceHeader =
    "t,gap_log10,mse_to_opt,consensus_error,m_inf_max,xbar_drift_inf,"
    "m_bound_ok,m_bound_slack,consensus_bound_ok,consensus_bound_slack,"
    "drift_bound_ok,drift_bound_slack,diverged";

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmtOrNa(double v) { return std::isnan(v) ? "na" : fmt(v); }

std::string okOrNa(int ok) { return ok < 0 ? "na" : std::to_string(ok); }

void requireKeys(const json& j, const std::string& path,
                 std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool found = false;
    for (const char* a : allowed) {
      if (it.key() == a) {
        found = true;
        break;
      }
    }
    if (!found) throw ValidationError("unknown key: " + path + "." + it.key());
  }
}

const json& requireObject(const json& j, const std::string& path) {
  if (!j.is_object()) throw ValidationError(path + " must be an object");
  return j;
}

template <typename T>
T getField(const json& j, const std::string& path, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError("wrong type for " + path + "." + key);
  }
}

std::string getString(const json& j, const std::string& path, const char* key,
                      const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string()) throw ValidationError("wrong type for " + path + "." + key);
  return j.at(key).get<std::string>();
}

bool validName(const std::string& name) {
  if (name.empty()) return false;
  for (char c : name) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
  }
  return true;
}

ProblemConfig parseProblem(const json& j) {
  requireObject(j, "problem");
  requireKeys(j, "problem", {"n", "d", "seed"});
  ProblemConfig p;
  p.n = getField(j, "problem", "n", p.n);
  p.d = getField(j, "problem", "d", p.d);
  p.seed = getField(j, "problem", "seed", p.seed);
  if (p.n < 1) throw ValidationError("problem.n must be >= 1");
  if (p.d < 1) throw ValidationError("problem.d must be >= 1");
  return p;
}

TopologyConfig parseTopology(const json& j) {
  requireObject(j, "topology");
  requireKeys(j, "topology", {"kind", "degree", "edge_list"});
  TopologyConfig t;
  t.kind = getString(j, "topology", "kind", t.kind);
  if (t.kind != "complete" && t.kind != "cycle" && t.kind != "cycle_antipodal" &&
      t.kind != "custom") {
    throw ValidationError("topology.kind must be complete, cycle, cycle_antipodal, or custom");
  }
  if (j.contains("degree") && t.kind != "cycle") {
    throw ValidationError("topology.degree only applies to kind cycle");
  }
  t.degree = getField(j, "topology", "degree", t.degree);
  if (j.contains("edge_list") && t.kind != "custom") {
    throw ValidationError("topology.edge_list only applies to kind custom");
  }
  t.edgeList = getString(j, "topology", "edge_list", t.edgeList);
  if (t.kind == "custom" && t.edgeList.empty()) {
    throw ValidationError("topology.edge_list is required for kind custom");
  }
  return t;
}

NoiseConfig parseNoise(const json& j) {
  requireObject(j, "noise");
  requireKeys(j, "noise", {"kind", "param", "lo", "hi", "grid_size"});
  NoiseConfig n;
  n.kind = getString(j, "noise", "kind", n.kind);
  noiseKindFromName(n.kind);  // validates
  n.param = getField(j, "noise", "param", n.param);
  n.lo = getField(j, "noise", "lo", n.lo);
  n.hi = getField(j, "noise", "hi", n.hi);
  n.gridSize = getField(j, "noise", "grid_size", n.gridSize);
  return n;
}

ScheduleConfig parseSchedule(const json& j, const std::string& path) {
  requireObject(j, path);
  requireKeys(j, path, {"mode", "c_phi", "tau", "c_beta", "c_eta", "phi_tilde", "budget"});
  ScheduleConfig s;
  s.mode = getString(j, path, "mode", s.mode);
  if (s.mode != "explicit" && s.mode != "theorem") {
    throw ValidationError(path + ".mode must be explicit or theorem");
  }
  if (s.mode == "explicit") {
    for (const char* key : {"phi_tilde", "budget"}) {
      if (j.contains(key)) {
        throw ValidationError(path + "." + key + " only applies to mode theorem");
      }
    }
  } else {
    for (const char* key : {"c_phi", "tau", "c_eta"}) {
      if (j.contains(key)) {
        throw ValidationError(path + "." + key + " only applies to mode explicit");
      }
    }
  }
  s.cPhi = getField(j, path, "c_phi", s.cPhi);
  s.tau = getField(j, path, "tau", s.tau);
  s.cBeta = getField(j, path, "c_beta", s.cBeta);
  s.cEta = getField(j, path, "c_eta", s.cEta);
  s.phiTilde = getField(j, path, "phi_tilde", s.phiTilde);
  s.budget = getField(j, path, "budget", s.budget);
  if (s.mode == "explicit" && !(s.cPhi > 0.0 && s.tau > 0.0 && s.cEta > 0.0)) {
    throw ValidationError(path + ": c_phi, tau, c_eta must be positive");
  }
  if (!(s.cBeta >= 0.0 && s.cBeta < 1.0)) {
    throw ValidationError(path + ".c_beta must lie in [0, 1)");
  }
  return s;
}

AlgorithmConfig parseAlgorithm(const json& j, const std::string& path) {
  requireObject(j, path);
  requireKeys(j, path, {"name", "kind", "schedule", "step_a", "clip_lambda"});
  AlgorithmConfig a;
  const std::string kindName = getString(j, path, "kind", "");
  if (kindName.empty()) throw ValidationError(path + ".kind is required");
  a.kind = algoKindFromName(kindName);
  a.name = getString(j, path, "name", algoKindName(a.kind));
  if (!validName(a.name)) {
    throw ValidationError(path + ".name must be nonempty alphanumeric/underscore/dash");
  }
  if (usesSchedule(a.kind)) {
    for (const char* key : {"step_a", "clip_lambda"}) {
      if (j.contains(key)) {
        throw ValidationError(path + "." + key + " does not apply to " + kindName);
      }
    }
    if (j.contains("schedule")) a.schedule = parseSchedule(j.at("schedule"), path + ".schedule");
  } else {
    if (j.contains("schedule")) {
      throw ValidationError(path + ".schedule does not apply to " + kindName);
    }
    a.stepA = getField(j, path, "step_a", a.stepA);
    a.clipLambda = getField(j, path, "clip_lambda", a.clipLambda);
    if (!(a.stepA > 0.0)) throw ValidationError(path + ".step_a must be positive");
    if (!(a.clipLambda > 0.0)) throw ValidationError(path + ".clip_lambda must be positive");
  }
  return a;
}

GridSearchConfig parseGridSearch(const json& j) {
  requireObject(j, "grid_search");
  requireKeys(j, "grid_search", {"algorithm", "parameter", "values", "metric", "runs",
                                 "iterations"});
  GridSearchConfig g;
  g.algorithm = getString(j, "grid_search", "algorithm", "");
  if (g.algorithm.empty()) throw ValidationError("grid_search.algorithm is required");
  g.parameter = getString(j, "grid_search", "parameter", "step_a");
  if (g.parameter != "step_a" && g.parameter != "clip_lambda") {
    throw ValidationError("grid_search.parameter must be step_a or clip_lambda");
  }
  if (j.contains("values")) {
    if (!j.at("values").is_array()) throw ValidationError("wrong type for grid_search.values");
    for (const json& v : j.at("values")) {
      if (!v.is_number()) throw ValidationError("grid_search.values must be numbers");
      g.values.push_back(v.get<double>());
    }
  }
  g.metric = getString(j, "grid_search", "metric", g.metric);
  if (g.metric != "final_mean_gap" && g.metric != "mean_gap_auc") {
    throw ValidationError("grid_search.metric must be final_mean_gap or mean_gap_auc");
  }
  g.runs = getField(j, "grid_search", "runs", g.runs);
  if (g.runs < 1) throw ValidationError("grid_search.runs must be >= 1");
  g.iterations = getField(j, "grid_search", "iterations", g.iterations);
  if (g.iterations < 0) throw ValidationError("grid_search.iterations must be >= 0");
  return g;
}

json canonicalJson(const ExperimentConfig& cfg) {
  json j;
  j["problem"] = {{"n", cfg.problem.n}, {"d", cfg.problem.d}, {"seed", cfg.problem.seed}};
  j["topology"] = {{"kind", cfg.topology.kind},
                   {"degree", cfg.topology.degree},
                   {"edge_list", cfg.topology.edgeList}};
  j["noise"] = {{"kind", cfg.noise.kind},
                {"param", cfg.noise.param},
                {"lo", cfg.noise.lo},
                {"hi", cfg.noise.hi},
                {"grid_size", cfg.noise.gridSize}};
  j["algorithms"] = json::array();
  for (const AlgorithmConfig& a : cfg.algorithms) {
    j["algorithms"].push_back({{"name", a.name},
                               {"kind", algoKindName(a.kind)},
                               {"schedule",
                                {{"mode", a.schedule.mode},
                                 {"c_phi", a.schedule.cPhi},
                                 {"tau", a.schedule.tau},
                                 {"c_beta", a.schedule.cBeta},
                                 {"c_eta", a.schedule.cEta},
                                 {"phi_tilde", a.schedule.phiTilde},
                                 {"budget", a.schedule.budget}}},
                               {"step_a", a.stepA},
                               {"clip_lambda", a.clipLambda}});
  }
  j["iterations"] = cfg.iterations;
  j["runs"] = cfg.runs;
  j["master_seed"] = cfg.masterSeed;
  return j;
}

// Worker pool over [0, jobs); exceptions are captured per job.
void runPool(int workers, int jobs, const std::function<void(int)>& fn,
             std::vector<std::exception_ptr>& errors) {
  errors.assign(static_cast<std::size_t>(jobs), nullptr);
  if (jobs == 0) return;
  int count = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
  count = std::max(1, std::min(count, jobs));
  std::atomic<int> next{0};
  auto body = [&]() {
    for (;;) {
      const int job = next.fetch_add(1);
      if (job >= jobs) return;
      try {
        fn(job);
      } catch (...) {
        errors[static_cast<std::size_t>(job)] = std::current_exception();
      }
    }
  };
  if (count == 1) {
    body();
    return;
  }
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) threads.emplace_back(body);
  for (std::thread& th : threads) th.join();
}

void rethrowFirst(const std::vector<std::exception_ptr>& errors) {
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void writeFile(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open for writing: " + path);
  out << body;
  if (!out) throw ParseError("write failed: " + path);
}

double metricOf(const AggregateSeries& agg, const std::string& metric) {
  const double v = metric == "mean_gap_auc" ? agg.gapAuc() : agg.finalMeanGapLog10();
  return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
}

}  // namespace

ExperimentConfig parseConfig(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config parse failed: ") + e.what());
  }
  requireObject(j, "config");
  requireKeys(j, "config", {"problem", "topology", "noise", "algorithms", "iterations", "runs",
                            "master_seed", "out_dir", "workers", "grid_search"});

  ExperimentConfig cfg;
  if (j.contains("problem")) cfg.problem = parseProblem(j.at("problem"));
  if (j.contains("topology")) cfg.topology = parseTopology(j.at("topology"));
  if (j.contains("noise")) cfg.noise = parseNoise(j.at("noise"));
  if (j.contains("algorithms")) {
    if (!j.at("algorithms").is_array()) throw ValidationError("algorithms must be an array");
    int idx = 0;
    for (const json& a : j.at("algorithms")) {
      cfg.algorithms.push_back(parseAlgorithm(a, "algorithms[" + std::to_string(idx) + "]"));
      ++idx;
    }
  }
  cfg.iterations = getField(j, "config", "iterations", cfg.iterations);
  cfg.runs = getField(j, "config", "runs", cfg.runs);
  cfg.masterSeed = getField(j, "config", "master_seed", cfg.masterSeed);
  cfg.outDir = getString(j, "config", "out_dir", cfg.outDir);
  cfg.workers = getField(j, "config", "workers", cfg.workers);
  if (j.contains("grid_search")) cfg.gridSearch = parseGridSearch(j.at("grid_search"));

  if (cfg.iterations < 1) throw ValidationError("iterations must be >= 1");
  if (cfg.runs < 1) throw ValidationError("runs must be >= 1");
  if (cfg.workers < 0) throw ValidationError("workers must be >= 0");

  std::set<std::string> names;
  for (const AlgorithmConfig& a : cfg.algorithms) {
    if (!names.insert(a.name).second) {
      throw ValidationError("duplicate algorithm name: " + a.name);
    }
  }
  if (cfg.gridSearch) {
    const AlgorithmConfig* target = nullptr;
    for (const AlgorithmConfig& a : cfg.algorithms) {
      if (a.name == cfg.gridSearch->algorithm) target = &a;
    }
    if (target == nullptr) {
      throw ValidationError("grid_search.algorithm references unknown name: " +
                            cfg.gridSearch->algorithm);
    }
    if (usesSchedule(target->kind)) {
      throw ValidationError("grid_search tunes baseline parameters; " + target->name +
                            " has none");
    }
  }
  return cfg;
}

ExperimentConfig loadConfig(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open config: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parseConfig(buf.str());
}

std::string configHash(const ExperimentConfig& cfg) {
  const std::string text = canonicalJson(cfg).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentSetup buildSetup(const ExperimentConfig& cfg) {
  ExperimentSetup setup;
  RngStream problemStream(deriveKey({cfg.problem.seed, kProblemPurpose}));
  setup.problem = generateProblem(cfg.problem.n, cfg.problem.d, problemStream);

  const int n = cfg.problem.n;
  if (cfg.topology.kind == "complete") {
    setup.mixing = completeUniform(n);
  } else if (cfg.topology.kind == "cycle") {
    setup.mixing = metropolisWeights(buildCycleWithDegree(n, cfg.topology.degree));
  } else if (cfg.topology.kind == "cycle_antipodal") {
    setup.mixing = metropolisWeights(buildCycleAntipodal(n));
  } else {
    const Network net = loadEdgeList(cfg.topology.edgeList);
    if (net.n != n) {
      throw ValidationError("edge list has " + std::to_string(net.n) + " nodes, problem.n is " +
                            std::to_string(n));
    }
    setup.mixing = metropolisWeights(net);
  }

  setup.noise = makeNoiseModel(noiseKindFromName(cfg.noise.kind), cfg.noise.param, cfg.noise.lo,
                               cfg.noise.hi, cfg.noise.gridSize);
  buildTruncatedSampler(setup.noise);

  setup.specs.reserve(cfg.algorithms.size());
  setup.constants.resize(cfg.algorithms.size());
  setup.theoremMode.assign(cfg.algorithms.size(), false);
  for (std::size_t i = 0; i < cfg.algorithms.size(); ++i) {
    const AlgorithmConfig& a = cfg.algorithms[i];
    AlgoSpec spec;
    spec.kind = a.kind;
    spec.name = a.name;
    spec.stepA = a.stepA;
    spec.clipLambda = a.clipLambda;
    if (usesSchedule(a.kind)) {
      if (a.schedule.mode == "theorem") {
        const double sigma = setup.noise.sigmaFirstMoment;
        if (!(sigma > 0.0)) {
          throw ValidationError("theorem schedule for " + a.name +
                                " requires noise with a positive first moment");
        }
        setup.constants[i] = theoremConstants(setup.problem.mu, setup.problem.L, sigma,
                                              setup.problem.d, a.schedule.phiTilde,
                                              a.schedule.budget);
        setup.theoremMode[i] = true;
        spec.schedule = scheduleFromTheorem(setup.constants[i], a.schedule.cBeta);
      } else {
        spec.schedule.cPhi = a.schedule.cPhi;
        spec.schedule.tau = a.schedule.tau;
        spec.schedule.cBeta = a.schedule.cBeta;
        spec.schedule.cEta = a.schedule.cEta;
      }
    }
    setup.specs.push_back(std::move(spec));
  }
  return setup;
}

void writeTraceCsv(const Trace& trace, const std::string& path) {
  std::ostringstream out;
  out << "# config_hash " << trace.configHash << "\n";
  out << "# algorithm " << trace.algoName << "\n";
  out << "# kind " << algoKindName(trace.kind) << "\n";
  out << "# run " << trace.runIndex << "\n";
  out << "# run_seed " << trace.runSeed << "\n";
  out << "# n " << trace.n << "\n";
  out << "# d " << trace.d << "\n";
  out << "# iterations " << trace.T << "\n";
  out << "# lambda " << fmt(trace.lambda) << "\n";
  out << "# schedule_used " << (trace.usedSchedule ? 1 : 0) << "\n";
  out << "# c_phi " << fmt(trace.schedule.cPhi) << "\n";
  out << "# tau " << fmt(trace.schedule.tau) << "\n";
  out << "# c_beta " << fmt(trace.schedule.cBeta) << "\n";
  out << "# c_eta " << fmt(trace.schedule.cEta) << "\n";
  out << "# step_a " << fmt(trace.stepA) << "\n";
  out << "# clip_lambda " << fmt(trace.clipLambda) << "\n";
  out << "# gap0 " << fmt(trace.gap0) << "\n";
  out << "# noise_checksum " << fmt(trace.noiseChecksum) << "\n";
  out << "# diverged " << (trace.diverged ? 1 : 0) << "\n";
  out << kTraceHeader << "\n";
  for (const TraceRow& row : trace.rows) {
    out << row.t << ',' << fmt(row.gapLog10) << ',' << fmt(row.mseToOpt) << ','
        << fmt(row.consensusError) << ',' << fmtOrNa(row.mInfMax) << ','
        << fmt(row.xbarDriftInf) << ',' << okOrNa(row.mBoundOk) << ','
        << fmtOrNa(row.mBoundSlack) << ',' << okOrNa(row.consensusBoundOk) << ','
        << fmtOrNa(row.consensusBoundSlack) << ',' << okOrNa(row.driftBoundOk) << ','
        << fmtOrNa(row.driftBoundSlack) << ',' << (row.diverged ? 1 : 0) << "\n";
  }
  writeFile(path, out.str());
}

namespace {

std::vector<std::string> splitCsvLine(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

double parseDouble(const std::string& s, const std::string& context) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw ParseError("");
    return v;
  } catch (...) {
    throw ParseError("bad numeric field '" + s + "' in " + context);
  }
}

double parseDoubleOrNa(const std::string& s, const std::string& context) {
  if (s == "na") return std::numeric_limits<double>::quiet_NaN();
  return parseDouble(s, context);
}

int parseOkOrNa(const std::string& s, const std::string& context) {
  if (s == "na") return -1;
  if (s == "0") return 0;
  if (s == "1") return 1;
  throw ParseError("bad monitor field '" + s + "' in " + context);
}

}  // namespace

Trace loadTraceCsv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open trace: " + path);

  Trace tr;
  std::string line;
  bool sawHeader = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line.substr(1));
      std::string key;
      ls >> key;
      std::string rest;
      ls >> rest;
      try {
      if (key == "config_hash") tr.configHash = rest;
      else if (key == "algorithm") tr.algoName = rest;
      else if (key == "kind") tr.kind = algoKindFromName(rest);
      else if (key == "run") tr.runIndex = static_cast<std::uint32_t>(std::stoul(rest));
      else if (key == "run_seed") tr.runSeed = std::stoull(rest);
      else if (key == "n") tr.n = std::stoi(rest);
      else if (key == "d") tr.d = std::stoi(rest);
      else if (key == "iterations") tr.T = std::stoll(rest);
      else if (key == "lambda") tr.lambda = parseDouble(rest, path);
      else if (key == "schedule_used") tr.usedSchedule = rest == "1";
      else if (key == "c_phi") tr.schedule.cPhi = parseDouble(rest, path);
      else if (key == "tau") tr.schedule.tau = parseDouble(rest, path);
      else if (key == "c_beta") tr.schedule.cBeta = parseDouble(rest, path);
      else if (key == "c_eta") tr.schedule.cEta = parseDouble(rest, path);
      else if (key == "step_a") tr.stepA = parseDouble(rest, path);
      else if (key == "clip_lambda") tr.clipLambda = parseDouble(rest, path);
      else if (key == "gap0") tr.gap0 = parseDouble(rest, path);
      else if (key == "noise_checksum") tr.noiseChecksum = parseDouble(rest, path);
      else if (key == "diverged") tr.diverged = rest == "1";
      else throw ParseError("unknown trace header key '" + key + "' in " + path);
      } catch (const Error&) {
        throw;
      } catch (...) {
        throw ParseError("bad trace header line '" + line + "' in " + path);
      }
      continue;
    }
    if (!sawHeader) {
      if (line != kTraceHeader) throw ParseError("unexpected column header in " + path);
      sawHeader = true;
      continue;
    }
    const std::vector<std::string> f = splitCsvLine(line);
    if (f.size() != 13) {
      throw ParseError("expected 13 fields, got " + std::to_string(f.size()) + " in " + path);
    }
    TraceRow row;
    row.t = static_cast<long long>(parseDouble(f[0], path));
    row.gapLog10 = parseDouble(f[1], path);
    row.mseToOpt = parseDouble(f[2], path);
    row.consensusError = parseDouble(f[3], path);
    row.mInfMax = parseDoubleOrNa(f[4], path);
    row.xbarDriftInf = parseDouble(f[5], path);
    row.mBoundOk = parseOkOrNa(f[6], path);
    row.mBoundSlack = parseDoubleOrNa(f[7], path);
    row.consensusBoundOk = parseOkOrNa(f[8], path);
    row.consensusBoundSlack = parseDoubleOrNa(f[9], path);
    row.driftBoundOk = parseOkOrNa(f[10], path);
    row.driftBoundSlack = parseDoubleOrNa(f[11], path);
    row.diverged = f[12] == "1";
    tr.rows.push_back(row);
  }
  if (!sawHeader) throw ParseError("no column header found in " + path);
  if (static_cast<long long>(tr.rows.size()) != tr.T + 1) {
    throw ParseError("row count disagrees with iteration count in " + path);
  }
  return tr;
}

namespace {

void writeAggregateCsv(const AggregateSeries& agg, const std::string& path) {
  std::ostringstream out;
  out << "t,mean_mse,mean_gap_log10,mean_consensus_error,monitor_violations\n";
  for (std::size_t i = 0; i < agg.meanMse.size(); ++i) {
    out << i << ',' << fmt(agg.meanMse[i]) << ',' << fmt(agg.meanGapLog10[i]) << ','
        << fmt(agg.meanConsensusError[i]) << ',' << agg.monitorViolationCount[i] << "\n";
  }
  writeFile(path, out.str());
}

json summaryJson(const ExperimentConfig& cfg, const ExperimentSetup& setup,
                 const ExperimentResult& res) {
  json js;
  js["config_hash"] = res.hash;
  js["checksums_consistent"] = res.checksumsConsistent;
  js["monitor_violations"] = res.monitorViolations;
  js["problem"] = {{"mu", setup.problem.mu},
                   {"L", setup.problem.L},
                   {"kappa", setup.problem.kappa},
                   {"c_star", setup.problem.cStar},
                   {"f_star", setup.problem.fStar}};
  js["lambda"] = setup.mixing.lambda;
  js["noise_sigma"] = setup.noise.sigmaFirstMoment;
  js["algorithms"] = json::object();
  for (std::size_t i = 0; i < setup.specs.size(); ++i) {
    const AlgoSpec& spec = setup.specs[i];
    const AggregateSeries& agg = res.aggregates.at(spec.name);
    json ja;
    ja["kind"] = algoKindName(spec.kind);
    ja["runs"] = agg.runs;
    ja["final_mean_gap_log10"] = agg.finalMeanGapLog10();
    ja["mean_gap_auc"] = agg.gapAuc();
    ja["diverged_runs"] = agg.divergedRuns;
    ja["monitor_violations"] = agg.totalViolations();
    if (usesSchedule(spec.kind)) {
      ja["schedule"] = {{"c_phi", spec.schedule.cPhi},
                        {"tau", spec.schedule.tau},
                        {"c_beta", spec.schedule.cBeta},
                        {"c_eta", spec.schedule.cEta}};
      if (setup.theoremMode[i]) {
        const TheoremConstants& tc = setup.constants[i];
        ja["constants"] = {{"kappa_phi", tc.kappaPhi}, {"epsilon", tc.epsilonConst},
                           {"cb", tc.cb},             {"tau", tc.tau},
                           {"budget", tc.cEtaCPhiSquared}, {"cs", tc.cS}};
      }
    } else {
      ja["step_a"] = spec.stepA;
      ja["clip_lambda"] = spec.clipLambda;
    }
    try {
      const RateFit fit = fitRateExponent(agg);
      ja["rate_fit"] = {{"delta_hat", fit.deltaHat},
                        {"r_squared", fit.rSquared},
                        {"slope", fit.slope},
                        {"intercept", fit.intercept},
                        {"window_start", fit.windowStart},
                        {"window_end", fit.windowEnd}};
    } catch (const Error&) {
      // tail window too short or nonpositive values; summary omits the fit
    }
    js["algorithms"][spec.name] = std::move(ja);
  }
  return js;
}

}  // namespace

ExperimentResult runExperiment(const ExperimentConfig& cfg) {
  const ExperimentSetup setup = buildSetup(cfg);
  ExperimentResult res;
  res.hash = configHash(cfg);
  fs::create_directories(cfg.outDir);

  const int A = static_cast<int>(setup.specs.size());
  const int R = cfg.runs;
  std::vector<std::vector<Trace>> all(static_cast<std::size_t>(A));
  for (auto& v : all) v.resize(static_cast<std::size_t>(R));
  std::vector<std::string> paths(static_cast<std::size_t>(A) * R);

  std::vector<std::exception_ptr> errors;
  runPool(cfg.workers, A * R,
          [&](int job) {
            const int a = job / R;
            const int r = job % R;
            const std::uint64_t runSeed =
                deriveKey({cfg.masterSeed, kRunPurpose, static_cast<std::uint64_t>(r)});
            Trace tr = runTrajectory(setup.specs[static_cast<std::size_t>(a)], setup.problem,
                                     setup.noise, setup.mixing, cfg.iterations, runSeed);
            tr.runIndex = static_cast<std::uint32_t>(r);
            tr.configHash = res.hash;
            const std::string path =
                (fs::path(cfg.outDir) /
                 ("trace_" + tr.algoName + "_run" + std::to_string(r) + ".csv"))
                    .string();
            writeTraceCsv(tr, path);
            paths[static_cast<std::size_t>(job)] = path;
            all[static_cast<std::size_t>(a)][static_cast<std::size_t>(r)] = std::move(tr);
          },
          errors);
  rethrowFirst(errors);
  res.traceFiles.assign(paths.begin(), paths.end());

  for (int r = 0; r < R; ++r) {
    for (int a = 1; a < A; ++a) {
      if (all[static_cast<std::size_t>(a)][static_cast<std::size_t>(r)].noiseChecksum !=
          all[0][static_cast<std::size_t>(r)].noiseChecksum) {
        res.checksumsConsistent = false;
      }
    }
  }

  for (int a = 0; a < A; ++a) {
    const std::string& name = setup.specs[static_cast<std::size_t>(a)].name;
    AggregateSeries agg = aggregate(all[static_cast<std::size_t>(a)]);
    res.monitorViolations += agg.totalViolations();
    writeAggregateCsv(agg, (fs::path(cfg.outDir) / ("aggregate_" + name + ".csv")).string());
    res.aggregates.emplace(name, std::move(agg));
    res.traces.emplace(name, std::move(all[static_cast<std::size_t>(a)]));
  }

  const json js = summaryJson(cfg, setup, res);
  res.summaryPath = (fs::path(cfg.outDir) / "summary.json").string();
  writeFile(res.summaryPath, js.dump(2) + "\n");
  return res;
}

GridSearchResult gridSearch(const ExperimentConfig& cfg) {
  if (!cfg.gridSearch) throw ValidationError("config has no grid_search block");
  const GridSearchConfig& g = *cfg.gridSearch;
  if (g.values.empty()) throw EmptyGrid("grid_search.values is empty");

  const ExperimentSetup setup = buildSetup(cfg);
  std::size_t target = setup.specs.size();
  for (std::size_t i = 0; i < setup.specs.size(); ++i) {
    if (setup.specs[i].name == g.algorithm) target = i;
  }
  if (target == setup.specs.size()) {
    throw ValidationError("grid_search.algorithm references unknown name: " + g.algorithm);
  }

  const long long T = g.iterations > 0 ? g.iterations : cfg.iterations;
  const int R = g.runs;
  const int V = static_cast<int>(g.values.size());
  std::vector<Trace> traces(static_cast<std::size_t>(V) * R);
  std::vector<std::exception_ptr> errors;
  runPool(cfg.workers, V * R,
          [&](int job) {
            const int v = job / R;
            const int r = job % R;
            AlgoSpec spec = setup.specs[target];
            if (g.parameter == "step_a") {
              spec.stepA = g.values[static_cast<std::size_t>(v)];
            } else {
              spec.clipLambda = g.values[static_cast<std::size_t>(v)];
            }
            const std::uint64_t runSeed =
                deriveKey({cfg.masterSeed, kRunPurpose, static_cast<std::uint64_t>(r)});
            traces[static_cast<std::size_t>(job)] =
                runTrajectory(spec, setup.problem, setup.noise, setup.mixing, T, runSeed);
          },
          errors);
  rethrowFirst(errors);

  GridSearchResult res;
  res.algorithm = g.algorithm;
  res.parameter = g.parameter;
  bool haveBest = false;
  for (int v = 0; v < V; ++v) {
    std::vector<Trace> group(traces.begin() + static_cast<std::ptrdiff_t>(v) * R,
                             traces.begin() + static_cast<std::ptrdiff_t>(v + 1) * R);
    const AggregateSeries agg = aggregate(group);
    GridPoint point;
    point.value = g.values[static_cast<std::size_t>(v)];
    point.metric = metricOf(agg, g.metric);
    point.divergedRuns = agg.divergedRuns;
    res.leaderboard.push_back(point);
    const bool better = !haveBest || point.metric < res.bestMetric ||
                        (point.metric == res.bestMetric && point.value < res.bestValue);
    if (better) {
      haveBest = true;
      res.bestMetric = point.metric;
      res.bestValue = point.value;
    }
  }
  return res;
}

std::vector<std::string> emitPlotData(const ExperimentConfig& cfg,
                                      const ExperimentResult& result) {
  struct Panel {
    const char* file;
    std::vector<const AggregateSeries*> series;
    std::vector<std::string> names;
  };
  Panel panels[2] = {{"plot_decentralized.csv", {}, {}}, {"plot_server.csv", {}, {}}};
  for (const AlgorithmConfig& a : cfg.algorithms) {
    const auto it = result.aggregates.find(a.name);
    if (it == result.aggregates.end()) continue;
    Panel& panel = panels[isNetworkKind(a.kind) ? 0 : 1];
    panel.series.push_back(&it->second);
    panel.names.push_back(a.name);
  }

  std::vector<std::string> written;
  for (const Panel& panel : panels) {
    if (panel.series.empty()) {
      std::cerr << "note: no algorithms for " << panel.file << ", skipping\n";
      continue;
    }
    std::ostringstream out;
    out << "t";
    for (const std::string& name : panel.names) out << ',' << name;
    out << "\n";
    const std::size_t len = panel.series.front()->meanGapLog10.size();
    for (std::size_t i = 0; i < len; ++i) {
      out << i;
      for (const AggregateSeries* s : panel.series) out << ',' << fmt(s->meanGapLog10[i]);
      out << "\n";
    }
    const std::string path = (fs::path(cfg.outDir) / panel.file).string();
    writeFile(path, out.str());
    written.push_back(path);
  }
  return written;
}

}  // namespace sclip
