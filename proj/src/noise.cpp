#include "sclip/noise.hpp"

#include <algorithm>
#include <cmath>

#include "sclip/errors.hpp"

namespace sclip {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Heavy-tail density without the cp prefactor.
double q(double u) {
  const double s = u * u + 2.0;
  const double l = std::log(s);
  return 1.0 / (s * l * l);
}

// Upper bound on the one-sided mass of q beyond X.
double qTailBound(double X) {
  const double l = std::log(X * X + 2.0);
  return 1.0 / (X * l * l);
}

double adaptiveTol(const Integrand& f, const std::vector<double>& pts, int panels) {
  return integrateAdaptive(f, pts, panels, 1e-11, 1e-14);
}

// Breakpoints covering [lo, hi] with decade-spaced magnitudes on each side
// of the origin, so power-law tails get proportionate panel budgets.
std::vector<double> symmetricBreakpoints(double lo, double hi) {
  std::vector<double> pts{lo, hi};
  if (lo < 0.0 && hi > 0.0) pts.push_back(0.0);
  for (double m = 1.0; m < std::max(std::abs(lo), std::abs(hi)); m *= 10.0) {
    if (m > lo && m < hi) pts.push_back(m);
    if (-m > lo && -m < hi) pts.push_back(-m);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

}  // namespace

std::string noiseKindName(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::ExampleHeavyTail: return "example_heavy_tail";
    case NoiseKind::Gaussian: return "gaussian";
    case NoiseKind::Laplace: return "laplace";
    case NoiseKind::Zero: return "zero";
  }
  return "unknown";
}

NoiseKind noiseKindFromName(const std::string& name) {
  if (name == "example_heavy_tail") return NoiseKind::ExampleHeavyTail;
  if (name == "gaussian") return NoiseKind::Gaussian;
  if (name == "laplace") return NoiseKind::Laplace;
  if (name == "zero") return NoiseKind::Zero;
  throw ValidationError("unknown noise kind: " + name);
}

double densityExampleHeavyTail(double u, double cp) { return cp * q(u); }

double NoiseModel::densityFull(double u) const {
  switch (kind) {
    case NoiseKind::ExampleHeavyTail:
      return cp * q(u);
    case NoiseKind::Gaussian: {
      const double z = u / param;
      return std::exp(-0.5 * z * z) / (param * std::sqrt(2.0 * kPi));
    }
    case NoiseKind::Laplace:
      return std::exp(-std::abs(u) / param) / (2.0 * param);
    case NoiseKind::Zero:
      return 0.0;
  }
  return 0.0;
}

double NoiseModel::densityTruncated(double u) const {
  if (u < truncLo || u > truncHi) return 0.0;
  return densityFull(u) / truncMass;
}

double NoiseModel::cdfAt(double u) const {
  if (!samplerBuilt()) throw SamplerNotBuilt("CDF table not built");
  if (u <= cdfU.front()) return 0.0;
  if (u >= cdfU.back()) return 1.0;
  const auto it = std::upper_bound(cdfU.begin(), cdfU.end(), u);
  const std::size_t j = static_cast<std::size_t>(it - cdfU.begin());
  const double u0 = cdfU[j - 1], u1 = cdfU[j];
  const double w = (u - u0) / (u1 - u0);
  return cdfP[j - 1] + w * (cdfP[j] - cdfP[j - 1]);
}

double NoiseModel::quantile(double p) const {
  if (!samplerBuilt()) throw SamplerNotBuilt("CDF table not built");
  if (kind == NoiseKind::Zero) return 0.0;
  if (p <= 0.0) return cdfU.front();
  if (p >= 1.0) return cdfU.back();
  const auto it = std::upper_bound(cdfP.begin(), cdfP.end(), p);
  std::size_t j = static_cast<std::size_t>(it - cdfP.begin());
  if (j == 0) return cdfU.front();
  if (j >= cdfP.size()) return cdfU.back();
  const double p0 = cdfP[j - 1], p1 = cdfP[j];
  const double w = p1 > p0 ? (p - p0) / (p1 - p0) : 0.0;
  return cdfU[j - 1] + w * (cdfU[j] - cdfU[j - 1]);
}

double NoiseModel::sampleOne(double unit) const {
  if (kind == NoiseKind::Zero) return 0.0;
  return quantile(unit);
}

double normalizationConstant(const NoiseModel& model, const QuadratureSpec& spec) {
  if (model.kind != NoiseKind::ExampleHeavyTail)
    throw ValidationError("normalization constant applies to the heavy-tail law only");
  validate(spec);
  const double hi = spec.domain.second;
  if (std::abs(spec.domain.first + hi) > 1e-9 * hi)
    throw ValidationError("quadrature domain must be symmetric about 0");
  const double core = 2.0 * adaptiveTol(q, decadeBreakpoints(hi), spec.panels);
  const double mass = core + 2.0 * qTailBound(hi);
  return 1.0 / mass;
}

NoiseModel makeNoiseModel(NoiseKind kind, double param, double truncLo, double truncHi,
                          int gridSize) {
  if (truncLo >= truncHi) throw InvalidRange("truncation range must satisfy lo < hi");
  NoiseModel m;
  m.kind = kind;
  m.param = param;
  m.truncLo = truncLo;
  m.truncHi = truncHi;
  m.gridSize = gridSize;
  if (kind == NoiseKind::Gaussian || kind == NoiseKind::Laplace) {
    if (param <= 0.0) throw ValidationError("noise parameter must be positive");
  }
  if (kind == NoiseKind::ExampleHeavyTail) {
    m.cp = normalizationConstant(m, QuadratureSpec{});
  }
  if (kind == NoiseKind::Zero) {
    m.truncMass = 1.0;
  } else {
    m.truncMass = integrateAdaptive([&m](double u) { return m.densityFull(u); },
                                    symmetricBreakpoints(truncLo, truncHi), 64, 1e-11, 1e-15);
  }
  return m;
}

void buildTruncatedSampler(NoiseModel& model) {
  if (model.truncLo >= model.truncHi) throw InvalidRange("truncation range must satisfy lo < hi");
  if (model.gridSize < 1024) throw ValidationError("CDF grid size must be >= 1024");
  if (model.kind == NoiseKind::Zero) {
    model.cdfU = {0.0, 0.0};
    model.cdfP = {0.0, 1.0};
    model.sigmaFirstMoment = 0.0;
    return;
  }
  const int g = model.gridSize;
  model.cdfU.resize(g);
  model.cdfP.resize(g);
  const double h = (model.truncHi - model.truncLo) / (g - 1);
  for (int j = 0; j < g; ++j) model.cdfU[j] = model.truncLo + j * h;
  model.cdfP[0] = 0.0;
  double prevDensity = model.densityFull(model.cdfU[0]);
  for (int j = 1; j < g; ++j) {
    const double d = model.densityFull(model.cdfU[j]);
    model.cdfP[j] = model.cdfP[j - 1] + 0.5 * h * (prevDensity + d);
    prevDensity = d;
  }
  const double total = model.cdfP.back();
  if (!(total > 0.0)) throw NonConvergence("CDF accumulation produced non-positive mass");
  for (int j = 0; j < g; ++j) model.cdfP[j] /= total;
  model.cdfP.back() = 1.0;
  for (int j = 1; j < g; ++j)
    if (!(model.cdfP[j] > model.cdfP[j - 1]))
      throw NonConvergence("CDF table is not strictly increasing");
  model.sigmaFirstMoment = truncatedAbsMoment(model);
}

std::vector<double> sample(const NoiseModel& model, RngStream& stream, std::size_t count) {
  if (!model.samplerBuilt()) throw SamplerNotBuilt("build the truncated sampler before sampling");
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = model.sampleOne(stream.nextUnit());
  return out;
}

double tailProbability(const NoiseModel& model, double x) {
  if (model.kind != NoiseKind::ExampleHeavyTail)
    throw ValidationError("tail probability applies to the heavy-tail law only");
  if (x < 0.0) throw InvalidRange("tail probability requires x >= 0");
  const double X = 1e6;
  if (x >= X) return model.cp * qTailBound(x);
  std::vector<double> pts{x};
  for (double edge = 1.0; edge < X; edge *= 10.0)
    if (edge > x) pts.push_back(edge);
  pts.push_back(X);
  const double core = adaptiveTol(q, pts, 64);
  return model.cp * (core + qTailBound(X));
}

double momentPartialIntegral(const NoiseModel& model, double alpha, double X) {
  if (model.kind != NoiseKind::ExampleHeavyTail)
    throw ValidationError("partial moments apply to the heavy-tail law only");
  if (alpha < 0.0 || X <= 0.0) throw InvalidRange("requires alpha >= 0 and X > 0");
  double nearPart = 0.0;
  const double split = std::min(X, 1.0);
  nearPart = adaptiveTol([alpha](double u) { return std::pow(u, alpha) * q(u); },
                         {0.0, split}, 64);
  double farPart = 0.0;
  if (X > 1.0) {
    // Log substitution u = e^v keeps the integrand finite for huge X:
    // u^alpha q(u) du = e^{(alpha-1)v} / ((1 + 2e^{-2v}) L^2) dv,
    // with L = ln(u^2+2) = 2v + log1p(2 e^{-2v}).
    const auto fv = [alpha](double v) {
      const double e2 = std::exp(-2.0 * v);
      const double L = 2.0 * v + std::log1p(2.0 * e2);
      return std::exp((alpha - 1.0) * v) / ((1.0 + 2.0 * e2) * L * L);
    };
    const double vMax = std::log(X);
    std::vector<double> pts{0.0};
    const double step = std::log(10.0);
    for (double v = step; v < vMax; v += step) pts.push_back(v);
    pts.push_back(vMax);
    farPart = adaptiveTol(fv, pts, 64);
  }
  return 2.0 * model.cp * (nearPart + farPart);
}

namespace {

double truncatedMomentImpl(const NoiseModel& model, int power) {
  if (model.kind == NoiseKind::Zero) return 0.0;
  const std::vector<double> pts = symmetricBreakpoints(model.truncLo, model.truncHi);
  const auto f = [&model, power](double u) {
    const double w = power == 1 ? std::abs(u) : u * u;
    return w * model.densityFull(u);
  };
  return integrateAdaptive(f, pts, 64, 1e-11, 1e-15) / model.truncMass;
}

}  // namespace

double truncatedAbsMoment(const NoiseModel& model) { return truncatedMomentImpl(model, 1); }

double truncatedSecondMoment(const NoiseModel& model) { return truncatedMomentImpl(model, 2); }

}  // namespace sclip
