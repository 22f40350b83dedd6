#pragma once

#include <string>
#include <vector>

#include "sclip/quadrature.hpp"
#include "sclip/rng.hpp"

namespace sclip {

enum class NoiseKind { ExampleHeavyTail, Gaussian, Laplace, Zero };

std::string noiseKindName(NoiseKind kind);
NoiseKind noiseKindFromName(const std::string& name);

// Symmetric scalar noise law with quadrature access to its density and an
// inverse-transform sampler over a truncation range.
//
// The heavy-tailed example law is p(u) = cp / ((u^2+2) ln^2(u^2+2)). Its
// normalization constant cp is computed at construction over [-1e6, 1e6]
// with an analytic remainder for the tails. The sampler draws from the law
// restricted to [truncLo, truncHi] and renormalized.
struct NoiseModel {
  NoiseKind kind = NoiseKind::ExampleHeavyTail;
  double param = 1.0;  // stddev for Gaussian, scale for Laplace; unused otherwise
  double truncLo = -100.0;
  double truncHi = 100.0;
  int gridSize = 4096;

  double cp = 0.0;                // heavy-tail normalization constant
  double truncMass = 1.0;         // full-law mass on [truncLo, truncHi]
  double sigmaFirstMoment = 0.0;  // E|u| of the truncated, renormalized law

  std::vector<double> cdfU;  // grid abscissae, size gridSize
  std::vector<double> cdfP;  // CDF values, cdfP.front()=0, cdfP.back()=1

  bool samplerBuilt() const { return !cdfP.empty(); }

  // Normalized density of the full-support law.
  double densityFull(double u) const;
  // Density renormalized to integrate to 1 on [truncLo, truncHi].
  double densityTruncated(double u) const;

  // Piecewise-linear CDF interpolation and its inverse.
  double cdfAt(double u) const;
  double quantile(double p) const;

  double sampleOne(double unit) const;  // unit in [0,1)
};

// Unnormalized-by-cp heavy-tail density formula.
double densityExampleHeavyTail(double u, double cp);

// Normalization constant of the heavy-tail law over spec.domain plus the
// analytic tail remainder. Rejects non-heavy-tail kinds.
double normalizationConstant(const NoiseModel& model, const QuadratureSpec& spec);

// Constructs the model (computes cp for the heavy-tail law).
NoiseModel makeNoiseModel(NoiseKind kind, double param = 1.0, double truncLo = -100.0,
                          double truncHi = 100.0, int gridSize = 4096);

// Builds the CDF table by trapezoidal accumulation on a uniform grid and
// computes sigmaFirstMoment of the truncated law by quadrature.
void buildTruncatedSampler(NoiseModel& model);

// count i.i.d. draws from the truncated law, consuming the stream sequentially.
std::vector<double> sample(const NoiseModel& model, RngStream& stream, std::size_t count);

// P(u > x) of the full-support heavy-tail law: quadrature on (x, 1e6] plus
// the analytic tail remainder midpoint.
double tailProbability(const NoiseModel& model, double x);

// Partial alpha-moment of the full-support heavy-tail law over [-X, X].
// Grows without bound in X for alpha > 1.
double momentPartialIntegral(const NoiseModel& model, double alpha, double X);

// Quadrature values of E|u| and E[u^2] of the truncated, renormalized law.
double truncatedAbsMoment(const NoiseModel& model);
double truncatedSecondMoment(const NoiseModel& model);

}  // namespace sclip
