#pragma once

#include <Eigen/Dense>

#include "sclip/noise.hpp"
#include "sclip/quadrature.hpp"

namespace sclip {

// Constants of the four decaying sequences:
//   phi_t  = cPhi / sqrt(t+1)        clipping level
//   eps_t  = tau * (t+1)^{3/5}       clipping smoothing
//   beta_t = cBeta / sqrt(t+1)       error-feedback weight
//   eta_t  = cEta / (t+1)^{1/5}      step size
struct Schedule {
  double cPhi = 1.0;
  double tau = 1.0;
  double cBeta = 0.5;
  double cEta = 1.0;
};

struct ScheduleValues {
  double phiT = 0.0;
  double epsT = 0.0;
  double betaT = 0.0;
  double etaT = 0.0;
};

ScheduleValues scheduleAt(const Schedule& s, long long t);

// Psi_t(y) = y phi_t / sqrt(y^2 + eps_t): odd, strictly increasing,
// |Psi_t| < phi_t.
double smoothClipScalar(double y, double phiT, double epsT);
Eigen::VectorXd smoothClipVector(const Eigen::VectorXd& y, double phiT, double epsT);

// min(lambda/||y||, 1) * y.
Eigen::VectorXd hardClipGlobal(const Eigen::VectorXd& y, double lambda);
// Component-wise clamp to [-lambda, lambda].
Eigen::VectorXd hardClipComponent(const Eigen::VectorXd& y, double lambda);

// Constants from the convergence guarantee. For kappa = 1 the fixed choices
// are cb = 9/10, eps = 1/9, tau = 200 sigma^2, cEta^2 cPhi^2 = 200
// sigma^2/mu^2. For kappa > 1, kappaPhi = 1 + min(phiTilde,
// 1/sqrt(2(kappa-1))) drives eps, cb, tau, with budget cEta^2 cPhi^2 = 3
// sigma^2/mu^2 by default. cS is the guaranteed decay exponent.
struct TheoremConstants {
  double mu = 0.0, L = 0.0, kappa = 0.0, sigma = 0.0;
  int d = 0;
  double phiTilde = 0.0;
  double kappaPhi = 0.0;
  double epsilonConst = 0.0;
  double cb = 0.0;
  double tau = 0.0;
  double cEtaCPhiSquared = 0.0;  // the product cEta^2 cPhi^2
  double cS = 0.0;
};

// phiTilde <= 0 or budget <= 0 select the defaults described above.
TheoremConstants theoremConstants(double mu, double L, double sigma, int d,
                                  double phiTilde = 0.0, double cEtaCPhiBudget = 0.0);

// Schedule realizing the theorem constants with the symmetric split
// cEta = cPhi = (cEta^2 cPhi^2)^{1/4}.
Schedule scheduleFromTheorem(const TheoremConstants& tc, double cBeta = 0.5);

// Interval [c1, c2] such that Phi_t(w)/w stays within
// [c1, c2]/(t+1)^{4/5} for |w| inside the operator-bound window.
//   c1 = (1-eps) cb cPhi / sqrt(98 cEta^2 cPhi^2 d L^2 + 2 sigma^2/(1-cb)^2 + tau)
//   c2 = (1+eps) cPhi / sqrt(tau)
std::pair<double, double> operatorBandConstants(const TheoremConstants& tc, const Schedule& s);

// Half-width of the w-window at iteration t: 7 cEta cPhi sqrt(d) L t^{3/10}.
double operatorWindowHalfWidth(const TheoremConstants& tc, const Schedule& s, long long t);

// Phi_t(w) = integral of Psi_t(w+u) p(u) du against the truncated noise
// density, by symmetric-pair quadrature. Throws NonConvergence when two
// refinements disagree beyond 1e-7.
double phiMeanQuadrature(double w, const Schedule& s, long long t, const NoiseModel& noise,
                         const QuadratureSpec& spec);

}  // namespace sclip
