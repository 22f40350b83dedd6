#include "sclip/clipcore.hpp"

#include <cmath>

#include "sclip/errors.hpp"

namespace sclip {

ScheduleValues scheduleAt(const Schedule& s, long long t) {
  const double tp1 = static_cast<double>(t) + 1.0;
  ScheduleValues v;
  v.phiT = s.cPhi / std::sqrt(tp1);
  v.epsT = s.tau * std::pow(tp1, 0.6);
  v.betaT = s.cBeta / std::sqrt(tp1);
  v.etaT = s.cEta / std::pow(tp1, 0.2);
  return v;
}

double smoothClipScalar(double y, double phiT, double epsT) {
  return y * phiT / std::sqrt(y * y + epsT);
}

Eigen::VectorXd smoothClipVector(const Eigen::VectorXd& y, double phiT, double epsT) {
  Eigen::VectorXd out(y.size());
  for (Eigen::Index k = 0; k < y.size(); ++k) out(k) = smoothClipScalar(y(k), phiT, epsT);
  return out;
}

Eigen::VectorXd hardClipGlobal(const Eigen::VectorXd& y, double lambda) {
  const double norm = y.norm();
  if (norm <= lambda) return y;
  return (lambda / norm) * y;
}

Eigen::VectorXd hardClipComponent(const Eigen::VectorXd& y, double lambda) {
  return y.cwiseMax(-lambda).cwiseMin(lambda);
}

TheoremConstants theoremConstants(double mu, double L, double sigma, int d, double phiTilde,
                                  double cEtaCPhiBudget) {
  if (!(mu > 0.0) || L < mu) throw InvalidCurvature("requires 0 < mu <= L");
  if (!(sigma > 0.0)) throw ValidationError("requires sigma > 0");
  if (d < 1) throw ValidationError("requires d >= 1");
  TheoremConstants tc;
  tc.mu = mu;
  tc.L = L;
  tc.kappa = L / mu;
  tc.sigma = sigma;
  tc.d = d;
  tc.phiTilde = phiTilde > 0.0 ? phiTilde : std::pow(1.25, 0.25) - 1.0;
  const double s2 = sigma * sigma;
  if (tc.kappa == 1.0) {
    tc.kappaPhi = 1.0 + tc.phiTilde;
    tc.epsilonConst = 1.0 / 9.0;
    tc.cb = 0.9;
    tc.tau = 200.0 * s2;
    tc.cEtaCPhiSquared = 200.0 * s2 / (mu * mu);
  } else {
    tc.kappaPhi = 1.0 + std::min(tc.phiTilde, 1.0 / std::sqrt(2.0 * (tc.kappa - 1.0)));
    tc.epsilonConst = (std::pow(tc.kappaPhi, 2.5) - 1.0) / (std::pow(tc.kappaPhi, 2.5) + 1.0);
    tc.cb = 1.0 / tc.kappaPhi;
    tc.cEtaCPhiSquared = cEtaCPhiBudget > 0.0 ? cEtaCPhiBudget : 3.0 * s2 / (mu * mu);
    const double oneMinusCb = 1.0 - tc.cb;
    tc.tau = (98.0 * tc.cEtaCPhiSquared * d * L * L + 2.0 * s2 / (oneMinusCb * oneMinusCb)) /
             (tc.kappaPhi - 1.0);
  }
  const double oneMinusCb = 1.0 - tc.cb;
  tc.cS = (1.0 - tc.epsilonConst) * tc.cb /
          std::sqrt(98.0 * d * tc.kappa * tc.kappa +
                    (2.0 * s2 / (oneMinusCb * oneMinusCb) + tc.tau) /
                        (tc.cEtaCPhiSquared * mu * mu));
  return tc;
}

Schedule scheduleFromTheorem(const TheoremConstants& tc, double cBeta) {
  if (!(cBeta >= 0.0 && cBeta < 1.0)) throw ValidationError("cBeta must lie in [0, 1)");
  Schedule s;
  s.cPhi = std::pow(tc.cEtaCPhiSquared, 0.25);
  s.cEta = s.cPhi;
  s.tau = tc.tau;
  s.cBeta = cBeta;
  return s;
}

std::pair<double, double> operatorBandConstants(const TheoremConstants& tc, const Schedule& s) {
  const double prod2 = s.cEta * s.cEta * s.cPhi * s.cPhi;
  const double oneMinusCb = 1.0 - tc.cb;
  const double c1 = (1.0 - tc.epsilonConst) * tc.cb * s.cPhi /
                    std::sqrt(98.0 * prod2 * tc.d * tc.L * tc.L +
                              2.0 * tc.sigma * tc.sigma / (oneMinusCb * oneMinusCb) + s.tau);
  const double c2 = (1.0 + tc.epsilonConst) * s.cPhi / std::sqrt(s.tau);
  return {c1, c2};
}

double operatorWindowHalfWidth(const TheoremConstants& tc, const Schedule& s, long long t) {
  return 7.0 * s.cEta * s.cPhi * std::sqrt(static_cast<double>(tc.d)) * tc.L *
         std::pow(static_cast<double>(t), 0.3);
}

double phiMeanQuadrature(double w, const Schedule& s, long long t, const NoiseModel& noise,
                         const QuadratureSpec& spec) {
  validate(spec);
  const ScheduleValues sv = scheduleAt(s, t);
  const double hi = std::min(spec.domain.second, noise.truncHi);
  if (!(hi > 0.0)) throw ValidationError("quadrature domain must extend past 0");
  // Psi_t is odd, the density even: pair +-u to cancel the odd part exactly
  // instead of leaving it to the quadrature.
  const auto f = [&](double u) {
    return (smoothClipScalar(w + u, sv.phiT, sv.epsT) +
            smoothClipScalar(w - u, sv.phiT, sv.epsT)) *
           noise.densityTruncated(u);
  };
  double result;
  try {
    result = integrateAdaptive(f, decadeBreakpoints(hi), spec.panels, 1e-9, 1e-16, 12);
  } catch (const NonConvergence& e) {
    throw NonConvergence(std::string("averaged-operator quadrature: ") + e.what());
  }
  return result;
}

}  // namespace sclip
