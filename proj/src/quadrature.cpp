#include "sclip/quadrature.hpp"

#include <cmath>
#include <string>

#include "sclip/errors.hpp"

namespace sclip {

void validate(const QuadratureSpec& spec) {
  if (spec.panels < 64) throw ValidationError("quadrature panels must be >= 64");
  if (!std::isfinite(spec.domain.first) || !std::isfinite(spec.domain.second) ||
      spec.domain.first >= spec.domain.second)
    throw ValidationError("quadrature domain must be a finite interval");
}

double simpson(const Integrand& f, double lo, double hi, int panels) {
  if (panels < 1) panels = 1;
  const double h = (hi - lo) / panels;
  double oddSum = 0.0, evenSum = 0.0;
  for (int j = 0; j < panels; ++j) oddSum += f(lo + (j + 0.5) * h);
  for (int j = 1; j < panels; ++j) evenSum += f(lo + j * h);
  return h / 6.0 * (f(lo) + f(hi) + 4.0 * oddSum + 2.0 * evenSum);
}

double simpsonPiecewise(const Integrand& f, const std::vector<double>& breakpoints, int panels) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i)
    total += simpson(f, breakpoints[i], breakpoints[i + 1], panels);
  return total;
}

double integrateAdaptive(const Integrand& f, const std::vector<double>& breakpoints,
                         int initialPanels, double relTol, double absTol, int maxDoublings) {
  int panels = initialPanels < 1 ? 1 : initialPanels;
  double prev = simpsonPiecewise(f, breakpoints, panels);
  for (int round = 0; round < maxDoublings; ++round) {
    panels *= 2;
    const double cur = simpsonPiecewise(f, breakpoints, panels);
    const double tol = std::max(absTol, relTol * std::abs(cur));
    if (std::abs(cur - prev) <= tol) return cur;
    prev = cur;
  }
  throw NonConvergence("adaptive quadrature did not stabilize after " +
                       std::to_string(maxDoublings) + " refinements");
}

std::vector<double> decadeBreakpoints(double hi) {
  std::vector<double> pts{0.0};
  for (double edge = 1.0; edge < hi; edge *= 10.0) pts.push_back(edge);
  pts.push_back(hi);
  return pts;
}

}  // namespace sclip
