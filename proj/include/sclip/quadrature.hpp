#pragma once

#include <functional>
#include <utility>
#include <vector>

namespace sclip {

// Fixed-order composite rule specification. `panels` is the Simpson panel
// count per integration piece; `domain` bounds the overall integral.
struct QuadratureSpec {
  int panels = 256;
  std::pair<double, double> domain{-1e6, 1e6};
};

void validate(const QuadratureSpec& spec);

using Integrand = std::function<double(double)>;

// Composite Simpson rule with `panels` panels on [lo, hi].
double simpson(const Integrand& f, double lo, double hi, int panels);

// Simpson applied piecewise between consecutive breakpoints.
double simpsonPiecewise(const Integrand& f, const std::vector<double>& breakpoints, int panels);

// Doubles panel counts until two successive refinements agree to
// max(absTol, relTol * |I|). Throws NonConvergence when maxDoublings is
// exhausted.
double integrateAdaptive(const Integrand& f, const std::vector<double>& breakpoints,
                         int initialPanels, double relTol, double absTol, int maxDoublings = 16);

// Breakpoints 0, 1, 10, ..., capped at `hi` (hi > 0), suited to integrands
// with power-law tails.
std::vector<double> decadeBreakpoints(double hi);

}  // namespace sclip
