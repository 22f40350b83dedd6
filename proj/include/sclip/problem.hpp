#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "sclip/noise.hpp"
#include "sclip/rng.hpp"

namespace sclip {

// Heterogeneous quadratic ensemble f_i(x) = 0.5 x^T A_i x + b_i^T x with
// each A_i symmetric positive definite.
struct QuadraticProblem {
  int n = 0;
  int d = 0;
  std::vector<Eigen::MatrixXd> A;
  std::vector<Eigen::VectorXd> b;
  Eigen::VectorXd xStar;
  double mu = 0.0;     // min_i lambda_min(A_i)
  double L = 0.0;      // max_i lambda_max(A_i)
  double kappa = 0.0;  // L / mu
  double cStar = 0.0;  // max_i ||grad f_i(xStar)||_inf
  double fStar = 0.0;  // f(xStar) with f the average cost

  double fValue(const Eigen::VectorXd& x) const;
};

// Draws A_i, b_i entries uniformly from [-1, 1], symmetrizes each A_i as
// (M + M^T)/2, then shifts by (max(0, -lambda_min) + 0.01) I so every A_i is
// positive definite with margin at least 0.01. xStar solves
// (sum A_i) x = -(sum b_i).
QuadraticProblem generateProblem(int n, int d, RngStream& stream);

// Finalizes derived fields (xStar, mu, L, kappa, cStar, fStar) for
// externally supplied A, b. Used by generateProblem and the loader.
void finalizeProblem(QuadraticProblem& p);

Eigen::VectorXd gradient(const QuadraticProblem& p, int i, const Eigen::VectorXd& x);

// gradient plus i.i.d. per-coordinate noise drawn sequentially from stream.
Eigen::VectorXd stochasticGradient(const QuadraticProblem& p, int i, const Eigen::VectorXd& x,
                                   const NoiseModel& noise, RngStream& stream);

// f(x) - f(xStar); nonnegative up to rounding.
double objectiveGap(const QuadraticProblem& p, const Eigen::VectorXd& x);

// Plain-text persistence: header "n d", then per node d rows of A_i followed
// by one row of b_i, all whitespace-separated with full precision.
void dumpProblem(const QuadraticProblem& p, const std::string& path);
QuadraticProblem loadProblem(const std::string& path);

}  // namespace sclip
