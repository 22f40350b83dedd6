#include "sclip/problem.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "sclip/errors.hpp"

namespace sclip {

double QuadraticProblem::fValue(const Eigen::VectorXd& x) const {
  double total = 0.0;
  for (int i = 0; i < n; ++i) total += 0.5 * x.dot(A[i] * x) + b[i].dot(x);
  return total / n;
}

void finalizeProblem(QuadraticProblem& p) {
  if (p.n < 1 || p.d < 1) throw ValidationError("problem requires n >= 1 and d >= 1");
  if (static_cast<int>(p.A.size()) != p.n || static_cast<int>(p.b.size()) != p.n)
    throw ValidationError("problem matrices do not match the node count");
  p.mu = std::numeric_limits<double>::infinity();
  p.L = 0.0;
  Eigen::MatrixXd sumA = Eigen::MatrixXd::Zero(p.d, p.d);
  Eigen::VectorXd sumB = Eigen::VectorXd::Zero(p.d);
  for (int i = 0; i < p.n; ++i) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(p.A[i]);
    if (eig.info() != Eigen::Success) throw SingularAggregate("eigendecomposition failed");
    p.mu = std::min(p.mu, eig.eigenvalues().minCoeff());
    p.L = std::max(p.L, eig.eigenvalues().maxCoeff());
    sumA += p.A[i];
    sumB += p.b[i];
  }
  if (!(p.mu > 0.0)) throw InvalidCurvature("local costs must be strongly convex");
  p.kappa = p.L / p.mu;
  Eigen::LDLT<Eigen::MatrixXd> solver(sumA);
  if (solver.info() != Eigen::Success)
    throw SingularAggregate("aggregate Hessian factorization failed");
  p.xStar = solver.solve(-sumB);
  if ((sumA * p.xStar + sumB).norm() > 1e-8 * std::max(1.0, sumB.norm()))
    throw SingularAggregate("aggregate solve residual too large");
  p.cStar = 0.0;
  for (int i = 0; i < p.n; ++i)
    p.cStar = std::max(p.cStar, (p.A[i] * p.xStar + p.b[i]).lpNorm<Eigen::Infinity>());
  p.fStar = p.fValue(p.xStar);
}

QuadraticProblem generateProblem(int n, int d, RngStream& stream) {
  if (n < 1 || d < 1) throw ValidationError("problem requires n >= 1 and d >= 1");
  QuadraticProblem p;
  p.n = n;
  p.d = d;
  p.A.reserve(n);
  p.b.reserve(n);
  for (int i = 0; i < n; ++i) {
    Eigen::MatrixXd M(d, d);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) M(r, c) = stream.nextUniform(-1.0, 1.0);
    Eigen::MatrixXd S = 0.5 * (M + M.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
    const double shift = std::max(0.0, -eig.eigenvalues().minCoeff()) + 0.01;
    S.diagonal().array() += shift;
    p.A.push_back(std::move(S));
    Eigen::VectorXd v(d);
    for (int r = 0; r < d; ++r) v(r) = stream.nextUniform(-1.0, 1.0);
    p.b.push_back(std::move(v));
  }
  finalizeProblem(p);
  return p;
}

Eigen::VectorXd gradient(const QuadraticProblem& p, int i, const Eigen::VectorXd& x) {
  return p.A[i] * x + p.b[i];
}

Eigen::VectorXd stochasticGradient(const QuadraticProblem& p, int i, const Eigen::VectorXd& x,
                                   const NoiseModel& noise, RngStream& stream) {
  Eigen::VectorXd g = gradient(p, i, x);
  for (int k = 0; k < p.d; ++k) g(k) += noise.sampleOne(stream.nextUnit());
  return g;
}

double objectiveGap(const QuadraticProblem& p, const Eigen::VectorXd& x) {
  return p.fValue(x) - p.fStar;
}

void dumpProblem(const QuadraticProblem& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open problem file for writing: " + path);
  char buf[32];
  out << p.n << " " << p.d << "\n";
  const auto fmt = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  for (int i = 0; i < p.n; ++i) {
    for (int r = 0; r < p.d; ++r) {
      for (int c = 0; c < p.d; ++c) out << (c ? " " : "") << fmt(p.A[i](r, c));
      out << "\n";
    }
    for (int c = 0; c < p.d; ++c) out << (c ? " " : "") << fmt(p.b[i](c));
    out << "\n";
  }
}

QuadraticProblem loadProblem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open problem file: " + path);
  QuadraticProblem p;
  if (!(in >> p.n >> p.d)) throw ParseError("problem file missing n d header");
  if (p.n < 1 || p.d < 1) throw ParseError("problem file has invalid sizes");
  p.A.assign(p.n, Eigen::MatrixXd(p.d, p.d));
  p.b.assign(p.n, Eigen::VectorXd(p.d));
  for (int i = 0; i < p.n; ++i) {
    for (int r = 0; r < p.d; ++r)
      for (int c = 0; c < p.d; ++c)
        if (!(in >> p.A[i](r, c))) throw ParseError("problem file truncated in A block");
    for (int c = 0; c < p.d; ++c)
      if (!(in >> p.b[i](c))) throw ParseError("problem file truncated in b block");
  }
  finalizeProblem(p);
  return p;
}

}  // namespace sclip
