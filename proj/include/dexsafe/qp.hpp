#pragma once

#include <string>

#include "dexsafe/types.hpp"

namespace dexsafe {

// minimize 0.5 z'Pz + c'z  subject to  Az <= b,  lower <= z <= upper
// P must be symmetric positive semidefinite (P = 0 gives an LP).
struct QpProblem {
  MatX P;
  VecX c;
  MatX A;
  VecX b;
  VecX lower, upper;
};

enum class QpStatus { kOptimal, kPrimalInfeasible, kMaxIterations };

struct QpSolution {
  QpStatus status = QpStatus::kMaxIterations;
  VecX z;
  VecX y;      // duals of the A rows, >= 0 at an optimum
  VecX y_box;  // duals of the box rows, sign encodes the side
  double primal_residual = kInf;  // max violation of Az<=b and the box
  double dual_residual = kInf;    // stationarity residual, infinity norm
  int iterations = 0;
  bool polished = false;
};

struct QpSettings {
  double eps_primal = 1e-6;
  double eps_dual = 1e-6;
  double eps_infeasible = 1e-8;
  int max_iterations = 20000;
  bool polish = true;
};

// Operator-splitting solver with an active-set polish pass. Instances hold
// per-solve workspace; share nothing across threads.
class QpSolver {
 public:
  QpSolution solve(const QpProblem& prob, const QpSettings& s = {});
};

QpSolution solve_qp(const QpProblem& prob, const QpSettings& s = {});

// Smallest slack making Az <= b + s compatible with the box: minimizes
// (1/p) sum_i w_i s_i^p over (z, s) with s >= 0. Always solvable. The
// returned slack is certified against the returned witness z so that
// Az <= b + s holds exactly; feeding s (plus any epsilon) back into a
// constrained solve is then guaranteed feasible.
struct SlackProjection {
  VecX s;
  VecX z;
  QpStatus status = QpStatus::kMaxIterations;
};

SlackProjection min_slack_projection(const MatX& A, const VecX& b,
                                     const VecX& lower, const VecX& upper,
                                     const VecX& weights, int p,
                                     const QpSettings& s = {});

// Plain-text dump (dimensions then row-major matrices) for offline replay.
void dump_problem(const QpProblem& prob, const std::string& path);

}  // namespace dexsafe
