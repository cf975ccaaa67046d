#pragma once

// Independent QP reference: textbook primal active-set iteration, entirely
// separate from the operator-splitting path in the library. Needs a
// strictly feasible start, which the random-problem generators provide by
// construction. A tiny Tikhonov term keeps the equality KKT systems
// solvable for semidefinite and zero P.

#include <Eigen/Dense>
#include <set>
#include <vector>

#include "dexsafe/qp.hpp"

namespace dexsafe::testsupport {

struct OracleResult {
  bool converged = false;
  VecX z;
  double objective = 0.0;
};

inline double oracle_objective(const QpProblem& p, const VecX& z) {
  return 0.5 * z.dot(p.P * z) + p.c.dot(z);
}

inline OracleResult active_set_qp(const QpProblem& p, const VecX& start,
                                  int max_iter = 2000) {
  const int n = int(p.c.size());
  const int ma = int(p.b.size());
  // general rows, then z <= upper, then -z <= -lower
  std::vector<VecX> G;
  std::vector<double> h;
  for (int i = 0; i < ma; ++i) {
    G.push_back(p.A.row(i).transpose());
    h.push_back(p.b[i]);
  }
  for (int i = 0; i < n; ++i) {
    if (std::isfinite(p.upper[i])) {
      VecX g = VecX::Zero(n);
      g[i] = 1.0;
      G.push_back(g);
      h.push_back(p.upper[i]);
    }
    if (std::isfinite(p.lower[i])) {
      VecX g = VecX::Zero(n);
      g[i] = -1.0;
      G.push_back(g);
      h.push_back(-p.lower[i]);
    }
  }
  const int mg = int(G.size());

  double reg = 1e-10 * std::max(1.0, p.P.diagonal().cwiseAbs().maxCoeff());
  MatX Phat = p.P + reg * MatX::Identity(n, n);

  VecX z = start;
  std::set<int> W;
  OracleResult out;

  for (int iter = 0; iter < max_iter; ++iter) {
    const int k = int(W.size());
    MatX K = MatX::Zero(n + k, n + k);
    VecX rhs(n + k);
    K.topLeftCorner(n, n) = Phat;
    rhs.head(n) = -p.c;
    {
      int r = 0;
      for (int idx : W) {
        K.block(n + r, 0, 1, n) = G[idx].transpose();
        K.block(0, n + r, n, 1) = G[idx];
        K(n + r, n + r) = -1e-12;
        rhs[n + r] = h[idx];
        ++r;
      }
    }
    VecX sol = K.fullPivLu().solve(rhs);
    VecX zstar = sol.head(n);
    VecX d = zstar - z;

    if (d.cwiseAbs().maxCoeff() <= 1e-11 * (1.0 + z.cwiseAbs().maxCoeff())) {
      if (W.empty()) {
        out.converged = true;
        break;
      }
      int worst = -1, r = 0;
      double worst_val = -1e-9;
      for (int idx : W) {
        double lam = sol[n + r];
        if (lam < worst_val) {
          worst_val = lam;
          worst = idx;
        }
        ++r;
      }
      if (worst < 0) {
        out.converged = true;
        break;
      }
      W.erase(worst);
      continue;
    }

    double alpha = 1.0;
    int blocking = -1;
    for (int i = 0; i < mg; ++i) {
      if (W.count(i)) continue;
      double gd = G[i].dot(d);
      if (gd > 1e-12) {
        double slack = std::max(0.0, h[i] - G[i].dot(z));
        double a = slack / gd;
        if (a < alpha) {
          alpha = a;
          blocking = i;
        }
      }
    }
    z += alpha * d;
    if (blocking >= 0) W.insert(blocking);
  }

  out.z = z;
  out.objective = oracle_objective(p, z);
  return out;
}

}  // namespace dexsafe::testsupport
