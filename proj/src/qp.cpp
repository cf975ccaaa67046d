#include "dexsafe/qp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <vector>

namespace dexsafe {

namespace {

// Internal constants of the splitting scheme. Tolerances come from
// QpSettings; these only shape the iteration.
constexpr double kSigma = 1e-6;
constexpr double kAlpha = 1.6;
constexpr double kRhoInit = 0.1;
constexpr double kRhoMin = 1e-6;
constexpr double kRhoMax = 1e6;
constexpr int kCheckEvery = 25;

struct Scaled {
  // combined constraint matrix [A; I] after diagonal scaling
  MatX C;
  VecX l, u;
  MatX P;
  VecX c;
  VecX d;  // column scaling, z = d .* z_scaled
  VecX e;  // row scaling, y = e .* y_scaled
};

double inf_norm(const VecX& v) {
  return v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
}

void validate(const QpProblem& p) {
  const int n = int(p.c.size());
  const int m = int(p.b.size());
  if (p.P.rows() != n || p.P.cols() != n)
    throw std::invalid_argument("qp: P must be n x n");
  if (p.A.size() > 0 && p.A.cols() != n)
    throw std::invalid_argument("qp: A column count must match c");
  if (p.A.rows() != m)
    throw std::invalid_argument("qp: A row count must match b");
  if (p.lower.size() != n || p.upper.size() != n)
    throw std::invalid_argument("qp: box must be n-dimensional");
  for (int i = 0; i < n; ++i)
    if (p.lower[i] > p.upper[i])
      throw std::invalid_argument("qp: box lower exceeds upper");
  double scale = std::max(1.0, p.P.cwiseAbs().maxCoeff());
  if ((p.P - p.P.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw std::invalid_argument("qp: P must be symmetric");
  // LLT of P + tol I succeeds exactly for positive semidefinite P
  MatX test = p.P + 1e-9 * scale * MatX::Identity(n, n);
  Eigen::LLT<MatX> llt(test);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("qp: P must be positive semidefinite");
}

Scaled build_scaled(const QpProblem& p) {
  const int n = int(p.c.size());
  const int m = int(p.b.size());
  Scaled s;

  s.d.resize(n);
  for (int j = 0; j < n; ++j)
    s.d[j] = 1.0 / std::sqrt(std::max(1.0, p.P(j, j)));

  MatX C(m + n, n);
  if (m > 0) C.topRows(m) = p.A;
  C.bottomRows(n) = MatX::Identity(n, n);
  VecX l(m + n), u(m + n);
  l.head(m).setConstant(-kInf);
  u.head(m) = p.b;
  l.tail(n) = p.lower;
  u.tail(n) = p.upper;

  // column scaling first, then normalize each row
  C = C * s.d.asDiagonal();
  s.e.resize(m + n);
  for (int i = 0; i < m + n; ++i) {
    double nrm = C.row(i).norm();
    s.e[i] = 1.0 / std::max(nrm, 1e-6);
  }
  s.C = s.e.asDiagonal() * C;
  s.l = l.cwiseProduct(s.e);
  s.u = u.cwiseProduct(s.e);
  // infinities survive scaling
  for (int i = 0; i < m + n; ++i) {
    if (!std::isfinite(l[i])) s.l[i] = -kInf;
    if (!std::isfinite(u[i])) s.u[i] = kInf;
  }
  s.P = s.d.asDiagonal() * p.P * s.d.asDiagonal();
  s.c = s.d.cwiseProduct(p.c);
  return s;
}

struct Residuals {
  double prim = kInf, dual = kInf;
  double prim_rel = kInf, dual_rel = kInf;
  double comp_rel = kInf;
};

Residuals unscaled_residuals(const QpProblem& p, const VecX& z, const VecX& y,
                             const VecX& y_box) {
  Residuals r;
  const int m = int(p.b.size());
  r.prim = 0.0;
  if (m > 0) r.prim = std::max(0.0, (p.A * z - p.b).maxCoeff());
  for (int i = 0; i < z.size(); ++i) {
    r.prim = std::max(r.prim, p.lower[i] - z[i]);
    r.prim = std::max(r.prim, z[i] - p.upper[i]);
  }
  VecX grad = p.P * z + p.c + y_box;
  if (m > 0) grad += p.A.transpose() * y;
  r.dual = inf_norm(grad);

  // complementarity: a dual stuck on a slack constraint hides an objective
  // gap the primal and dual residuals cannot see (acute for zero P)
  double comp = 0.0;
  if (m > 0) {
    VecX slack = p.b - p.A * z;
    for (int i = 0; i < m; ++i) comp += std::abs(y[i]) * std::abs(slack[i]);
  }
  for (int i = 0; i < z.size(); ++i) {
    double yb = y_box[i];
    if (yb == 0.0) continue;
    double bnd = yb > 0.0 ? p.upper[i] : p.lower[i];
    comp += std::isfinite(bnd) ? std::abs(yb) * std::abs(z[i] - bnd)
                               : std::abs(yb);
  }

  double pscale = 1.0, dscale = 1.0;
  if (m > 0) pscale = std::max(pscale, inf_norm(p.A * z));
  pscale = std::max(pscale, inf_norm(z));
  dscale = std::max({dscale, inf_norm(p.P * z), inf_norm(p.c)});
  if (m > 0) dscale = std::max(dscale, inf_norm(p.A.transpose() * y));
  dscale = std::max(dscale, inf_norm(y_box));
  r.prim_rel = r.prim / pscale;
  r.dual_rel = r.dual / dscale;
  double obj = 0.5 * z.dot(p.P * z) + p.c.dot(z);
  r.comp_rel = comp / std::max(1.0, std::abs(obj));
  return r;
}

// Equality-constrained refinement on the detected active set. Returns true
// and fills the solution when the polished point satisfies everything.
bool try_polish(const QpProblem& p, const Scaled& sc, const VecX& x_scaled,
                const VecX& y_scaled, const QpSettings& set, QpSolution& out) {
  const int n = int(p.c.size());
  const int m = int(p.b.size());
  // unscaled constraint values at the current iterate; a nonzero dual on a
  // row that is nowhere near its bound is ADMM noise, not an active set
  VecX z_u = sc.d.cwiseProduct(x_scaled);
  VecX cz(m + n);
  if (m > 0) cz.head(m) = p.A * z_u;
  cz.tail(n) = z_u;
  auto near_bound = [&](int i, int sd) {
    double bnd = i < m ? p.b[i] : (sd > 0 ? p.upper[i - m] : p.lower[i - m]);
    if (!std::isfinite(bnd)) return false;
    return std::abs(cz[i] - bnd) <= 1e-3 * (1.0 + std::abs(bnd));
  };
  std::vector<int> act;    // indices into combined rows
  std::vector<int> side;   // +1 upper, -1 lower
  for (int i = 0; i < m + n; ++i) {
    double y = y_scaled[i] * sc.e[i];
    if (y > 1e-10 && near_bound(i, +1)) {
      act.push_back(i);
      side.push_back(+1);
    } else if (y < -1e-10 && near_bound(i, -1)) {
      act.push_back(i);
      side.push_back(-1);
    }
  }
  if (int(act.size()) > 2 * n + m) return false;

  // combined unscaled constraint row i
  auto row = [&](int i) -> VecX {
    if (i < m) return p.A.row(i).transpose();
    VecX r = VecX::Zero(n);
    r[i - m] = 1.0;
    return r;
  };
  auto bound = [&](int i, int sd) -> double {
    if (i < m) return p.b[i];  // one-sided rows only bind above
    return sd > 0 ? p.upper[i - m] : p.lower[i - m];
  };

  const double reg = 1e-9;
  std::vector<char> in_set(m + n, 0);
  for (int i : act) in_set[i] = 1;
  for (size_t a = 0; a < act.size(); ++a)
    if (act[a] < m && side[a] < 0) return false;  // one-sided rows bind above

  // equality solve on a candidate set. Active bounds are variable fixings,
  // not rows: eliminating them first keeps a constraint that acts through a
  // tiny leftover coefficient solvable, where the bordered full-size system
  // would drown its pivot in the regularization
  auto solve_set = [&](const std::vector<int>& av, const std::vector<int>& sv,
                       VecX& so) {
    const int kk = int(av.size());
    std::vector<int> fixed_of(n, -1);  // entry in av fixing this variable
    std::vector<int> gen;              // entries in av that are general rows
    for (int a = 0; a < kk; ++a) {
      if (av[a] < m)
        gen.push_back(a);
      else
        fixed_of[av[a] - m] = a;
    }
    std::vector<int> freev;
    for (int j = 0; j < n; ++j)
      if (fixed_of[j] < 0) freev.push_back(j);
    const int nf = int(freev.size());
    const int kg = int(gen.size());
    VecX zfix = VecX::Zero(n);
    for (int j = 0; j < n; ++j)
      if (fixed_of[j] >= 0) zfix[j] = bound(av[fixed_of[j]], sv[fixed_of[j]]);

    MatX K = MatX::Zero(nf + kg, nf + kg);
    VecX rhs(nf + kg);
    for (int r = 0; r < nf; ++r) {
      for (int c2 = 0; c2 < nf; ++c2) K(r, c2) = p.P(freev[r], freev[c2]);
      K(r, r) += reg;
      double s = p.c[freev[r]];
      for (int j = 0; j < n; ++j)
        if (fixed_of[j] >= 0) s += p.P(freev[r], j) * zfix[j];
      rhs[r] = -s;
    }
    for (int g = 0; g < kg; ++g) {
      const int i = av[gen[g]];
      double nrm2 = 0.0;
      double rb = p.b[i];
      for (int r = 0; r < nf; ++r) {
        double a = p.A(i, freev[r]);
        K(nf + g, r) = a;
        K(r, nf + g) = a;
        nrm2 += a * a;
      }
      for (int j = 0; j < n; ++j)
        if (fixed_of[j] >= 0) rb -= p.A(i, j) * zfix[j];
      K(nf + g, nf + g) = -reg * std::max(nrm2, 1e-8);
      rhs[nf + g] = rb;
    }

    VecX red(nf + kg);
    if (nf + kg > 0) {
      Eigen::PartialPivLU<MatX> lu(K);
      red = lu.solve(rhs);
      MatX K0 = K;
      for (int r = 0; r < nf; ++r) K0(r, r) -= reg;
      for (int g = 0; g < kg; ++g) K0(nf + g, nf + g) = 0.0;
      // refine against the unregularized system; a near-degenerate set can
      // contract slowly, so iterate until the residual stops improving
      double prev = std::numeric_limits<double>::infinity();
      double rhs_scale = 1.0 + rhs.cwiseAbs().maxCoeff();
      for (int pass = 0; pass < 40; ++pass) {
        VecX resid = rhs - K0 * red;
        double rn = resid.cwiseAbs().maxCoeff();
        if (rn < 1e-15 * rhs_scale || rn > 0.9 * prev) break;
        prev = rn;
        red += lu.solve(resid);
      }
    }

    so = VecX::Zero(n + kk);
    VecX zf = zfix;
    for (int r = 0; r < nf; ++r) zf[freev[r]] = red[r];
    so.head(n) = zf;
    for (int g = 0; g < kg; ++g) so[n + gen[g]] = red[nf + g];
    // each fixing's multiplier balances the gradient on its variable
    VecX grad = p.P * zf + p.c;
    for (int g = 0; g < kg; ++g)
      grad += p.A.row(av[gen[g]]).transpose() * red[nf + g];
    for (int j = 0; j < n; ++j)
      if (fixed_of[j] >= 0) so[n + fixed_of[j]] = -grad[j];
  };
  // worst enforcement error over the set and worst constraint violation of
  // the refined point overall
  auto assess = [&](const std::vector<int>& av, const std::vector<int>& sv,
                    const VecX& so, double& enf_w, double& viol_w) {
    const int kk = int(av.size());
    VecX zz = so.head(n);
    enf_w = 0.0;
    for (int a = 0; a < kk; ++a)
      enf_w = std::max(enf_w,
                       sv[a] * (row(av[a]).dot(zz) - bound(av[a], sv[a])));
    VecX czp(m + n);
    if (m > 0) czp.head(m) = p.A * zz;
    czp.tail(n) = zz;
    viol_w = 0.0;
    for (int i = 0; i < m + n; ++i) {
      double ub = i < m ? p.b[i] : p.upper[i - m];
      if (std::isfinite(ub)) viol_w = std::max(viol_w, czp[i] - ub);
      if (i >= m && std::isfinite(p.lower[i - m]))
        viol_w = std::max(viol_w, p.lower[i - m] - czp[i]);
    }
  };

  VecX sol, z;
  // the dual-based detection is only as good as the iterate it reads: a
  // degenerate corner can leave a binding bound with zero multiplier, and a
  // stalled iterate can pin rows the optimum does not touch; repair by
  // exchange until the set is consistent, sign-correct, and nothing outside
  // it is violated
  for (int round = 0;; ++round) {
    const int k = int(act.size());
    solve_set(act, side, sol);
    z = sol.head(n);
    if (round == 8) break;

    VecX enf(k);
    double worst_eq = 0.0;
    for (int a = 0; a < k; ++a) {
      enf[a] = row(act[a]).dot(z) - bound(act[a], side[a]);
      worst_eq = std::max(worst_eq, side[a] * enf[a]);
    }
    if (worst_eq > set.eps_primal && k > 1) {
      // inconsistent set: some member has to go, and the multipliers of an
      // inconsistent solve do not say which; branch on each row carrying
      // the error and keep the first branch that stands on its own
      std::vector<int> carriers;
      for (int a = 0; a < k; ++a)
        if (std::abs(enf[a]) > 1e-3 * worst_eq) carriers.push_back(a);
      std::sort(carriers.begin(), carriers.end(), [&](int a, int b) {
        return std::abs(sol[n + a]) < std::abs(sol[n + b]);
      });
      bool adopted = false;
      for (int c : carriers) {
        std::vector<int> av = act, sv = side;
        av.erase(av.begin() + c);
        sv.erase(sv.begin() + c);
        VecX so;
        solve_set(av, sv, so);
        double e2 = 0.0, v2 = 0.0;
        assess(av, sv, so, e2, v2);
        if (e2 <= set.eps_primal && v2 <= set.eps_primal) {
          in_set[act[c]] = 0;
          act = std::move(av);
          side = std::move(sv);
          adopted = true;
          break;
        }
      }
      if (!adopted) {
        int weakest = carriers.empty() ? 0 : carriers.front();
        in_set[act[weakest]] = 0;
        act.erase(act.begin() + weakest);
        side.erase(side.begin() + weakest);
      }
      continue;
    }

    int drop = -1;
    double most_neg = -1e-9;
    for (int a = 0; a < k; ++a) {
      double lam = side[a] * sol[n + a];
      if (lam < most_neg) {
        most_neg = lam;
        drop = a;
      }
    }
    if (drop >= 0) {
      // a wrong-signed general row often means a fixed variable is starving
      // it of coefficients; releasing the fixing and keeping the row is the
      // usual active-set exchange, so try that before discarding the row
      bool adopted = false;
      if (act[drop] < m) {
        const int i = act[drop];
        std::vector<std::pair<double, int>> cand;
        for (int a = 0; a < k; ++a)
          if (act[a] >= m && std::abs(p.A(i, act[a] - m)) > 0.0)
            cand.push_back({std::abs(p.A(i, act[a] - m)), a});
        std::sort(cand.rbegin(), cand.rend());
        for (const auto& [coef, a] : cand) {
          std::vector<int> av = act, sv = side;
          av.erase(av.begin() + a);
          sv.erase(sv.begin() + a);
          VecX so;
          solve_set(av, sv, so);
          double e2 = 0.0, v2 = 0.0;
          assess(av, sv, so, e2, v2);
          bool signs = true;
          for (size_t t = 0; t < av.size(); ++t)
            if (sv[t] * so[n + t] < -1e-9) {
              signs = false;
              break;
            }
          if (e2 <= set.eps_primal && v2 <= set.eps_primal && signs) {
            in_set[act[a]] = 0;
            act = std::move(av);
            side = std::move(sv);
            adopted = true;
            break;
          }
        }
      }
      if (!adopted) {
        in_set[act[drop]] = 0;
        act.erase(act.begin() + drop);
        side.erase(side.begin() + drop);
      }
      continue;
    }

    VecX czp(m + n);
    if (m > 0) czp.head(m) = p.A * z;
    czp.tail(n) = z;
    int worst = -1, wside = 0;
    double wviol = set.eps_primal;
    for (int i = 0; i < m + n; ++i) {
      if (in_set[i]) continue;
      double ub = i < m ? p.b[i] : p.upper[i - m];
      if (std::isfinite(ub) && czp[i] - ub > wviol) {
        wviol = czp[i] - ub;
        worst = i;
        wside = +1;
      }
      if (i >= m && std::isfinite(p.lower[i - m]) &&
          p.lower[i - m] - czp[i] > wviol) {
        wviol = p.lower[i - m] - czp[i];
        worst = i;
        wside = -1;
      }
    }
    if (worst < 0) break;
    if (int(act.size()) >= m + n) return false;
    act.push_back(worst);
    side.push_back(wside);
    in_set[worst] = 1;
  }
  const int k = int(act.size());
  VecX y = VecX::Zero(m);
  VecX y_box = VecX::Zero(n);
  for (int a = 0; a < k; ++a) {
    double lam = sol[n + a];
    if (act[a] < m)
      y[act[a]] = lam;
    else
      y_box[act[a] - m] = lam;
  }
  // dual signs must match the side each constraint binds on
  for (int i = 0; i < m; ++i)
    if (y[i] < -1e-9) return false;
  for (int a = 0; a < k; ++a)
    if (act[a] >= m && side[a] * sol[n + a] < -1e-9) return false;

  auto r = unscaled_residuals(p, z, y, y_box);
  if (r.prim > set.eps_primal || r.dual_rel > set.eps_dual) return false;

  out.z = z;
  out.y = y;
  out.y_box = y_box;
  out.primal_residual = r.prim;
  out.dual_residual = r.dual;
  out.status = QpStatus::kOptimal;
  out.polished = true;
  return true;
}

}  // namespace

QpSolution QpSolver::solve(const QpProblem& p, const QpSettings& set) {
  validate(p);
  const int n = int(p.c.size());
  const int m = int(p.b.size());
  const int mt = m + n;

  Scaled sc = build_scaled(p);

  double rho = kRhoInit;
  MatX K = sc.P + kSigma * MatX::Identity(n, n) +
           rho * sc.C.transpose() * sc.C;
  Eigen::LLT<MatX> llt(K);

  VecX x = VecX::Zero(n);
  VecX zr = VecX::Zero(mt);  // row-space iterate
  VecX y = VecX::Zero(mt);
  VecX y_prev_cert = y;

  QpSolution out;
  out.status = QpStatus::kMaxIterations;

  int last_polish_attempt = -1000;
  int iter = 0;
  for (iter = 1; iter <= set.max_iterations; ++iter) {
    VecX rhs = kSigma * x - sc.c + sc.C.transpose() * (rho * zr - y);
    VecX xt = llt.solve(rhs);
    VecX ct = sc.C * xt;
    x = kAlpha * xt + (1.0 - kAlpha) * x;
    VecX zcand = kAlpha * ct + (1.0 - kAlpha) * zr + y / rho;
    VecX znew = zcand.cwiseMax(sc.l).cwiseMin(sc.u);
    y += rho * (kAlpha * ct + (1.0 - kAlpha) * zr - znew);
    zr = znew;

    if (iter % kCheckEvery != 0 && iter != set.max_iterations) continue;

    // unscale
    VecX z_u = sc.d.cwiseProduct(x);
    VecX y_all = sc.e.cwiseProduct(y);
    VecX y_ineq = y_all.head(m);
    VecX y_box = y_all.tail(n);
    auto r = unscaled_residuals(p, z_u, y_ineq, y_box);

    bool prim_ok = r.prim <= set.eps_primal * (1.0 + inf_norm(p.b)) &&
                   r.prim_rel <= set.eps_primal;
    bool dual_ok = r.dual_rel <= set.eps_dual;
    // protect against tiny scales where relative tests are too lax
    prim_ok = prim_ok || r.prim <= set.eps_primal;
    dual_ok = dual_ok || r.dual <= set.eps_dual;
    bool comp_ok = r.comp_rel <= set.eps_dual;

    if (prim_ok && dual_ok && comp_ok) {
      out.z = z_u;
      out.y = y_ineq.cwiseMax(0.0);
      out.y_box = y_box;
      out.primal_residual = r.prim;
      out.dual_residual = r.dual;
      out.status = QpStatus::kOptimal;
      if (set.polish) try_polish(p, sc, x, y, set, out);
      out.iterations = iter;
      return out;
    }

    // primal infeasibility certificate from the dual update direction
    {
      VecX dy = y - y_prev_cert;
      y_prev_cert = y;
      VecX dy_u = sc.e.cwiseProduct(dy);
      double dn = inf_norm(dy_u);
      if (dn > 1e-14) {
        // unscaled combined rows: [A; I]
        VecX atv = dy_u.tail(n);
        if (m > 0) atv += p.A.transpose() * dy_u.head(m);
        double support = 0.0;
        bool valid = inf_norm(atv) <= set.eps_infeasible * dn * 1e2;
        if (valid) {
          for (int i = 0; i < mt; ++i) {
            double v = dy_u[i];
            double ub = i < m ? p.b[i] : p.upper[i - m];
            double lb = i < m ? -kInf : p.lower[i - m];
            if (v > 0) {
              if (!std::isfinite(ub)) {
                if (v > 1e-10 * dn) {
                  valid = false;
                  break;
                }
              } else {
                support += ub * v;
              }
            } else if (v < 0) {
              if (!std::isfinite(lb)) {
                if (v < -1e-10 * dn) {
                  valid = false;
                  break;
                }
              } else {
                support += lb * v;
              }
            }
          }
        }
        if (valid && support < -set.eps_infeasible * std::max(dn, 1.0)) {
          out.status = QpStatus::kPrimalInfeasible;
          out.z = z_u;
          out.y = y_ineq;
          out.y_box = y_box;
          out.primal_residual = r.prim;
          out.dual_residual = r.dual;
          out.iterations = iter;
          return out;
        }
      }
    }

    // polish attempt can terminate early once the active set settles; the
    // gate is loose because acceptance re-verifies full residuals anyway
    if (set.polish && iter - last_polish_attempt >= 100 &&
        r.prim <= 1e-2 * (1.0 + inf_norm(p.b)) && r.dual_rel <= 1e-2) {
      last_polish_attempt = iter;
      if (try_polish(p, sc, x, y, set, out)) {
        out.iterations = iter;
        return out;
      }
    }

    // adaptive step size
    if (iter % 100 == 0) {
      double pr = std::max(r.prim_rel, 1e-14);
      double dr = std::max(r.dual_rel, 1e-14);
      double ratio = std::sqrt(pr / dr);
      if (ratio > 5.0 || ratio < 0.2) {
        rho = std::min(kRhoMax, std::max(kRhoMin, rho * ratio));
        K = sc.P + kSigma * MatX::Identity(n, n) +
            rho * sc.C.transpose() * sc.C;
        llt.compute(K);
      }
    }

    if (iter == set.max_iterations) {
      out.z = z_u;
      out.y = y_ineq.cwiseMax(0.0);
      out.y_box = y_box;
      out.primal_residual = r.prim;
      out.dual_residual = r.dual;
    }
  }

  out.iterations = set.max_iterations;
  return out;
}

QpSolution solve_qp(const QpProblem& p, const QpSettings& s) {
  QpSolver solver;
  return solver.solve(p, s);
}

SlackProjection min_slack_projection(const MatX& A, const VecX& b,
                                     const VecX& lower, const VecX& upper,
                                     const VecX& weights, int p,
                                     const QpSettings& set) {
  const int n = int(A.cols());
  const int m = int(A.rows());
  if (b.size() != m) throw std::invalid_argument("slack: A rows must match b");
  if (weights.size() != m)
    throw std::invalid_argument("slack: one weight per row required");
  if (m > 0 && weights.minCoeff() <= 0.0)
    throw std::invalid_argument("slack: weights must be positive");
  if (p != 1 && p != 2)
    throw std::invalid_argument("slack: norm order must be 1 or 2");

  SlackProjection out;
  if (m == 0) {
    out.s.resize(0);
    out.z = VecX::Zero(n).cwiseMax(lower).cwiseMin(upper);
    out.status = QpStatus::kOptimal;
    return out;
  }

  QpProblem joint;
  joint.P = MatX::Zero(n + m, n + m);
  joint.c = VecX::Zero(n + m);
  if (p == 2)
    joint.P.bottomRightCorner(m, m) = weights.asDiagonal();
  else
    joint.c.tail(m) = weights;
  joint.A.resize(m, n + m);
  joint.A.leftCols(n) = A;
  joint.A.rightCols(m) = -MatX::Identity(m, m);
  joint.b = b;
  joint.lower.resize(n + m);
  joint.upper.resize(n + m);
  joint.lower.head(n) = lower;
  joint.upper.head(n) = upper;
  joint.lower.tail(m).setZero();
  joint.upper.tail(m).setConstant(kInf);

  auto sol = solve_qp(joint, set);
  out.status = sol.status;
  if (sol.z.size() == n + m) {
    out.z = sol.z.head(n).cwiseMax(lower).cwiseMin(upper);
    // the hinge violations of the clamped witness are the exact slack
    // optimum conditioned on it, so they both certify the relaxation
    // (A z <= b + s holds identically) and shed solver noise in s
    out.s = (A * out.z - b).cwiseMax(0.0);
  }
  return out;
}

void dump_problem(const QpProblem& p, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot open qp dump path: " + path);
  const int n = int(p.c.size());
  const int m = int(p.b.size());
  f << "qp " << n << " " << m << "\n";
  auto emit = [&f](const char* tag, const double* data, int count) {
    f << tag;
    char buf[32];
    for (int i = 0; i < count; ++i) {
      std::snprintf(buf, sizeof buf, " %.17g", data[i]);
      f << buf;
    }
    f << "\n";
  };
  MatX Pr = p.P;  // row-major emission
  Pr.transposeInPlace();
  emit("P", Pr.data(), n * n);
  emit("c", p.c.data(), n);
  if (m > 0) {
    MatX Ar = p.A;
    Ar.transposeInPlace();
    emit("A", Ar.data(), m * n);
    emit("b", p.b.data(), m);
  }
  emit("lower", p.lower.data(), n);
  emit("upper", p.upper.data(), n);
}

}  // namespace dexsafe
