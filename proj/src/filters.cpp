#include "dexsafe/filters.hpp"

#include <sstream>

namespace dexsafe {

namespace {

VecX clamp_box(const VecX& v, const VecX& lo, const VecX& hi) {
  return v.cwiseMax(lo).cwiseMin(hi);
}

// Per-active-row slack weights: config entries address pairs, the rows
// pick their own pair's entry. Empty config falls back to the weights the
// constraint assembly copied from the pairs.
VecX resolve_row_weights(const ConstraintSet& cs, const RelaxationConfig& cfg) {
  const int k = cs.active_count();
  VecX w(k);
  if (cfg.Qs.size() == 0) {
    if (cs.weights.size() != k)
      throw std::invalid_argument("filter: constraint set carries no weights");
    w = cs.weights;
  } else {
    if (cfg.Qs.size() != cs.total_pairs())
      throw std::invalid_argument("filter: Qs must have one entry per pair");
    for (int r = 0; r < k; ++r) w[r] = cfg.Qs[cs.pair_ids[r]];
  }
  if (k > 0 && w.minCoeff() <= 0.0)
    throw std::invalid_argument("filter: slack weights must be positive");
  return w;
}

void validate_inputs(const ConstraintSet& cs, const VecX& u_ref,
                     const RelaxationConfig& cfg) {
  const int n = int(cs.box_lower.size());
  if (u_ref.size() != n || cs.box_upper.size() != n)
    throw std::invalid_argument("filter: reference does not match the box");
  if (cs.active_count() > 0 && cs.rows.cols() != n)
    throw std::invalid_argument("filter: row width does not match the box");
  if (cfg.Q.size() != 0) {
    if (cfg.Q.size() != n)
      throw std::invalid_argument("filter: Q must have one entry per dof");
    if (cfg.Q.minCoeff() <= 0.0)
      throw std::invalid_argument("filter: Q entries must be positive");
  }
  if (cfg.Qs.size() != 0 && cfg.Qs.minCoeff() <= 0.0)
    throw std::invalid_argument("filter: Qs entries must be positive");
  if (cfg.p != 1 && cfg.p != 2)
    throw std::invalid_argument("filter: slack norm order must be 1 or 2");
  // weight arity checked even for methods that ignore the slack cost so a
  // bad config fails loudly regardless of the method it reaches
  resolve_row_weights(cs, cfg);
}

VecX tracking_weights(const RelaxationConfig& cfg, int n) {
  return cfg.Q.size() ? cfg.Q : VecX::Ones(n);
}

void scatter_slack(const ConstraintSet& cs, const VecX& row_s, VecX& pair_s) {
  pair_s = VecX::Zero(cs.total_pairs());
  for (int r = 0; r < cs.active_count(); ++r)
    pair_s[cs.pair_ids[r]] = std::max(row_s[r], 0.0);
}

void fill_stats(FilterResult& out, const QpSolution& sol) {
  out.stats.iterations = sol.iterations;
  out.stats.primal_residual = sol.primal_residual;
  out.stats.dual_residual = sol.dual_residual;
}

// One definition of step feasibility for every method: project onto the
// smallest uniformly weighted slack and test it against a fixed floor.
bool probe_feasible(const ConstraintSet& cs, const QpSettings& qp,
                    SlackProjection* keep = nullptr) {
  auto sp = min_slack_projection(cs.rows, cs.offsets, cs.box_lower,
                                 cs.box_upper, VecX::Ones(cs.active_count()),
                                 2, qp);
  bool ok = sp.s.size() == 0 || sp.s.cwiseAbs().maxCoeff() <= 1e-8;
  if (keep) *keep = std::move(sp);
  return ok;
}

FilterResult passthrough(const ConstraintSet& cs, const VecX& u_ref) {
  FilterResult out;
  out.u = clamp_box(u_ref, cs.box_lower, cs.box_upper);
  out.s = VecX::Zero(cs.total_pairs());
  out.feasible = true;
  return out;
}

}  // namespace

FilterMethod parse_method(const std::string& name) {
  if (name == "ssa") return FilterMethod::kSsa;
  if (name == "rssa") return FilterMethod::kRssa;
  if (name == "pssa") return FilterMethod::kPssa;
  throw ConfigError("unknown filter method: " + name);
}

const char* method_name(FilterMethod m) {
  switch (m) {
    case FilterMethod::kSsa: return "ssa";
    case FilterMethod::kRssa: return "rssa";
    case FilterMethod::kPssa: return "pssa";
  }
  return "?";
}

VecX nominal_control(const RobotModel& m, const JointState& q,
                     const GoalMap& goals, const TrackingGains& gains) {
  auto tf = frame_transforms(m, q);
  const int k = int(goals.size());
  MatX J(3 * k, m.dofs);
  VecX err(3 * k);
  for (int i = 0; i < k; ++i) {
    int si = m.sphere_index(goals[i].first);
    if (si < 0)
      throw ConfigError("tracked point is not a model sphere: " +
                        goals[i].first);
    const SphereSpec& sp = m.spheres[si];
    Vec3 cur = tf[sp.frame].p + tf[sp.frame].R * sp.offset;
    J.middleRows(3 * i, 3) = point_jacobian(m, tf, si);
    err.segment(3 * i, 3) = goals[i].second - cur;
  }
  MatX H = J.transpose() * J +
           gains.damping * gains.damping * MatX::Identity(m.dofs, m.dofs);
  VecX u;
  if (gains.damping > 0.0) {
    u = H.llt().solve(J.transpose() * (gains.kp * err));
  } else {
    // singular H is legal without damping; least-squares handles it
    u = H.completeOrthogonalDecomposition().solve(J.transpose() *
                                                  (gains.kp * err));
  }
  return clamp_box(u, m.vel_lower, m.vel_upper);
}

FilterResult ssa_filter(const ConstraintSet& cs, const VecX& u_ref,
                        const RelaxationConfig& cfg) {
  validate_inputs(cs, u_ref, cfg);
  const int n = int(cs.box_lower.size());
  const int k = cs.active_count();
  FilterResult out = passthrough(cs, u_ref);
  out.method = FilterMethod::kSsa;
  if (k == 0) return out;

  SlackProjection probe;
  out.feasible = probe_feasible(cs, cfg.qp, &probe);

  if (out.feasible) {
    VecX Q = tracking_weights(cfg, n);
    QpProblem p;
    p.P = MatX(2.0 * Q.asDiagonal());
    p.c = -2.0 * Q.cwiseProduct(u_ref);
    p.A = cs.rows;
    p.b = cs.offsets;
    p.lower = cs.box_lower;
    p.upper = cs.box_upper;
    auto sol = solve_qp(p, cfg.qp);
    fill_stats(out, sol);
    if (sol.status == QpStatus::kOptimal) {
      out.u = clamp_box(sol.z, cs.box_lower, cs.box_upper);
      return out;
    }
    // marginally feasible sets can defeat the tracking stage; fall back to
    // the pass-through branch below, keeping the probe's verdict
  }

  out.u = clamp_box(u_ref, cs.box_lower, cs.box_upper);
  VecX viol = (cs.rows * out.u - cs.offsets).cwiseMax(0.0);
  scatter_slack(cs, viol, out.s);
  return out;
}

FilterResult rssa_filter(const ConstraintSet& cs, const VecX& u_ref,
                         const RelaxationConfig& cfg) {
  validate_inputs(cs, u_ref, cfg);
  const int n = int(cs.box_lower.size());
  const int k = cs.active_count();
  FilterResult out = passthrough(cs, u_ref);
  out.method = FilterMethod::kRssa;
  if (k == 0) return out;

  out.feasible = probe_feasible(cs, cfg.qp);

  VecX Q = tracking_weights(cfg, n);
  VecX w = resolve_row_weights(cs, cfg);

  QpProblem p;
  p.P = MatX::Zero(n + k, n + k);
  p.P.topLeftCorner(n, n) = MatX(2.0 * Q.asDiagonal());
  p.c = VecX::Zero(n + k);
  p.c.head(n) = -2.0 * Q.cwiseProduct(u_ref);
  if (cfg.p == 2)
    p.P.bottomRightCorner(k, k) = MatX(w.asDiagonal());
  else
    p.c.tail(k) = w;
  p.A.resize(k, n + k);
  p.A.leftCols(n) = cs.rows;
  p.A.rightCols(k) = -MatX::Identity(k, k);
  p.b = cs.offsets;
  p.lower.resize(n + k);
  p.upper.resize(n + k);
  p.lower.head(n) = cs.box_lower;
  p.upper.head(n) = cs.box_upper;
  p.lower.tail(k).setZero();
  p.upper.tail(k).setConstant(kInf);

  auto sol = solve_qp(p, cfg.qp);
  fill_stats(out, sol);
  if (sol.status == QpStatus::kPrimalInfeasible)
    throw SolverFault("relaxed stage reported an always-feasible program "
                      "infeasible");
  out.u = clamp_box(sol.z.head(n), cs.box_lower, cs.box_upper);
  // at the optimum s equals the hinge violation of u exactly, so the
  // violation is the de-noised slack to report
  VecX spent = (cs.rows * out.u - cs.offsets).cwiseMax(0.0);
  scatter_slack(cs, spent, out.s);
  return out;
}

FilterResult pssa_filter(const ConstraintSet& cs, const VecX& u_ref,
                         const RelaxationConfig& cfg) {
  validate_inputs(cs, u_ref, cfg);
  const int n = int(cs.box_lower.size());
  const int k = cs.active_count();
  FilterResult out = passthrough(cs, u_ref);
  out.method = FilterMethod::kPssa;
  if (k == 0) return out;

  VecX w = resolve_row_weights(cs, cfg);
  auto phase1 = min_slack_projection(cs.rows, cs.offsets, cs.box_lower,
                                     cs.box_upper, w, cfg.p, cfg.qp);
  out.feasible = phase1.s.cwiseAbs().maxCoeff() <= 1e-8;
  scatter_slack(cs, phase1.s, out.s);

  VecX Q = tracking_weights(cfg, n);
  QpProblem p;
  p.P = MatX(2.0 * Q.asDiagonal());
  p.c = -2.0 * Q.cwiseProduct(u_ref);
  p.A = cs.rows;
  // the slack vector alone is only tolerance-accurate and can undercut what
  // the projection point itself needs; taking the elementwise max keeps that
  // point a strict interior witness, so the margin guarantees feasibility
  VecX witness = clamp_box(phase1.z, cs.box_lower, cs.box_upper);
  VecX certified = phase1.s.cwiseMax(cs.rows * witness - cs.offsets);
  p.b = cs.offsets + certified + VecX::Constant(k, 1e-9);
  p.lower = cs.box_lower;
  p.upper = cs.box_upper;
  auto sol = solve_qp(p, cfg.qp);
  fill_stats(out, sol);
  if (sol.status != QpStatus::kOptimal) {
    std::ostringstream msg;
    msg << "tracking inside a certified relaxation failed: status "
        << int(sol.status) << ", iterations " << sol.iterations
        << ", primal residual " << sol.primal_residual << ", dual residual "
        << sol.dual_residual;
    throw PhaseConsistencyFault(msg.str());
  }
  out.u = clamp_box(sol.z, cs.box_lower, cs.box_upper);
  return out;
}

FilterResult apply_filter(FilterMethod m, const ConstraintSet& cs,
                          const VecX& u_ref, const RelaxationConfig& cfg) {
  switch (m) {
    case FilterMethod::kSsa: return ssa_filter(cs, u_ref, cfg);
    case FilterMethod::kRssa: return rssa_filter(cs, u_ref, cfg);
    case FilterMethod::kPssa: return pssa_filter(cs, u_ref, cfg);
  }
  throw ConfigError("unknown filter method id");
}

}  // namespace dexsafe
