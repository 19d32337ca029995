#include "lqgames/solver.hpp"

#include <Eigen/QR>
#include <sstream>
#include <stdexcept>

namespace lqgames {

namespace {

// Affine maps over the composite vector [z; a; eps] describing one stage from
// player i's viewpoint. z = [vhat; f; 1], a is the player's own action, and
// eps = [V - vhat; vhat_others - mean; w_next] collects the zero-mean parts.
struct StageMaps {
  MatrixXd sz, sa, se;  // [V; a_stack]
  MatrixXd tz, ta, te;  // next z (only when a continuation exists)
  MatrixXd cov_eps;
  bool with_transition = false;
};

struct Layout {
  Dims d;
  int z = 0, na = 0, ne = 0, nv = 0, n = 0;
  int e0() const { return 0; }
  int e_other(int i, int l) const { return nv + d.other_rank(i, l) * nv; }
  int e_w() const { return n * nv; }
  int zf() const { return d.ext_f(); }
  int zc() const { return d.ext_const(); }
};

Layout make_layout(const Dims& d) {
  Layout l;
  l.d = d;
  l.z = d.n_ext();
  l.na = d.dim_a;
  l.nv = d.dim_v;
  l.n = d.n_players;
  l.ne = l.n * l.nv + l.nv;
  return l;
}

// centered stacked actions a_all - m_all as maps over [z; a; eps], with the
// other players following their stage rules
struct CenteredActions {
  MatrixXd az, aa, ae;  // (N*dim_a) rows
};

CenteredActions centered_actions(const GameSpec& spec, const PublicRecursion& rec, int i, int t,
                                 const std::vector<AffineStrategy>& coeffs, const Layout& lay) {
  const Dims& d = lay.d;
  CenteredActions ca;
  ca.az = MatrixXd::Zero(d.n_actions(), lay.z);
  ca.aa = MatrixXd::Zero(d.n_actions(), lay.na);
  ca.ae = MatrixXd::Zero(d.n_actions(), lay.ne);
  const MatrixXd& cross = rec.of(i).cross_E[t];
  for (int l = 0; l < lay.n; ++l) {
    const int row = d.ab(l);
    if (l == i) {
      // own action minus the public interpretation of it
      ca.aa.block(row, 0, lay.na, lay.na).setIdentity();
      ca.az.block(row, lay.zf(), lay.na, d.f_stack()) = -coeffs[i].m_f;
      ca.az.block(row, lay.zc(), lay.na, 1) = -coeffs[i].m_const;
    } else {
      const MatrixXd& ll = coeffs[l].l_mat;
      ca.az.block(row, 0, lay.na, lay.nv) =
          ll * cross.middleRows(d.other_rank(i, l) * lay.nv, lay.nv);
      ca.az.block(row, lay.zf() + d.fb_slot(i, l), lay.na, lay.nv) += ll;
      ca.ae.block(row, lay.e_other(i, l), lay.na, lay.nv) = ll;
    }
  }
  return ca;
}

// rows of the centered action stack belonging to the others of player j
MatrixXd select_others_rows(const Dims& d, int j, const MatrixXd& m) {
  MatrixXd out((d.n_players - 1) * d.dim_a, m.cols());
  int r = 0;
  for (int l = 0; l < d.n_players; ++l) {
    if (l == j) continue;
    out.middleRows(r, d.dim_a) = m.middleRows(d.ab(l), d.dim_a);
    r += d.dim_a;
  }
  return out;
}

StageMaps make_stage_maps(const GameSpec& spec, const PublicRecursion& rec, int i, int t,
                          const std::vector<AffineStrategy>& coeffs, bool with_transition) {
  const Dims d = spec.dims();
  const Layout lay = make_layout(d);
  const int rd = spec.reward_dim();
  StageMaps maps;
  maps.with_transition = with_transition;

  maps.cov_eps = MatrixXd::Zero(lay.ne, lay.ne);
  maps.cov_eps.topLeftCorner(lay.n * lay.nv, lay.n * lay.nv) = rec.of(i).joint_cov[t];
  maps.cov_eps.bottomRightCorner(lay.nv, lay.nv) = spec.noise_cov[i];

  // [V; a_stack]
  maps.sz = MatrixXd::Zero(rd, lay.z);
  maps.sa = MatrixXd::Zero(rd, lay.na);
  maps.se = MatrixXd::Zero(rd, lay.ne);
  maps.sz.block(0, 0, lay.nv, lay.nv).setIdentity();
  maps.se.block(0, lay.e0(), lay.nv, lay.nv).setIdentity();
  const MatrixXd& cross = rec.of(i).cross_E[t];
  for (int l = 0; l < lay.n; ++l) {
    const int row = lay.nv + d.ab(l);
    if (l == i) {
      maps.sa.block(row, 0, lay.na, lay.na).setIdentity();
    } else {
      const AffineStrategy& st = coeffs[l];
      maps.sz.block(row, 0, lay.na, lay.nv) =
          st.l_mat * cross.middleRows(d.other_rank(i, l) * lay.nv, lay.nv);
      maps.sz.block(row, lay.zf(), lay.na, d.f_stack()) = st.m_f;
      maps.sz.block(row, lay.zf() + d.fb_slot(i, l), lay.na, lay.nv) += st.l_mat;
      maps.sz.block(row, lay.zc(), lay.na, 1) = st.m_const;
      maps.se.block(row, lay.e_other(i, l), lay.na, lay.nv) = st.l_mat;
    }
  }

  if (!with_transition) return maps;

  maps.tz = MatrixXd::Zero(lay.z, lay.z);
  maps.ta = MatrixXd::Zero(lay.z, lay.na);
  maps.te = MatrixXd::Zero(lay.z, lay.ne);
  maps.tz(lay.zc(), lay.zc()) = 1.0;

  // own estimate: a martingale step loaded on the conditional residuals
  const MatrixXd& jx_n = rec.of(i).jx[t + 1];
  const MatrixXd& ja_n = rec.of(i).ja[t + 1];
  maps.tz.block(0, 0, lay.nv, lay.nv).setIdentity();
  maps.te.block(0, lay.e0(), lay.nv, lay.nv) = jx_n;
  maps.te.block(0, lay.e_w(), lay.nv, lay.nv) = jx_n;
  for (int l = 0; l < lay.n; ++l) {
    if (l == i) continue;
    maps.te.block(0, lay.e_other(i, l), lay.nv, lay.nv) =
        ja_n.middleCols(d.other_rank(i, l) * lay.na, lay.na) * coeffs[l].l_mat;
  }

  // public offsets: every player's block advances by its own update map
  const CenteredActions ca = centered_actions(spec, rec, i, t, coeffs, lay);

  // delta^l = ja_l (centered actions of others(l) - blockdiag(L_others(l)) f^l)
  std::vector<MatrixXd> dz(lay.n), da(lay.n), de(lay.n);
  for (int l = 0; l < lay.n; ++l) {
    MatrixXd oz = select_others_rows(d, l, ca.az);
    const MatrixXd oa = select_others_rows(d, l, ca.aa);
    const MatrixXd oe = select_others_rows(d, l, ca.ae);
    int r = 0;
    for (int j = 0; j < lay.n; ++j) {
      if (j == l) continue;
      oz.block(r, lay.zf() + d.fb_slot(l, j), lay.na, lay.nv) -= coeffs[j].l_mat;
      r += lay.na;
    }
    const MatrixXd& ja_l = rec.of(l).ja[t + 1];
    dz[l] = ja_l * oz;
    da[l] = ja_l * oa;
    de[l] = ja_l * oe;
  }

  for (int j = 0; j < lay.n; ++j) {
    const int row = lay.zf() + d.fb(j);
    const PlayerRecursion& pj = rec.of(j);
    maps.tz.block(row, lay.zf() + d.fb(j), d.f_own(), d.f_own()) = pj.f_lin[t + 1];
    const MatrixXd oz = select_others_rows(d, j, ca.az);
    const MatrixXd oa = select_others_rows(d, j, ca.aa);
    const MatrixXd oe = select_others_rows(d, j, ca.ae);
    maps.tz.middleRows(row, d.f_own()) += pj.f_act[t + 1] * oz;
    maps.ta.middleRows(row, d.f_own()) += pj.f_act[t + 1] * oa;
    maps.te.middleRows(row, d.f_own()) += pj.f_act[t + 1] * oe;
    int r = 0;
    for (int l = 0; l < lay.n; ++l) {
      if (l == j) continue;
      maps.tz.middleRows(row + r, lay.nv) += dz[l];
      maps.ta.middleRows(row + r, lay.nv) += da[l];
      maps.te.middleRows(row + r, lay.nv) += de[l];
      r += lay.nv;
    }
  }
  return maps;
}

// full objective quadratic over [z; a] plus the covariance trace constant
struct StageObjective {
  MatrixXd q;  // (z + na)^2, symmetric
  double trace_const = 0.0;
};

StageObjective stage_objective(const GameSpec& spec, const StageMaps& maps, int player,
                               const MatrixXd* value_next) {
  const MatrixXd& b = spec.reward_mat[player];
  const Eigen::Index z = maps.sz.cols();
  const Eigen::Index na = maps.sa.cols();
  MatrixXd szsa(maps.sz.rows(), z + na);
  szsa << maps.sz, maps.sa;
  StageObjective obj;
  obj.q = szsa.transpose() * b * szsa;
  obj.trace_const = (b * maps.se * maps.cov_eps * maps.se.transpose()).trace();
  if (maps.with_transition && value_next != nullptr) {
    MatrixXd tzta(maps.tz.rows(), z + na);
    tzta << maps.tz, maps.ta;
    obj.q += tzta.transpose() * (*value_next) * tzta;
    obj.trace_const += ((*value_next) * maps.te * maps.cov_eps * maps.te.transpose()).trace();
  }
  obj.q = symmetrize(obj.q);
  return obj;
}

MatrixXd coeff_matrix(const AffineStrategy& st) {
  MatrixXd lam(st.l_mat.rows(), st.l_mat.cols() + st.m_f.cols() + 1);
  lam << st.l_mat, st.m_f, st.m_const;
  return lam;
}

AffineStrategy coeff_from_matrix(const Dims& d, const MatrixXd& lam) {
  AffineStrategy st;
  st.l_mat = lam.leftCols(d.dim_v);
  st.m_f = lam.middleCols(d.dim_v, d.f_stack());
  st.m_const = lam.col(lam.cols() - 1);
  return st;
}

// first-order residual of player i: Qaa * Lambda_i + Qaz, flattened
VectorXd stage_residual(const GameSpec& spec, const PublicRecursion& rec, int i, int t,
                        const std::vector<AffineStrategy>& coeffs, const MatrixXd* value_next,
                        MatrixXd* qaa_out) {
  const Dims d = spec.dims();
  const int z = d.n_ext();
  const int na = d.dim_a;
  const StageMaps maps = make_stage_maps(spec, rec, i, t, coeffs, value_next != nullptr);
  const StageObjective obj = stage_objective(spec, maps, i, value_next);
  const MatrixXd qaa = obj.q.block(z, z, na, na);
  const MatrixXd qaz = obj.q.block(z, 0, na, z);
  if (qaa_out != nullptr) *qaa_out = qaa;
  const MatrixXd resid = qaa * coeff_matrix(coeffs[i]) + qaz;
  return Eigen::Map<const VectorXd>(resid.data(), resid.size());
}

struct StageSolution {
  std::vector<AffineStrategy> coeffs;
  std::vector<QuadraticValue> values;
};

void throw_ill_posed(int player, int stage, double lam_max) {
  std::ostringstream os;
  os << "ill-posed stage game: player " << player << ", stage " << stage
     << " (largest action Hessian eigenvalue " << lam_max << ")";
  throw std::runtime_error(os.str());
}

// joint stage solve: every player's first-order condition, linear in the
// stacked stage coefficients, solved as one system
StageSolution solve_stage(const GameSpec& spec, const PublicRecursion& rec, int t,
                          const std::vector<MatrixXd>* values_next) {
  const Dims d = spec.dims();
  const int n = d.n_players;
  const int z = d.n_ext();
  const int na = d.dim_a;
  const int blk = na * z;
  const int dim = n * blk;

  auto unpack = [&](const VectorXd& theta) {
    std::vector<AffineStrategy> coeffs(n);
    for (int j = 0; j < n; ++j) {
      const MatrixXd lam = Eigen::Map<const MatrixXd>(theta.data() + j * blk, na, z);
      coeffs[j] = coeff_from_matrix(d, lam);
    }
    return coeffs;
  };

  auto full_residual = [&](const VectorXd& theta, std::vector<MatrixXd>* qaa) {
    const std::vector<AffineStrategy> coeffs = unpack(theta);
    VectorXd out(dim);
    for (int i = 0; i < n; ++i) {
      const MatrixXd* vn = values_next ? &(*values_next)[i] : nullptr;
      out.segment(i * blk, blk) =
          stage_residual(spec, rec, i, t, coeffs, vn, qaa ? &(*qaa)[i] : nullptr);
    }
    return out;
  };

  std::vector<MatrixXd> qaa(n);
  const VectorXd r0 = full_residual(VectorXd::Zero(dim), &qaa);
  MatrixXd lin(dim, dim);
  for (int k = 0; k < dim; ++k) {
    VectorXd probe = VectorXd::Zero(dim);
    probe(k) = 1.0;
    lin.col(k) = full_residual(probe, nullptr) - r0;
  }

  // classify each player's stage problem
  std::vector<bool> flat(n, false);
  for (int i = 0; i < n; ++i) {
    double scale = std::max(1.0, spec.reward_mat[i].cwiseAbs().maxCoeff());
    if (values_next) scale = std::max(scale, (*values_next)[i].cwiseAbs().maxCoeff());
    const double eps_flat = 1e-13 * scale;
    const double h_norm = qaa[i].cwiseAbs().maxCoeff();
    const double row_norm = std::max(lin.middleRows(i * blk, blk).cwiseAbs().maxCoeff(),
                                     r0.segment(i * blk, blk).cwiseAbs().maxCoeff());
    if (h_norm <= eps_flat && row_norm <= eps_flat) {
      flat[i] = true;  // objective does not involve the action; play zero
      continue;
    }
    const double lam_max = max_eigenvalue(symmetrize(qaa[i]));
    if (!(lam_max < -1e-10 * std::max(h_norm, 1e-100))) throw_ill_posed(i, t, lam_max);
  }

  MatrixXd sys = lin;
  VectorXd rhs = -r0;
  for (int i = 0; i < n; ++i) {
    if (!flat[i]) continue;
    sys.middleRows(i * blk, blk).setZero();
    for (int k = 0; k < blk; ++k) sys(i * blk + k, i * blk + k) = 1.0;
    rhs.segment(i * blk, blk).setZero();
  }

  Eigen::ColPivHouseholderQR<MatrixXd> qr(sys);
  const VectorXd theta = qr.solve(rhs);
  const double scale = std::max({1.0, rhs.cwiseAbs().maxCoeff(), sys.cwiseAbs().maxCoeff()});
  if ((sys * theta - rhs).cwiseAbs().maxCoeff() > 1e-7 * scale * std::max(1.0, theta.cwiseAbs().maxCoeff())) {
    std::ostringstream os;
    os << "stage fixed point singular at stage " << t;
    throw std::runtime_error(os.str());
  }

  StageSolution sol;
  sol.coeffs = unpack(theta);
  sol.values.resize(n);
  for (int i = 0; i < n; ++i) {
    const MatrixXd* vn = values_next ? &(*values_next)[i] : nullptr;
    const StageMaps maps = make_stage_maps(spec, rec, i, t, sol.coeffs, vn != nullptr);
    const StageObjective obj = stage_objective(spec, maps, i, vn);
    MatrixXd lift(z + na, z);
    lift << MatrixXd::Identity(z, z), coeff_matrix(sol.coeffs[i]);
    MatrixXd val = symmetrize(lift.transpose() * obj.q * lift);
    val(z - 1, z - 1) += obj.trace_const;
    sol.values[i].sym_mat = val;
  }
  return sol;
}

}  // namespace

MatrixXd stage_expected_reward(const GameSpec& spec, const PublicRecursion& rec, int player,
                               int stage, const std::vector<AffineStrategy>& stage_coeffs) {
  const Dims d = spec.dims();
  const int z = d.n_ext();
  const int na = d.dim_a;
  const StageMaps maps = make_stage_maps(spec, rec, player, stage, stage_coeffs, false);
  const StageObjective obj = stage_objective(spec, maps, player, nullptr);
  MatrixXd lift(z + na, z);
  lift << MatrixXd::Identity(z, z), coeff_matrix(stage_coeffs[player]);
  MatrixXd val = symmetrize(lift.transpose() * obj.q * lift);
  val(z - 1, z - 1) += obj.trace_const;
  return val;
}

std::pair<AffineStrategy, QuadraticValue> stage_best_response(
    const GameSpec& spec, const PublicRecursion& rec, int player, int stage,
    const QuadraticValue& continuation, const std::vector<AffineStrategy>& others) {
  const Dims d = spec.dims();
  const int z = d.n_ext();
  const int na = d.dim_a;
  const int blk = na * z;
  const bool terminal = stage == d.horizon - 1;
  const MatrixXd* vn = terminal ? nullptr : &continuation.sym_mat;

  auto with_own = [&](const VectorXd& theta_i) {
    std::vector<AffineStrategy> coeffs = others;
    coeffs[player] = coeff_from_matrix(d, Eigen::Map<const MatrixXd>(theta_i.data(), na, z));
    return coeffs;
  };

  MatrixXd qaa;
  const VectorXd r0 =
      stage_residual(spec, rec, player, stage, with_own(VectorXd::Zero(blk)), vn, &qaa);
  MatrixXd lin(blk, blk);
  for (int k = 0; k < blk; ++k) {
    VectorXd probe = VectorXd::Zero(blk);
    probe(k) = 1.0;
    lin.col(k) = stage_residual(spec, rec, player, stage, with_own(probe), vn, nullptr) - r0;
  }

  const double h_norm = qaa.cwiseAbs().maxCoeff();
  double scale = std::max(1.0, spec.reward_mat[player].cwiseAbs().maxCoeff());
  if (vn) scale = std::max(scale, vn->cwiseAbs().maxCoeff());
  VectorXd theta;
  if (h_norm <= 1e-13 * scale &&
      std::max(lin.cwiseAbs().maxCoeff(), r0.cwiseAbs().maxCoeff()) <= 1e-13 * scale) {
    theta = VectorXd::Zero(blk);
  } else {
    const double lam_max = max_eigenvalue(symmetrize(qaa));
    if (!(lam_max < -1e-10 * std::max(h_norm, 1e-100))) throw_ill_posed(player, stage, lam_max);
    Eigen::ColPivHouseholderQR<MatrixXd> qr(lin);
    theta = qr.solve(-r0);
    if ((lin * theta + r0).cwiseAbs().maxCoeff() >
        1e-7 * std::max(1.0, r0.cwiseAbs().maxCoeff()) * std::max(1.0, theta.cwiseAbs().maxCoeff()))
      throw std::runtime_error("stage fixed point singular (single-player solve)");
  }

  const std::vector<AffineStrategy> coeffs = with_own(theta);
  const StageMaps maps = make_stage_maps(spec, rec, player, stage, coeffs, vn != nullptr);
  const StageObjective obj = stage_objective(spec, maps, player, vn);
  MatrixXd lift(z + na, z);
  lift << MatrixXd::Identity(z, z), coeff_matrix(coeffs[player]);
  MatrixXd val = symmetrize(lift.transpose() * obj.q * lift);
  val(z - 1, z - 1) += obj.trace_const;
  return {coeffs[player], QuadraticValue{val}};
}

std::pair<StrategyProfile, std::vector<std::vector<QuadraticValue>>> backward_pass(
    const GameSpec& spec, const PublicRecursion& rec) {
  const Dims d = spec.dims();
  const int n = d.n_players;
  StrategyProfile profile = StrategyProfile::zero(d);
  std::vector<std::vector<QuadraticValue>> values(
      n, std::vector<QuadraticValue>(d.horizon));

  std::vector<MatrixXd> next(n);
  for (int t = d.horizon - 1; t >= 0; --t) {
    const bool terminal = t == d.horizon - 1;
    StageSolution sol = solve_stage(spec, rec, t, terminal ? nullptr : &next);
    for (int i = 0; i < n; ++i) {
      profile.at(i, t) = sol.coeffs[i];
      values[i][t] = sol.values[i];
      next[i] = sol.values[i].sym_mat;
    }
  }
  return {profile, values};
}

Equilibrium solve_equilibrium(const GameSpec& spec, const SolverOptions& options) {
  if (!(options.damping > 0.0 && options.damping <= 1.0))
    throw std::invalid_argument("damping must be in (0, 1]");
  if (!(options.tol > 0.0)) throw std::invalid_argument("tol must be positive");

  const Dims d = spec.dims();
  StrategyProfile current = options.has_init ? options.init_profile : StrategyProfile::zero(d);

  auto finish = [&](const StrategyProfile& candidate, int iterations) {
    Equilibrium eq;
    eq.recursion = build_public_recursion(spec, candidate);
    auto [check, values] = backward_pass(spec, eq.recursion);
    eq.profile = candidate;
    eq.values = std::move(values);
    eq.report.iterations = iterations;
    eq.report.residual = profile_distance(check, candidate);
    eq.report.converged = eq.report.residual <= options.tol;
    return eq;
  };

  StrategyProfile prev_response;
  bool have_prev = false;
  double last_residual = 0.0;
  StrategyProfile last_response = current;

  for (int k = 1; k <= options.max_outer_iters; ++k) {
    const PublicRecursion rec = build_public_recursion(spec, current);
    auto [response, values] = backward_pass(spec, rec);
    last_residual = profile_distance(response, current);
    last_response = response;
    if (last_residual <= options.tol) return finish(response, k);
    if (have_prev && profile_distance(response, prev_response) <= options.tol) {
      Equilibrium eq = finish(response, k);
      if (eq.report.converged) return eq;
    }
    prev_response = response;
    have_prev = true;
    current = blend_profiles(current, response, options.damping);
  }

  Equilibrium eq;
  eq.profile = last_response;
  eq.recursion = build_public_recursion(spec, last_response);
  auto [check, values] = backward_pass(spec, eq.recursion);
  eq.values = std::move(values);
  eq.report.iterations = options.max_outer_iters;
  eq.report.residual = profile_distance(check, last_response);
  eq.report.converged = false;
  return eq;
}

}  // namespace lqgames
