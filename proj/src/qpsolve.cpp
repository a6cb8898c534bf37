#include "contactnet/qpsolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "contactnet/errors.hpp"

namespace contactnet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double inf_norm(const Eigen::VectorXd& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

double clip_norm(double v) {
  if (v < 1e-4) return 1.0;
  return std::min(v, 1e4);
}

Eigen::VectorXd project(const Eigen::VectorXd& v, const Eigen::VectorXd& l,
                        const Eigen::VectorXd& u) {
  return v.cwiseMax(l).cwiseMin(u);
}

}  // namespace

std::string to_string(QpStatus s) {
  switch (s) {
    case QpStatus::Solved: return "solved";
    case QpStatus::MaxIterations: return "max_iterations";
    case QpStatus::Infeasible: return "infeasible";
  }
  return "?";
}

void QpProblem::validate() const {
  const auto n = q.size();
  const auto m = l.size();
  if (P.rows() != n || P.cols() != n) throw InvalidInput("qp: P must be n x n");
  if (A.cols() != n || A.rows() != m) throw InvalidInput("qp: A must be m x n");
  if (u.size() != m) throw InvalidInput("qp: l and u must have equal length");
  if (n > 0) {
    const double scale = std::max(1.0, P.cwiseAbs().maxCoeff());
    if ((P - P.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
      throw InvalidInput("qp: P is not symmetric");
    }
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    if (std::isnan(l[i]) || std::isnan(u[i]) || l[i] > u[i]) {
      throw InvalidInput("qp: bound " + std::to_string(i) + " has l > u");
    }
  }
}

void QpSolver::equilibrate(const QpProblem& p) {
  const auto n = p.num_vars();
  const auto m = p.num_constraints();
  Ps_ = p.P;
  qs_ = p.q;
  As_ = A_;
  D_ = Eigen::VectorXd::Ones(n);
  E_ = Eigen::VectorXd::Ones(m);
  cost_scale_ = 1.0;

  Eigen::VectorXd dD(n), dE(m), a_col(n), a_row(m);
  for (int sweep = 0; sweep < settings_.scaling_sweeps; ++sweep) {
    a_col.setZero();
    a_row.setZero();
    for (int k = 0; k < As_.outerSize(); ++k) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(As_, k); it; ++it) {
        const double v = std::abs(it.value());
        a_col[it.col()] = std::max(a_col[it.col()], v);
        a_row[it.row()] = std::max(a_row[it.row()], v);
      }
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      dD[j] = 1.0 / std::sqrt(clip_norm(std::max(Ps_.col(j).cwiseAbs().maxCoeff(), a_col[j])));
    }
    for (Eigen::Index i = 0; i < m; ++i) dE[i] = 1.0 / std::sqrt(clip_norm(a_row[i]));

    Ps_ = dD.asDiagonal() * Ps_ * dD.asDiagonal();
    As_ = dE.asDiagonal() * As_ * dD.asDiagonal();
    qs_ = qs_.cwiseProduct(dD);
    D_ = D_.cwiseProduct(dD);
    E_ = E_.cwiseProduct(dE);

    double mean_col = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) mean_col += Ps_.col(j).cwiseAbs().maxCoeff();
    mean_col = n ? mean_col / static_cast<double>(n) : 1.0;
    const double gamma = 1.0 / clip_norm(std::max(mean_col, inf_norm(qs_)));
    Ps_ *= gamma;
    qs_ *= gamma;
    cost_scale_ *= gamma;
  }
  AsT_ = As_.transpose();
  ls_ = E_.cwiseProduct(p.l);
  us_ = E_.cwiseProduct(p.u);
}

void QpSolver::residuals(const QpProblem& p, const Eigen::VectorXd& x, const Eigen::VectorXd& z,
                         const Eigen::VectorXd& y, double& prim, double& dual, double& eps_prim,
                         double& eps_dual) const {
  const Eigen::VectorXd Ax = A_ * x;
  const Eigen::VectorXd Px = p.P * x;
  const Eigen::VectorXd ATy = A_.transpose() * y;
  prim = inf_norm(Ax - z);
  dual = inf_norm(Px + p.q + ATy);
  eps_prim = settings_.eps_abs + settings_.eps_rel * std::max(inf_norm(Ax), inf_norm(z));
  eps_dual = settings_.eps_abs +
             settings_.eps_rel * std::max({inf_norm(Px), inf_norm(ATy), inf_norm(p.q)});
}

QpSolution QpSolver::solve(const QpProblem& p, const QpWarmStart* warm) {
  p.validate();
  const auto n = p.num_vars();
  const auto m = p.num_constraints();
  A_ = p.A.sparseView();
  last_active_.assign(1, -1);

  QpSolution sol;
  p_llt_ok_ = false;
  if (settings_.unconstrained_start || settings_.polish) {
    p_llt_.compute(p.P);
    p_llt_ok_ = p_llt_.info() == Eigen::Success;
  }

  if (settings_.unconstrained_start && !warm && p_llt_ok_) {
    const Eigen::VectorXd x0 = p_llt_.solve(-p.q);
    if (x0.allFinite()) {
      const Eigen::VectorXd Ax = A_ * x0;
      const Eigen::VectorXd z = project(Ax, p.l, p.u);
      const Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
      double prim, dual, eps_prim, eps_dual;
      residuals(p, x0, z, y, prim, dual, eps_prim, eps_dual);
      if (prim <= eps_prim && dual <= eps_dual) {
        sol.x = x0;
        sol.y = y;
        sol.objective = p.objective(x0);
        sol.status = QpStatus::Solved;
        sol.iterations = 0;
        sol.primal_residual = prim;
        sol.dual_residual = dual;
        return sol;
      }
    }
  }

  equilibrate(p);

  rho_.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (p.l[i] == p.u[i]) {
      rho_[i] = 1e3 * settings_.rho;
    } else if (p.l[i] == -kInf && p.u[i] == kInf) {
      rho_[i] = 1e-6;
    } else {
      rho_[i] = settings_.rho;
    }
  }

  Eigen::MatrixXd K = Ps_;
  K.diagonal().array() += settings_.sigma;
  K += Eigen::MatrixXd(AsT_ * rho_.asDiagonal() * As_);
  kkt_llt_.compute(K);
  if (kkt_llt_.info() != Eigen::Success) {
    throw InvalidInput("qp: KKT matrix factorization failed (is P positive semidefinite?)");
  }

  Eigen::VectorXd xs = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd ys = Eigen::VectorXd::Zero(m);
  if (warm && warm->x.size() == n) xs = warm->x.cwiseQuotient(D_);
  if (warm && warm->y.size() == m) ys = warm->y.cwiseQuotient(E_) * cost_scale_;
  Eigen::VectorXd zs = project(As_ * xs, ls_, us_);

  Eigen::VectorXd rhs(n), xt(n), zt(m), z_prev(m), y_prev(m);
  const double a = settings_.alpha;
  sol.status = QpStatus::MaxIterations;
  int iter = 0;
  for (iter = 1; iter <= settings_.max_iter; ++iter) {
    z_prev = zs;
    y_prev = ys;
    rhs = settings_.sigma * xs - qs_ + AsT_ * (rho_.cwiseProduct(zs) - ys);
    xt = kkt_llt_.solve(rhs);
    zt = As_ * xt;
    xs = a * xt + (1.0 - a) * xs;
    const Eigen::VectorXd z_relaxed = a * zt + (1.0 - a) * z_prev;
    zs = project(z_relaxed + ys.cwiseQuotient(rho_), ls_, us_);
    ys += rho_.cwiseProduct(z_relaxed - zs);

    if (iter % settings_.check_interval != 0 && iter != settings_.max_iter) continue;

    const Eigen::VectorXd x = xs.cwiseProduct(D_);
    const Eigen::VectorXd z = zs.cwiseQuotient(E_);
    const Eigen::VectorXd y = ys.cwiseProduct(E_) / cost_scale_;
    double prim, dual, eps_prim, eps_dual;
    residuals(p, x, z, y, prim, dual, eps_prim, eps_dual);
    sol.primal_residual = prim;
    sol.dual_residual = dual;
    if (prim <= eps_prim && dual <= eps_dual) {
      sol.status = QpStatus::Solved;
      break;
    }
    if (settings_.polish && settings_.polish_interval > 0 && iter % settings_.polish_interval == 0) {
      QpSolution trial;
      trial.x = x;
      trial.y = y;
      trial.primal_residual = prim;
      trial.dual_residual = dual;
      if (try_polish(p, trial, true)) {
        trial.status = QpStatus::Solved;
        trial.iterations = iter;
        trial.objective = p.objective(trial.x);
        return trial;
      }
    }

    // Primal infeasibility certificate from the dual iterate difference,
    // projected onto the polar of the recession cone of [l, u].
    Eigen::VectorXd dy = (ys - y_prev).cwiseProduct(E_) / cost_scale_;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (p.u[i] == kInf) dy[i] = std::min(dy[i], 0.0);
      if (p.l[i] == -kInf) dy[i] = std::max(dy[i], 0.0);
    }
    const double dy_norm = inf_norm(dy);
    if (dy_norm > 1e-30) {
      double support = 0.0;
      for (Eigen::Index i = 0; i < m; ++i) {
        if (dy[i] > 0.0) support += p.u[i] * dy[i];
        if (dy[i] < 0.0) support += p.l[i] * dy[i];
      }
      const double aty = inf_norm(A_.transpose() * dy);
      if (aty <= settings_.eps_infeasible * dy_norm &&
          support <= -settings_.eps_infeasible * dy_norm) {
        sol.status = QpStatus::Infeasible;
        break;
      }
    }
  }
  sol.iterations = std::min(iter, settings_.max_iter);
  sol.x = xs.cwiseProduct(D_);
  sol.y = ys.cwiseProduct(E_) / cost_scale_;

  if (sol.status == QpStatus::Infeasible) {
    sol.objective = kInf;
    return sol;
  }
  if (sol.status == QpStatus::Solved && settings_.polish) try_polish(p, sol, false);
  sol.objective = p.objective(sol.x);
  return sol;
}

// Solve the equality-constrained QP on the active set guessed from the ADMM
// duals. The guess is refined for a few rounds (violated rows added, rows
// with wrong-sign multipliers dropped); the result is kept when it is at
// least as accurate as the ADMM iterate. With `strict` it must also meet the
// termination tolerances, and a guess identical to the previous strict
// attempt is skipped.
bool QpSolver::try_polish(const QpProblem& p, QpSolution& sol, bool strict) {
  const auto n = p.num_vars();
  const auto m = p.num_constraints();
  const Eigen::VectorXd Ax0 = A_ * sol.x;

  // side: -1 lower, +1 upper, 2 equality.
  std::vector<std::pair<Eigen::Index, int>> active;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double z = std::clamp(Ax0[i], p.l[i], p.u[i]);
    if (p.l[i] == p.u[i]) {
      active.emplace_back(i, 2);
    } else if (z - p.l[i] < -sol.y[i]) {
      active.emplace_back(i, -1);
    } else if (p.u[i] - z < sol.y[i]) {
      active.emplace_back(i, 1);
    }
  }
  if (strict) {
    std::vector<Eigen::Index> key;
    for (const auto& [i, side] : active) key.push_back(side == 1 ? i + m : i);
    if (key == last_active_) return false;
    last_active_ = key;
  }

  Eigen::LLT<Eigen::MatrixXd> reg_llt;
  const Eigen::LLT<Eigen::MatrixXd>* llt = &p_llt_;
  if (!p_llt_ok_) {
    Eigen::MatrixXd Preg = p.P;
    Preg.diagonal().array() += 1e-9;
    reg_llt.compute(Preg);
    if (reg_llt.info() != Eigen::Success) return false;
    llt = &reg_llt;
  }
  const Eigen::VectorXd xu = llt->solve(-p.q);

  Eigen::VectorXd x, y;
  double prim = 0, dual = 0, eps_prim = 0, eps_dual = 0;
  constexpr int kRounds = 12;
  for (int round = 0; round < kRounds; ++round) {
    const auto k = static_cast<Eigen::Index>(active.size());
    Eigen::MatrixXd Aact(k, n);
    Eigen::VectorXd b(k);
    for (Eigen::Index r = 0; r < k; ++r) {
      const auto [i, side] = active[r];
      Aact.row(r) = p.A.row(i);
      b[r] = side == 1 ? p.u[i] : p.l[i];
    }
    x = xu;
    Eigen::VectorXd nu = Eigen::VectorXd::Zero(k);
    if (k > 0) {
      const Eigen::MatrixXd W = llt->solve(Aact.transpose());
      const Eigen::MatrixXd S = Aact * W;
      nu = S.completeOrthogonalDecomposition().solve(Aact * xu - b);
      x = xu - W * nu;
    }
    y = Eigen::VectorXd::Zero(m);
    for (Eigen::Index r = 0; r < k; ++r) y[active[r].first] = nu[r];
    if (!x.allFinite() || !y.allFinite()) return false;

    const Eigen::VectorXd Ax = A_ * x;
    const Eigen::VectorXd z = project(Ax, p.l, p.u);
    residuals(p, x, z, y, prim, dual, eps_prim, eps_dual);

    // Multiplier signs must match the side of the active bound.
    Eigen::Index worst = -1;
    double worst_val = eps_dual;
    for (Eigen::Index r = 0; r < k; ++r) {
      const auto [i, side] = active[r];
      const double wrong = side == -1 ? nu[r] : side == 1 ? -nu[r] : 0.0;
      if (wrong > worst_val) {
        worst_val = wrong;
        worst = r;
      }
    }
    std::vector<std::pair<Eigen::Index, int>> added;
    std::vector<bool> is_active(m, false);
    for (const auto& a : active) is_active[a.first] = true;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (is_active[i]) continue;
      if (Ax[i] < p.l[i] - eps_prim) added.emplace_back(i, -1);
      if (Ax[i] > p.u[i] + eps_prim) added.emplace_back(i, 1);
    }
    if (worst < 0 && added.empty()) break;
    if (round + 1 == kRounds) return false;
    if (!added.empty()) {
      active.insert(active.end(), added.begin(), added.end());
    } else {
      active.erase(active.begin() + worst);
    }
  }

  const bool accept = strict ? (prim <= eps_prim && dual <= eps_dual)
                             : (prim <= std::max(sol.primal_residual, eps_prim) &&
                                dual <= std::max(sol.dual_residual, eps_dual));
  if (!accept) return false;
  sol.x = x;
  sol.y = y;
  sol.primal_residual = prim;
  sol.dual_residual = dual;
  sol.polished = true;
  return true;
}

QpSolution solve(const QpProblem& problem, const QpSettings& settings) {
  QpSolver solver(settings);
  return solver.solve(problem);
}

}  // namespace contactnet
