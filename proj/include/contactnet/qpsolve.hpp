#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <string>

namespace contactnet {

/// minimize 0.5 x'Px + q'x  subject to  l <= Ax <= u
struct QpProblem {
  Eigen::MatrixXd P;
  Eigen::VectorXd q;
  Eigen::MatrixXd A;
  Eigen::VectorXd l;
  Eigen::VectorXd u;

  Eigen::Index num_vars() const { return q.size(); }
  Eigen::Index num_constraints() const { return l.size(); }
  /// Throws InvalidInput on inconsistent dimensions, asymmetric P or l > u.
  void validate() const;
  double objective(const Eigen::VectorXd& x) const { return 0.5 * x.dot(P * x) + q.dot(x); }
};

enum class QpStatus { Solved, MaxIterations, Infeasible };
std::string to_string(QpStatus s);

struct QpSettings {
  double rho{0.1};
  double sigma{1e-6};
  double alpha{1.6};  // over-relaxation
  double eps_abs{1e-6};
  double eps_rel{1e-6};
  double eps_infeasible{1e-4};
  int max_iter{4000};
  int scaling_sweeps{10};
  int check_interval{5};
  // Start from the unconstrained minimizer when P is positive definite; if
  // that point is already feasible the first termination test accepts it.
  bool unconstrained_start{true};
  bool polish{true};
  // Also attempt the polish every this many iterations (0: only at the end).
  int polish_interval{25};
};

struct QpSolution {
  Eigen::VectorXd x;
  Eigen::VectorXd y;  // y < 0: lower bound active, y > 0: upper bound active
  double objective{0.0};
  QpStatus status{QpStatus::MaxIterations};
  int iterations{0};
  double primal_residual{0.0};
  double dual_residual{0.0};
  bool polished{false};
};

struct QpWarmStart {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
};

/// Dense ADMM (operator splitting) solver with Ruiz equilibration and a fixed
/// step size. Holds workspace buffers; use one instance per thread.
class QpSolver {
 public:
  explicit QpSolver(QpSettings settings = {}) : settings_(settings) {}

  QpSolution solve(const QpProblem& problem, const QpWarmStart* warm = nullptr);

  const QpSettings& settings() const { return settings_; }
  QpSettings& settings() { return settings_; }

 private:
  void equilibrate(const QpProblem& p);
  bool try_polish(const QpProblem& p, QpSolution& sol, bool strict);
  void residuals(const QpProblem& p, const Eigen::VectorXd& x, const Eigen::VectorXd& z,
                 const Eigen::VectorXd& y, double& prim, double& dual, double& eps_prim,
                 double& eps_dual) const;

  QpSettings settings_;

  // Scaled data.
  Eigen::MatrixXd Ps_;
  Eigen::VectorXd qs_;
  Eigen::SparseMatrix<double> As_;
  Eigen::SparseMatrix<double> AsT_;
  Eigen::SparseMatrix<double> A_;  // unscaled, sparse copy
  Eigen::VectorXd ls_, us_;
  Eigen::VectorXd D_, E_;
  double cost_scale_{1.0};
  Eigen::VectorXd rho_;

  Eigen::LLT<Eigen::MatrixXd> kkt_llt_;
  Eigen::LLT<Eigen::MatrixXd> p_llt_;
  bool p_llt_ok_{false};
  std::vector<Eigen::Index> last_active_;
};

/// Convenience wrapper constructing a fresh solver.
QpSolution solve(const QpProblem& problem, const QpSettings& settings = {});

}  // namespace contactnet
