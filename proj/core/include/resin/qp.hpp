#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace resin::qp {

// min 1/2 x'Px + q'x  subject to  lower <= Gx <= upper
// P symmetric PSD; bound entries may be +-infinity.
struct QpProblem {
  Eigen::SparseMatrix<double> P;  // n x n
  Eigen::VectorXd q;              // n
  Eigen::SparseMatrix<double> G;  // m x n (m may be 0)
  Eigen::VectorXd lower;          // m
  Eigen::VectorXd upper;          // m
};

enum class QpStatus { solved, max_iter, infeasible };

struct QpSolution {
  Eigen::VectorXd x;
  Eigen::VectorXd dual;
  double objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
  QpStatus status = QpStatus::max_iter;
};

struct QpSettings {
  double rho = 0.1;
  double sigma = 1e-6;
  double alpha_relax = 1.6;
  double eps_primal = 1e-6;
  double eps_dual = 1e-6;
  int max_iter = 20000;
  bool polish = true;
};

struct KktResiduals {
  double primal = 0.0;
  double dual = 0.0;
  double complementarity = 0.0;
};

void validate(const QpProblem& problem);

// Operator-splitting (ADMM) solver with a cached sparse factorization of
// P + sigma*I + rho*G'G. Termination uses scaled infinity-norm residuals.
QpSolution solve_qp(const QpProblem& problem, const QpSettings& settings = {});

// Reuses the factorization across solves that share (P, G, settings); only
// q/lower/upper may differ. Built once, then solve() is cheap per signal.
class AdmmWorkspace {
 public:
  AdmmWorkspace(Eigen::SparseMatrix<double> P, Eigen::SparseMatrix<double> G,
                const QpSettings& settings);
  QpSolution solve(const Eigen::VectorXd& q, const Eigen::VectorXd& lower,
                   const Eigen::VectorXd& upper) const;

 private:
  Eigen::SparseMatrix<double> P_;
  Eigen::SparseMatrix<double> G_;
  Eigen::SparseMatrix<double> Gt_;
  QpSettings settings_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
};

// Dense oracle: dual projected-gradient (FISTA) solution to ~1e-9, for
// small problems only (n, m <= 400). Test use; independent of solve_qp.
QpSolution solve_qp_reference(const QpProblem& problem);

KktResiduals kkt_residuals(const QpProblem& problem, const QpSolution& sol);

}  // namespace resin::qp
