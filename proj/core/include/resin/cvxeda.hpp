#pragma once

#include <Eigen/Sparse>
#include <memory>
#include <vector>

#include "resin/qp.hpp"
#include "resin/signal.hpp"

namespace resin::cvxeda {

// Discrete realization of the biexponential SCR system plus the tonic bases.
struct SystemMatrices {
  Eigen::SparseMatrix<double> M;  // banded MA filter, n x n
  Eigen::SparseMatrix<double> A;  // banded lower-triangular AR, unit diagonal
  Eigen::SparseMatrix<double> B;  // n x k spline basis, columns peak 1
  Eigen::SparseMatrix<double> C;  // n x 2: [ones, ramp i/n]
  double delta = 0.02;
};

struct DecomposeParams {
  double tau0 = 0.7;
  double tau1 = 2.0;
  double alpha = 8e-4;
  double gamma = 1e-2;
  double knot_spacing_s = 10.0;
  qp::QpSettings qp;
};

struct Decomposition {
  Eigen::VectorXd phasic;          // r = M q
  Eigen::VectorXd tonic;           // t = B lambda + C d
  Eigen::VectorXd driver;          // p = A q, >= 0 up to solver tolerance
  Eigen::VectorXd spline_weights;  // lambda
  Eigen::Vector2d drift;           // d
  Eigen::VectorXd residual;        // y - r - t, exact by construction
  double alpha = 0.0;
  double gamma = 0.0;
  qp::QpSolution qp_solution;
};

// Bilinear-transform discretization of 1/((tau0 s + 1)(tau1 s + 1)).
// A rows are normalized by the leading coefficient.
void build_arma(double tau0, double tau1, double delta, Eigen::Index n,
                Eigen::SparseMatrix<double>& M, Eigen::SparseMatrix<double>& A);

// Columns are a peak-normalized self-convolved triangular bump centered
// every K = round(knot_spacing_s/delta) samples, truncated at the edges.
Eigen::SparseMatrix<double> build_spline_basis(Eigen::Index n,
                                               double knot_spacing_s,
                                               double delta);

SystemMatrices build_system(Eigen::Index n, const DecomposeParams& params,
                            double rate_hz);

Decomposition decompose(const EdaSignal& signal,
                        const DecomposeParams& params = {});

// Batch entry point that builds and caches one QP workspace per signal
// length; signals of equal length reuse the factorization.
class Decomposer {
 public:
  explicit Decomposer(const DecomposeParams& params = {}) : params_(params) {}
  Decomposition operator()(const EdaSignal& signal);

 private:
  struct Cache;
  DecomposeParams params_;
  std::shared_ptr<Cache> cache_;
};

void write_decomposition_csv(const std::string& path, const EdaSignal& signal,
                             const Decomposition& d);

}  // namespace resin::cvxeda
