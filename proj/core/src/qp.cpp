#include "resin/qp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace resin::qp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double inf_norm(const Eigen::VectorXd& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

double objective_of(const QpProblem& p, const Eigen::VectorXd& x) {
  return 0.5 * x.dot(p.P * x) + p.q.dot(x);
}

}  // namespace

void validate(const QpProblem& problem) {
  const auto n = problem.P.rows();
  if (problem.P.cols() != n) throw std::invalid_argument("P must be square");
  if (problem.q.size() != n) throw std::invalid_argument("q size mismatch");
  const auto m = problem.G.rows();
  if (m > 0 && problem.G.cols() != n)
    throw std::invalid_argument("G column count mismatch");
  if (problem.lower.size() != m || problem.upper.size() != m)
    throw std::invalid_argument("bound size mismatch");
  for (Eigen::Index i = 0; i < m; ++i)
    if (problem.lower[i] > problem.upper[i])
      throw std::invalid_argument("lower > upper at constraint " +
                                  std::to_string(i));
  // Symmetry check, tolerance 1e-12 relative to the largest entry.
  Eigen::SparseMatrix<double> diff = Eigen::SparseMatrix<double>(
      problem.P - Eigen::SparseMatrix<double>(problem.P.transpose()));
  double scale = 1.0;
  for (int k = 0; k < problem.P.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(problem.P, k); it; ++it)
      scale = std::max(scale, std::abs(it.value()));
  for (int k = 0; k < diff.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(diff, k); it; ++it)
      if (std::abs(it.value()) > 1e-12 * scale)
        throw std::invalid_argument("P is not symmetric");
}

AdmmWorkspace::AdmmWorkspace(Eigen::SparseMatrix<double> P,
                             Eigen::SparseMatrix<double> G,
                             const QpSettings& settings)
    : P_(std::move(P)), G_(std::move(G)), settings_(settings) {
  Gt_ = G_.transpose();
  const auto n = P_.rows();
  Eigen::SparseMatrix<double> eye(n, n);
  eye.setIdentity();
  Eigen::SparseMatrix<double> H = P_ + settings_.sigma * eye;
  if (G_.rows() > 0)
    H = H + Eigen::SparseMatrix<double>(settings_.rho * (Gt_ * G_));
  ldlt_.compute(H);
  if (ldlt_.info() != Eigen::Success)
    throw std::runtime_error("ADMM: KKT factorization failed");
}

QpSolution AdmmWorkspace::solve(const Eigen::VectorXd& q,
                                const Eigen::VectorXd& lower,
                                const Eigen::VectorXd& upper) const {
  const auto n = P_.rows();
  const auto m = G_.rows();
  const double rho = settings_.rho;
  const double sigma = settings_.sigma;
  const double alpha = settings_.alpha_relax;

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(m);
  // Start feasible in the box when possible.
  for (Eigen::Index i = 0; i < m; ++i)
    z[i] = std::clamp(0.0, lower[i], upper[i]);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);

  QpSolution sol;
  sol.status = QpStatus::max_iter;
  const int check_every = 25;

  for (int iter = 1; iter <= settings_.max_iter; ++iter) {
    Eigen::VectorXd rhs = sigma * x - q;
    if (m > 0) rhs += Gt_ * (rho * z - y);
    Eigen::VectorXd xt = ldlt_.solve(rhs);
    Eigen::VectorXd x_new = alpha * xt + (1.0 - alpha) * x;
    if (m > 0) {
      Eigen::VectorXd zt = G_ * xt;
      Eigen::VectorXd z_relaxed = alpha * zt + (1.0 - alpha) * z;
      Eigen::VectorXd z_new =
          (z_relaxed + y / rho).cwiseMax(lower).cwiseMin(upper);
      y += rho * (z_relaxed - z_new);
      z = z_new;
    }
    x = x_new;

    if (iter % check_every == 0 || iter == settings_.max_iter) {
      Eigen::VectorXd Gx = m > 0 ? Eigen::VectorXd(G_ * x)
                                 : Eigen::VectorXd::Zero(0);
      Eigen::VectorXd Px = P_ * x;
      Eigen::VectorXd Gty =
          m > 0 ? Eigen::VectorXd(Gt_ * y) : Eigen::VectorXd::Zero(n);
      double prim_scale = std::max({inf_norm(Gx), inf_norm(z), 1.0});
      double dual_scale =
          std::max({inf_norm(Px), inf_norm(q), inf_norm(Gty), 1.0});
      double r_prim = m > 0 ? inf_norm(Gx - z) : 0.0;
      double r_dual = inf_norm(Px + q + Gty);
      sol.primal_residual = r_prim / prim_scale;
      sol.dual_residual = r_dual / dual_scale;
      sol.iterations = iter;
      if (sol.primal_residual <= settings_.eps_primal &&
          sol.dual_residual <= settings_.eps_dual) {
        sol.status = QpStatus::solved;
        break;
      }
      if (!x.allFinite() || inf_norm(x) > 1e12) {
        sol.status = QpStatus::infeasible;
        break;
      }
    }
  }

  sol.x = x;
  sol.dual = y;

  if (sol.status == QpStatus::solved && settings_.polish && m > 0) {
    // Equality-solve on the active set, accept only if residuals improve.
    std::vector<Eigen::Index> act_low, act_up;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (y[i] < -1e-10 && std::isfinite(lower[i])) act_low.push_back(i);
      else if (y[i] > 1e-10 && std::isfinite(upper[i])) act_up.push_back(i);
    }
    const auto k = static_cast<Eigen::Index>(act_low.size() + act_up.size());
    if (k > 0) {
      std::vector<Eigen::Triplet<double>> trips;
      for (int c = 0; c < P_.outerSize(); ++c)
        for (Eigen::SparseMatrix<double>::InnerIterator it(P_, c); it; ++it)
          trips.emplace_back(static_cast<int>(it.row()),
                             static_cast<int>(it.col()), it.value());
      Eigen::VectorXd rhs(n + k);
      rhs.head(n) = -q;
      Eigen::Index r = 0;
      auto add_row = [&](Eigen::Index i, double b) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(Gt_, i); it; ++it) {
          trips.emplace_back(static_cast<int>(n + r),
                             static_cast<int>(it.row()), it.value());
          trips.emplace_back(static_cast<int>(it.row()),
                             static_cast<int>(n + r), it.value());
        }
        rhs[n + r] = b;
        ++r;
      };
      for (Eigen::Index i : act_low) add_row(i, lower[i]);
      for (Eigen::Index i : act_up) add_row(i, upper[i]);
      for (Eigen::Index i = 0; i < n; ++i)
        trips.emplace_back(static_cast<int>(i), static_cast<int>(i), 1e-11);
      for (Eigen::Index i = 0; i < k; ++i)
        trips.emplace_back(static_cast<int>(n + i), static_cast<int>(n + i),
                           -1e-11);
      Eigen::SparseMatrix<double> kkt(n + k, n + k);
      kkt.setFromTriplets(trips.begin(), trips.end());
      Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
      lu.compute(kkt);
      if (lu.info() == Eigen::Success) {
        Eigen::VectorXd sol_vec = lu.solve(rhs);
        Eigen::VectorXd x_pol = sol_vec.head(n);
        Eigen::VectorXd nu = sol_vec.tail(k);
        Eigen::VectorXd y_pol = Eigen::VectorXd::Zero(m);
        r = 0;
        for (Eigen::Index i : act_low) y_pol[i] = nu[r++];
        for (Eigen::Index i : act_up) y_pol[i] = nu[r++];
        Eigen::VectorXd Gx = G_ * x_pol;
        double prim = inf_norm((Gx - upper).cwiseMax(0.0) +
                               (lower - Gx).cwiseMax(0.0));
        double dual = inf_norm(P_ * x_pol + q + Gt_ * y_pol);
        Eigen::VectorXd Gx0 = G_ * x;
        double prim0 = inf_norm((Gx0 - upper).cwiseMax(0.0) +
                                (lower - Gx0).cwiseMax(0.0));
        double dual0 = inf_norm(P_ * x + q + Gt_ * y);
        if (std::max(prim, dual) < std::max(prim0, dual0)) {
          sol.x = x_pol;
          sol.dual = y_pol;
          double prim_scale = std::max({inf_norm(Gx), 1.0});
          double dual_scale = std::max({inf_norm(q), 1.0});
          sol.primal_residual = prim / prim_scale;
          sol.dual_residual = dual / dual_scale;
        }
      }
    }
  }

  QpProblem tmp{P_, q, G_, lower, upper};
  sol.objective = objective_of(tmp, sol.x);
  return sol;
}

QpSolution solve_qp(const QpProblem& problem, const QpSettings& settings) {
  validate(problem);
  AdmmWorkspace ws(problem.P, problem.G, settings);
  return ws.solve(problem.q, problem.lower, problem.upper);
}

QpSolution solve_qp_reference(const QpProblem& problem) {
  validate(problem);
  const auto n = problem.P.rows();
  const auto m = problem.G.rows();
  if (n > 400 || m > 400)
    throw std::invalid_argument("reference solver is limited to n,m <= 400");

  Eigen::MatrixXd P = Eigen::MatrixXd(problem.P);
  Eigen::MatrixXd G = Eigen::MatrixXd(problem.G);

  // Strict convexity needed for the dual; nudge singular P by 1e-10.
  Eigen::LDLT<Eigen::MatrixXd> pfac(P);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P);
  if (es.eigenvalues().minCoeff() < 1e-10) {
    P += 1e-10 * Eigen::MatrixXd::Identity(n, n);
    pfac.compute(P);
  }

  // Stack finite bounds as one-sided rows a'x >= b.
  std::vector<Eigen::Index> row_of;     // original constraint index
  std::vector<int> side_of;             // -1 lower, +1 upper
  std::vector<Eigen::VectorXd> a_rows;
  std::vector<double> b_vals;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (std::isfinite(problem.lower[i])) {
      a_rows.push_back(G.row(i));
      b_vals.push_back(problem.lower[i]);
      row_of.push_back(i);
      side_of.push_back(-1);
    }
    if (std::isfinite(problem.upper[i])) {
      a_rows.push_back(-G.row(i));
      b_vals.push_back(-problem.upper[i]);
      row_of.push_back(i);
      side_of.push_back(+1);
    }
  }
  const auto mc = static_cast<Eigen::Index>(a_rows.size());

  QpSolution sol;
  sol.dual = Eigen::VectorXd::Zero(m);
  if (mc == 0) {
    sol.x = pfac.solve(-problem.q);
    sol.status = QpStatus::solved;
    sol.objective = objective_of(problem, sol.x);
    auto res = kkt_residuals(problem, sol);
    sol.primal_residual = res.primal;
    sol.dual_residual = res.dual;
    return sol;
  }

  Eigen::MatrixXd A(mc, n);
  Eigen::VectorXd b(mc);
  for (Eigen::Index i = 0; i < mc; ++i) {
    A.row(i) = a_rows[static_cast<std::size_t>(i)];
    b[i] = b_vals[static_cast<std::size_t>(i)];
  }

  // FISTA on the dual: maximize g(lambda), lambda >= 0, with
  // x(lambda) = P^{-1}(A'lambda - q) and grad g = b - A x(lambda).
  Eigen::MatrixXd PiAt = pfac.solve(A.transpose());
  Eigen::MatrixXd Hd = A * PiAt;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esd(Hd);
  double L = std::max(esd.eigenvalues().maxCoeff(), 1e-12);

  Eigen::VectorXd lam = Eigen::VectorXd::Zero(mc);
  Eigen::VectorXd lam_prev = lam;
  double t_prev = 1.0;
  Eigen::VectorXd x = pfac.solve(-problem.q);
  const int max_iter = 500000;
  for (int iter = 1; iter <= max_iter; ++iter) {
    double t = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_prev * t_prev));
    Eigen::VectorXd mu =
        lam + ((t_prev - 1.0) / t) * (lam - lam_prev);
    mu = mu.cwiseMax(0.0);
    Eigen::VectorXd x_mu = pfac.solve(A.transpose() * mu - problem.q);
    Eigen::VectorXd grad = b - A * x_mu;
    lam_prev = lam;
    lam = (mu + grad / L).cwiseMax(0.0);
    t_prev = t;
    if (iter % 100 == 0 || iter == max_iter) {
      x = pfac.solve(A.transpose() * lam - problem.q);
      Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
      for (Eigen::Index i = 0; i < mc; ++i)
        y[row_of[static_cast<std::size_t>(i)]] +=
            side_of[static_cast<std::size_t>(i)] * lam[i];
      QpSolution cand;
      cand.x = x;
      cand.dual = y;
      auto res = kkt_residuals(problem, cand);
      if (std::max({res.primal, res.dual, res.complementarity}) <= 1e-9) {
        sol.x = x;
        sol.dual = y;
        sol.status = QpStatus::solved;
        sol.iterations = iter;
        sol.primal_residual = res.primal;
        sol.dual_residual = res.dual;
        sol.objective = objective_of(problem, x);
        return sol;
      }
    }
  }
  sol.x = x;
  for (Eigen::Index i = 0; i < mc; ++i)
    sol.dual[row_of[static_cast<std::size_t>(i)]] +=
        side_of[static_cast<std::size_t>(i)] * lam[i];
  sol.status = QpStatus::max_iter;
  sol.iterations = max_iter;
  auto res = kkt_residuals(problem, sol);
  sol.primal_residual = res.primal;
  sol.dual_residual = res.dual;
  sol.objective = objective_of(problem, sol.x);
  return sol;
}

KktResiduals kkt_residuals(const QpProblem& problem, const QpSolution& sol) {
  KktResiduals r;
  const auto m = problem.G.rows();
  Eigen::VectorXd stat = problem.P * sol.x + problem.q;
  if (m > 0) stat += problem.G.transpose() * sol.dual;
  r.dual = inf_norm(stat);
  if (m > 0) {
    Eigen::VectorXd Gx = problem.G * sol.x;
    for (Eigen::Index i = 0; i < m; ++i) {
      double viol = std::max(
          {problem.lower[i] - Gx[i], Gx[i] - problem.upper[i], 0.0});
      r.primal = std::max(r.primal, viol);
      double y = sol.dual[i];
      if (y > 0.0) {
        double gap = std::isfinite(problem.upper[i])
                         ? std::abs(problem.upper[i] - Gx[i])
                         : kInf;
        r.complementarity = std::max(r.complementarity, y * gap);
      } else if (y < 0.0) {
        double gap = std::isfinite(problem.lower[i])
                         ? std::abs(Gx[i] - problem.lower[i])
                         : kInf;
        r.complementarity = std::max(r.complementarity, -y * gap);
      }
    }
  }
  return r;
}

}  // namespace resin::qp
