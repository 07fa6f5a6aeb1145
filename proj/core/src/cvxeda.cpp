#include "resin/cvxeda.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <stdexcept>

#include "resin/csv.hpp"
#include "resin/errors.hpp"

namespace resin::cvxeda {

void build_arma(double tau0, double tau1, double delta, Eigen::Index n,
                Eigen::SparseMatrix<double>& M,
                Eigen::SparseMatrix<double>& A) {
  if (!(tau0 > 0.0 && tau0 < tau1))
    throw std::invalid_argument("build_arma requires 0 < tau0 < tau1");
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be > 0");
  if (n < 3) throw std::invalid_argument("n must be >= 3");

  // Bilinear transform of H(s) = 1/((tau0 s + 1)(tau1 s + 1)).
  const double a0 = (2.0 * tau0 + delta) * (2.0 * tau1 + delta);
  const double a1 = 2.0 * delta * delta - 8.0 * tau0 * tau1;
  const double a2 = (delta - 2.0 * tau0) * (delta - 2.0 * tau1);
  const double b0 = delta * delta / a0;

  std::vector<Eigen::Triplet<double>> ta, tm;
  for (Eigen::Index i = 0; i < n; ++i) {
    ta.emplace_back(i, i, 1.0);
    tm.emplace_back(i, i, b0);
    if (i >= 1) {
      ta.emplace_back(i, i - 1, a1 / a0);
      tm.emplace_back(i, i - 1, 2.0 * b0);
    }
    if (i >= 2) {
      ta.emplace_back(i, i - 2, a2 / a0);
      tm.emplace_back(i, i - 2, b0);
    }
  }
  A.resize(n, n);
  A.setFromTriplets(ta.begin(), ta.end());
  M.resize(n, n);
  M.setFromTriplets(tm.begin(), tm.end());
}

Eigen::SparseMatrix<double> build_spline_basis(Eigen::Index n,
                                               double knot_spacing_s,
                                               double delta) {
  const auto K = static_cast<Eigen::Index>(std::llround(knot_spacing_s / delta));
  if (n <= K)
    throw std::invalid_argument("signal shorter than one knot spacing");

  // Self-convolution of a triangular kernel of half-width K, peak 1.
  const Eigen::Index half = 2 * K - 2;  // bump support [-half, half]
  std::vector<double> bump(static_cast<std::size_t>(2 * half + 1), 0.0);
  auto tri = [K](Eigen::Index j) {
    double v = 1.0 - std::abs(static_cast<double>(j)) / static_cast<double>(K);
    return v > 0.0 ? v : 0.0;
  };
  for (Eigen::Index u = -(K - 1); u <= K - 1; ++u)
    for (Eigen::Index v = -(K - 1); v <= K - 1; ++v)
      bump[static_cast<std::size_t>(u + v + half)] += tri(u) * tri(v);
  double peak = bump[static_cast<std::size_t>(half)];
  for (double& b : bump) b /= peak;

  std::vector<Eigen::Triplet<double>> trips;
  Eigen::Index n_knots = (n - 1) / K + 1;
  for (Eigen::Index j = 0; j < n_knots; ++j) {
    Eigen::Index center = j * K;
    for (Eigen::Index off = -half; off <= half; ++off) {
      Eigen::Index row = center + off;
      if (row < 0 || row >= n) continue;
      double v = bump[static_cast<std::size_t>(off + half)];
      if (v > 0.0) trips.emplace_back(row, j, v);
    }
  }
  Eigen::SparseMatrix<double> B(n, n_knots);
  B.setFromTriplets(trips.begin(), trips.end());
  return B;
}

SystemMatrices build_system(Eigen::Index n, const DecomposeParams& params,
                            double rate_hz) {
  SystemMatrices sys;
  sys.delta = 1.0 / rate_hz;
  build_arma(params.tau0, params.tau1, sys.delta, n, sys.M, sys.A);
  sys.B = build_spline_basis(n, params.knot_spacing_s, sys.delta);
  std::vector<Eigen::Triplet<double>> tc;
  for (Eigen::Index i = 0; i < n; ++i) {
    tc.emplace_back(i, 0, 1.0);
    tc.emplace_back(i, 1, static_cast<double>(i) / static_cast<double>(n));
  }
  sys.C.resize(n, 2);
  sys.C.setFromTriplets(tc.begin(), tc.end());
  return sys;
}

struct Decomposer::Cache {
  struct Entry {
    SystemMatrices sys;
    Eigen::SparseMatrix<double> g_obj;     // [M B C]
    Eigen::VectorXd l1_gradient;           // alpha * A'1 padded to N
    std::unique_ptr<qp::AdmmWorkspace> ws;
  };
  std::map<Eigen::Index, Entry> by_length;
};

namespace {

Eigen::SparseMatrix<double> hcat(const Eigen::SparseMatrix<double>& a,
                                 const Eigen::SparseMatrix<double>& b,
                                 const Eigen::SparseMatrix<double>& c) {
  Eigen::SparseMatrix<double> out(a.rows(), a.cols() + b.cols() + c.cols());
  std::vector<Eigen::Triplet<double>> trips;
  auto add = [&](const Eigen::SparseMatrix<double>& m, Eigen::Index col0) {
    for (int k = 0; k < m.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it)
        trips.emplace_back(it.row(), it.col() + col0, it.value());
  };
  add(a, 0);
  add(b, a.cols());
  add(c, a.cols() + b.cols());
  out.setFromTriplets(trips.begin(), trips.end());
  return out;
}

}  // namespace

Decomposition Decomposer::operator()(const EdaSignal& signal) {
  const auto n = static_cast<Eigen::Index>(signal.samples.size());
  if (static_cast<double>(n) < 3.0 * signal.sample_rate_hz)
    throw std::invalid_argument("signal must be at least 3 s long");
  if (!cache_) cache_ = std::make_shared<Cache>();

  auto it = cache_->by_length.find(n);
  if (it == cache_->by_length.end()) {
    Cache::Entry entry;
    entry.sys = build_system(n, params_, signal.sample_rate_hz);
    entry.g_obj = hcat(entry.sys.M, entry.sys.B, entry.sys.C);
    const Eigen::Index N = entry.g_obj.cols();
    const Eigen::Index k = entry.sys.B.cols();

    // P = G'G + blockdiag(0, gamma I, 0)
    Eigen::SparseMatrix<double> P =
        Eigen::SparseMatrix<double>(entry.g_obj.transpose()) * entry.g_obj;
    {
      std::vector<Eigen::Triplet<double>> reg;
      for (Eigen::Index j = 0; j < k; ++j)
        reg.emplace_back(n + j, n + j, params_.gamma);
      Eigen::SparseMatrix<double> R(N, N);
      R.setFromTriplets(reg.begin(), reg.end());
      P = P + R;
    }

    // Driver nonnegativity: [A 0 0] z >= 0.
    Eigen::SparseMatrix<double> zero_bk(n, k), zero_c(n, 2);
    Eigen::SparseMatrix<double> g_con = hcat(entry.sys.A, zero_bk, zero_c);

    entry.l1_gradient = Eigen::VectorXd::Zero(N);
    entry.l1_gradient.head(n) =
        params_.alpha *
        Eigen::VectorXd(entry.sys.A.transpose() * Eigen::VectorXd::Ones(n));

    entry.ws = std::make_unique<qp::AdmmWorkspace>(std::move(P),
                                                   std::move(g_con), params_.qp);
    it = cache_->by_length.emplace(n, std::move(entry)).first;
  }
  const Cache::Entry& entry = it->second;
  const Eigen::Index k = entry.sys.B.cols();

  Eigen::VectorXd y =
      Eigen::Map<const Eigen::VectorXd>(signal.samples.data(), n);
  Eigen::VectorXd lin =
      entry.l1_gradient -
      Eigen::VectorXd(entry.g_obj.transpose() * y);
  Eigen::VectorXd lower = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd upper = Eigen::VectorXd::Constant(
      n, std::numeric_limits<double>::infinity());

  qp::QpSolution qs = entry.ws->solve(lin, lower, upper);
  if (qs.status != qp::QpStatus::solved) {
    const char* name = qs.status == qp::QpStatus::max_iter ? "max_iter"
                                                           : "infeasible";
    throw NumericalError(std::string("decompose: QP status ") + name +
                             " for (" + signal.subject_id + "," +
                             signal.song_id + ")");
  }

  Decomposition d;
  Eigen::VectorXd q_var = qs.x.head(n);
  d.spline_weights = qs.x.segment(n, k);
  d.drift = qs.x.tail(2);
  d.driver = entry.sys.A * q_var;
  // The ADMM iterate satisfies p >= 0 only to solver tolerance. Clamp the
  // tolerance-level negatives and re-derive q through the unit-triangular A,
  // so p >= 0 holds exactly and r = (M A^-1) p stays a sum of nonnegative
  // kernels.
  if (d.driver.minCoeff() < 0.0) {
    d.driver = d.driver.cwiseMax(0.0);
    q_var = entry.sys.A.triangularView<Eigen::Lower>().solve(d.driver);
  }
  d.phasic = entry.sys.M * q_var;
  d.tonic = entry.sys.B * d.spline_weights + entry.sys.C * qs.x.tail(2);
  d.residual = y - d.phasic - d.tonic;
  d.alpha = params_.alpha;
  d.gamma = params_.gamma;
  d.qp_solution = std::move(qs);
  return d;
}

Decomposition decompose(const EdaSignal& signal, const DecomposeParams& params) {
  Decomposer dec(params);
  return dec(signal);
}

void write_decomposition_csv(const std::string& path, const EdaSignal& signal,
                             const Decomposition& d) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "sample_index,origin,phasic,tonic,residual\n";
  for (Eigen::Index i = 0; i < d.phasic.size(); ++i)
    out << i << ',' << csv::format_double(signal.samples[static_cast<std::size_t>(i)])
        << ',' << csv::format_double(d.phasic[i]) << ','
        << csv::format_double(d.tonic[i]) << ','
        << csv::format_double(d.residual[i]) << "\n";
}

}  // namespace resin::cvxeda
