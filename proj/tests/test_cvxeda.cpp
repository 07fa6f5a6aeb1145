#include <cmath>
#include <random>

#include "doctest.h"
#include "resin/cvxeda.hpp"
#include "resin/errors.hpp"
#include "resin/synth.hpp"
#include "test_util.hpp"

using namespace resin;

namespace {

EdaSignal make_signal(std::vector<double> samples) {
  return {"s", "g", 50.0, std::move(samples)};
}

}  // namespace

TEST_CASE("build_arma coefficient structure") {
  Eigen::SparseMatrix<double> M, A;
  const double tau0 = 0.7, tau1 = 2.0, delta = 0.02;
  cvxeda::build_arma(tau0, tau1, delta, 10, M, A);
  const double a0 = (2.0 * tau0 + delta) * (2.0 * tau1 + delta);
  const double a1 = 2.0 * delta * delta - 8.0 * tau0 * tau1;
  const double a2 = (delta - 2.0 * tau0) * (delta - 2.0 * tau1);
  CHECK(a0 > 0.0);
  CHECK(std::isfinite(a1));
  CHECK(std::isfinite(a2));
  Eigen::MatrixXd Ad(A), Md(M);
  for (int i = 0; i < 10; ++i) {
    CHECK(Ad(i, i) == doctest::Approx(1.0));
    if (i >= 1) CHECK(Ad(i, i - 1) == doctest::Approx(a1 / a0));
    if (i >= 2) CHECK(Ad(i, i - 2) == doctest::Approx(a2 / a0));
    CHECK(Md(i, i) == doctest::Approx(delta * delta / a0));
    if (i >= 1) CHECK(Md(i, i - 1) == doctest::Approx(2.0 * delta * delta / a0));
  }
  CHECK_THROWS(cvxeda::build_arma(2.0, 0.7, delta, 10, M, A));
  CHECK_THROWS(cvxeda::build_arma(0.7, 2.0, 0.0, 10, M, A));
}

TEST_CASE("arma impulse response matches the Bateman kernel") {
  Eigen::SparseMatrix<double> M, A;
  const int n = 500;
  cvxeda::build_arma(0.7, 2.0, 0.02, n, M, A);
  Eigen::VectorXd e0 = Eigen::VectorXd::Zero(n);
  e0[0] = 1.0;
  // q = A^{-1} e0 by forward substitution, impulse = M q.
  Eigen::MatrixXd Ad(A);
  Eigen::VectorXd q =
      Ad.triangularView<Eigen::Lower>().solve(e0);
  Eigen::VectorXd impulse = M * q;
  double peak = impulse.maxCoeff();
  REQUIRE(peak > 0.0);
  impulse /= peak;

  auto kernel = synth::bateman_kernel(0.7, 2.0, 0.02, n);
  double max_diff = 0.0;
  for (int i = 0; i < n; ++i)
    max_diff = std::max(max_diff, std::abs(impulse[i] - kernel[static_cast<std::size_t>(i)]));
  CHECK(max_diff <= 0.02);
  for (int i = 0; i < n; ++i) CHECK(impulse[i] >= -1e-12);

  // Triangular round trip: A * (A^{-1} b) = b.
  Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(n, 0.0, 1.0);
  Eigen::VectorXd x = Ad.triangularView<Eigen::Lower>().solve(b);
  CHECK((Ad * x - b).lpNorm<Eigen::Infinity>() <= 1e-10);
}

TEST_CASE("spline basis columns peak at one and cover the interior") {
  const Eigen::Index n = 3000;
  auto B = cvxeda::build_spline_basis(n, 10.0, 0.02);  // K = 500
  Eigen::MatrixXd Bd(B);
  const Eigen::Index K = 500;
  for (Eigen::Index j = 0; j < Bd.cols(); ++j) {
    Eigen::Index center = j * K;
    if (center < n) CHECK(Bd(center, j) == doctest::Approx(1.0));
    CHECK(Bd.col(j).minCoeff() >= 0.0);
  }
  Eigen::VectorXd row_sums = Bd.rowwise().sum();
  for (Eigen::Index i = K; i + K < n; ++i) CHECK(row_sums[i] >= 1.0);
}

TEST_CASE("constants are exactly representable by the tonic bases") {
  const Eigen::Index n = 600;
  cvxeda::DecomposeParams params;
  auto sys = cvxeda::build_system(n, params, 50.0);
  Eigen::MatrixXd BC(n, sys.B.cols() + 2);
  BC.leftCols(sys.B.cols()) = Eigen::MatrixXd(sys.B);
  BC.rightCols(2) = Eigen::MatrixXd(sys.C);
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd coef = BC.colPivHouseholderQr().solve(ones);
  CHECK((BC * coef - ones).lpNorm<Eigen::Infinity>() <= 1e-10);
}

TEST_CASE("decompose zero and constant signals") {
  auto dz = cvxeda::decompose(make_signal(std::vector<double>(600, 0.0)));
  CHECK(dz.phasic.lpNorm<Eigen::Infinity>() <= 1e-8);
  CHECK(dz.tonic.lpNorm<Eigen::Infinity>() <= 1e-8);
  CHECK(dz.residual.lpNorm<Eigen::Infinity>() <= 1e-8);

  const double c = 2.5;
  auto dc = cvxeda::decompose(make_signal(std::vector<double>(600, c)));
  CHECK(dc.phasic.lpNorm<Eigen::Infinity>() <= 1e-4 * c);
  CHECK((dc.tonic.array() - c).abs().maxCoeff() <= 1e-4 * c);
}

TEST_CASE("decompose rejects short signals") {
  CHECK_THROWS(cvxeda::decompose(make_signal(std::vector<double>(100, 1.0))));
}

TEST_CASE("decomposition additivity and nonnegativity") {
  synth::GenConfig cfg;
  cfg.duration_s = 30.0;
  for (std::uint64_t seed : {1, 2, 3}) {
    auto [signal, gt] = synth::generate(cfg, seed);
    auto d = cvxeda::decompose(signal);
    for (Eigen::Index i = 0; i < d.phasic.size(); ++i) {
      double y = signal.samples[static_cast<std::size_t>(i)];
      CHECK(std::abs(y - d.phasic[i] - d.tonic[i] - d.residual[i]) <= 1e-10);
    }
    CHECK(d.driver.minCoeff() >= -1e-8);
    CHECK(d.phasic.minCoeff() >= -1e-6);
  }
}

TEST_CASE("driver recovery on a synthetic signal") {
  synth::GenConfig cfg;
  cfg.duration_s = 60.0;
  cfg.n_events = 3;
  cfg.noise_sigma = 0.01;
  auto [signal, gt] = synth::generate(cfg, 17);
  auto d = cvxeda::decompose(signal);

  // Each true event has substantial recovered driver mass within +-0.5 s.
  const Eigen::Index half_window = 25;
  const double global_max = d.driver.maxCoeff();
  REQUIRE(global_max > 0.0);
  for (std::size_t e = 0; e < gt.driver_times.size(); ++e) {
    auto t = static_cast<Eigen::Index>(gt.driver_times[e]);
    double near = 0.0;
    for (Eigen::Index i = std::max<Eigen::Index>(0, t - half_window);
         i <= std::min<Eigen::Index>(d.driver.size() - 1, t + half_window); ++i)
      near = std::max(near, d.driver[i]);
    CHECK(near >= 0.1 * global_max);
  }

  // Recovered phasic correlates with the truth.
  double mx = 0.0, my = 0.0;
  const auto n = d.phasic.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    mx += gt.phasic_true[static_cast<std::size_t>(i)];
    my += d.phasic[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double dx = gt.phasic_true[static_cast<std::size_t>(i)] - mx;
    double dy = d.phasic[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  CHECK(sxy / std::sqrt(sxx * syy) >= 0.9);

  double rms = std::sqrt(d.residual.squaredNorm() / static_cast<double>(n));
  CHECK(rms <= 2.0 * cfg.noise_sigma);
}

TEST_CASE("alpha and gamma regularization monotonicity") {
  synth::GenConfig cfg;
  cfg.duration_s = 30.0;
  auto [signal, gt] = synth::generate(cfg, 23);

  cvxeda::DecomposeParams base;
  auto d0 = cvxeda::decompose(signal, base);
  cvxeda::DecomposeParams more_alpha = base;
  more_alpha.alpha = base.alpha * 10.0;
  auto d1 = cvxeda::decompose(signal, more_alpha);
  CHECK(d1.driver.lpNorm<1>() <= d0.driver.lpNorm<1>() + 1e-8);

  cvxeda::DecomposeParams more_gamma = base;
  more_gamma.gamma = base.gamma * 10.0;
  auto d2 = cvxeda::decompose(signal, more_gamma);
  CHECK(d2.spline_weights.norm() <= d0.spline_weights.norm() + 1e-8);
}

TEST_CASE("residual tracks the injected noise level") {
  synth::GenConfig cfg;
  cfg.duration_s = 60.0;
  for (double sigma : {0.005, 0.01, 0.05}) {
    cfg.noise_sigma = sigma;
    auto [signal, gt] = synth::generate(cfg, 31);
    auto d = cvxeda::decompose(signal);
    double rms =
        std::sqrt(d.residual.squaredNorm() / static_cast<double>(d.residual.size()));
    CHECK(rms <= 2.0 * sigma);
    CHECK(rms >= sigma / 2.0);
  }
}

TEST_CASE("decomposer cache reuse matches one-shot results") {
  synth::GenConfig cfg;
  cfg.duration_s = 20.0;
  cvxeda::Decomposer decomposer;
  for (std::uint64_t seed : {41, 42}) {
    auto [signal, gt] = synth::generate(cfg, seed);
    auto cached = decomposer(signal);
    auto fresh = cvxeda::decompose(signal);
    CHECK((cached.phasic - fresh.phasic).lpNorm<Eigen::Infinity>() <= 1e-8);
    CHECK((cached.tonic - fresh.tonic).lpNorm<Eigen::Infinity>() <= 1e-8);
  }
}

TEST_CASE("decompose surfaces solver failure as a numerical error") {
  synth::GenConfig cfg;
  cfg.duration_s = 20.0;
  auto [signal, gt] = synth::generate(cfg, 5);
  cvxeda::DecomposeParams params;
  params.qp.max_iter = 1;
  params.qp.polish = false;
  CHECK_THROWS_AS(cvxeda::decompose(signal, params), NumericalError);
}

TEST_CASE("decomposition CSV header") {
  testutil::TempDir tmp;
  synth::GenConfig cfg;
  cfg.duration_s = 12.0;
  auto [signal, gt] = synth::generate(cfg, 2);
  auto d = cvxeda::decompose(signal);
  auto path = tmp.file("d.csv");
  cvxeda::write_decomposition_csv(path, signal, d);
  CHECK(testutil::read_file(path).rfind(
            "sample_index,origin,phasic,tonic,residual\n", 0) == 0);
}
