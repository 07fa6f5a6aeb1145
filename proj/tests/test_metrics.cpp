#include <cmath>
#include <random>

#include "doctest.h"
#include "resin/metrics.hpp"
#include "test_util.hpp"

using namespace resin;

namespace {

double sine_amplitude(const std::vector<double>& x, std::size_t skip) {
  double amp = 0.0;
  for (std::size_t i = skip; i + skip < x.size(); ++i)
    amp = std::max(amp, std::abs(x[i]));
  return amp;
}

std::vector<double> sine(double freq_hz, double rate_hz, std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i)
    x[i] = std::sin(2.0 * M_PI * freq_hz * static_cast<double>(i) / rate_hz);
  return x;
}

}  // namespace

TEST_CASE("lowpass preserves DC") {
  std::vector<double> constant(500, 3.7);
  auto y = metrics::lowpass(constant);
  for (double v : y) CHECK(v == doctest::Approx(3.7).epsilon(1e-9));
  CHECK_THROWS(metrics::lowpass(constant, 30.0, 50.0));
}

TEST_CASE("lowpass attenuation profile") {
  auto fast = metrics::lowpass(sine(5.0, 50.0, 2000));
  CHECK(sine_amplitude(fast, 200) <= 0.05);
  auto slow = metrics::lowpass(sine(0.05, 50.0, 4000));
  CHECK(sine_amplitude(slow, 500) >= 0.95);
}

TEST_CASE("lowpass shift invariance in the interior") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> x(1200);
  for (double& v : x) v = dist(rng);
  auto y = metrics::lowpass(x);
  const std::size_t shift = 50;
  std::vector<double> xs(x.begin() + shift, x.end());
  auto ys = metrics::lowpass(xs);
  for (std::size_t i = 300; i + 300 < ys.size(); ++i)
    CHECK(ys[i] == doctest::Approx(y[i + shift]).epsilon(1e-6).scale(1.0));
}

TEST_CASE("zscore uses population statistics") {
  Eigen::MatrixXd X(3, 2);
  X << 1, 5, 2, 5, 3, 5;
  auto stats = metrics::fit_zscore(X);
  CHECK(stats.mean[0] == doctest::Approx(2.0));
  auto Z = metrics::apply_zscore(X, stats);
  CHECK(Z(0, 0) == doctest::Approx(-1.2247).epsilon(1e-4));
  CHECK(Z(1, 0) == doctest::Approx(0.0));
  CHECK(Z(2, 0) == doctest::Approx(1.2247).epsilon(1e-4));
  // Constant feature zeroed.
  CHECK(Z.col(1).cwiseAbs().maxCoeff() == 0.0);
  // Held-out transform uses the stored stats.
  Eigen::MatrixXd H(1, 2);
  H << 4, 7;
  auto Hz = metrics::apply_zscore(H, stats);
  CHECK(Hz(0, 0) == doctest::Approx((4.0 - 2.0) / stats.std[0]));
  CHECK(Hz(0, 1) == 0.0);
}

TEST_CASE("mlr recovers exact linear data") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::MatrixXd X(40, 3);
  for (int i = 0; i < 40; ++i)
    for (int j = 0; j < 3; ++j) X(i, j) = dist(rng);
  Eigen::Vector3d w_true(0.5, -1.25, 2.0);
  Eigen::VectorXd y = X * w_true;
  y.array() += 0.75;
  auto m = metrics::fit_mlr(X, y);
  for (int j = 0; j < 3; ++j)
    CHECK(m.weights[j] == doctest::Approx(w_true[j]).epsilon(1e-6));
  CHECK(m.intercept == doctest::Approx(0.75).epsilon(1e-6));

  // Residual orthogonality to the column space.
  Eigen::VectorXd pred(40);
  for (int i = 0; i < 40; ++i)
    pred[i] = metrics::predict_value(m, X.row(i));
  Eigen::VectorXd resid = y - pred;
  CHECK((X.transpose() * resid).lpNorm<Eigen::Infinity>() <= 1e-5);
}

TEST_CASE("mlr constant target gives intercept-only fit") {
  Eigen::MatrixXd X = Eigen::MatrixXd::Random(10, 2);
  Eigen::VectorXd y = Eigen::VectorXd::Constant(10, 0.4);
  auto m = metrics::fit_mlr(X, y);
  CHECK(m.weights.lpNorm<Eigen::Infinity>() <= 1e-6);
  CHECK(m.intercept == doctest::Approx(0.4).epsilon(1e-8));
}

TEST_CASE("mlr matches a hand normal-equations solve") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::MatrixXd X(25, 2);
  Eigen::VectorXd y(25);
  for (int i = 0; i < 25; ++i) {
    X(i, 0) = dist(rng);
    X(i, 1) = dist(rng);
    y[i] = dist(rng);
  }
  Eigen::MatrixXd Xa(25, 3);
  Xa << X, Eigen::VectorXd::Ones(25);
  Eigen::Vector3d beta =
      (Xa.transpose() * Xa).ldlt().solve(Xa.transpose() * y);
  auto m = metrics::fit_mlr(X, y);
  CHECK(m.weights[0] == doctest::Approx(beta[0]).epsilon(1e-5));
  CHECK(m.weights[1] == doctest::Approx(beta[1]).epsilon(1e-5));
  CHECK(m.intercept == doctest::Approx(beta[2]).epsilon(1e-5));
}

TEST_CASE("svm separates a linearly separable toy set") {
  Eigen::MatrixXd X(8, 2);
  std::vector<int> y(8);
  for (int i = 0; i < 4; ++i) {
    X(i, 0) = -1.0 - 0.1 * i;
    X(i, 1) = -1.0;
    y[static_cast<std::size_t>(i)] = 0;
    X(4 + i, 0) = 1.0 + 0.1 * i;
    X(4 + i, 1) = 1.0;
    y[static_cast<std::size_t>(4 + i)] = 1;
  }
  auto svm = metrics::fit_linear_svm(X, y);
  for (int i = 0; i < 8; ++i)
    CHECK(metrics::predict_class(svm, X.row(i)) == y[static_cast<std::size_t>(i)]);

  std::vector<int> one_class(8, 1);
  CHECK_THROWS(metrics::fit_linear_svm(X, one_class));
}

TEST_CASE("svr stays inside the epsilon band on clean linear data") {
  Eigen::MatrixXd X(20, 1);
  Eigen::VectorXd y(20);
  for (int i = 0; i < 20; ++i) {
    X(i, 0) = 0.1 * i;
    y[i] = 0.5 * X(i, 0) + 0.2;
  }
  // C large enough that the optimum keeps every residual on or inside the
  // band edge (at C=1 the regularizer happily trades band violations for a
  // smaller weight).
  auto svr = metrics::fit_linear_svr(X, y, 0.3, 10.0);
  for (int i = 0; i < 20; ++i) {
    double pred = metrics::predict_value(svr, X.row(i));
    CHECK(std::abs(pred - y[i]) <= 0.3 + 1e-3);
  }
}

TEST_CASE("svm and svr objectives are near the multi-restart best") {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::MatrixXd X(30, 3);
  Eigen::VectorXd y(30);
  std::vector<int> bits;
  for (int i = 0; i < 30; ++i) {
    for (int j = 0; j < 3; ++j) X(i, j) = dist(rng);
    y[i] = X(i, 0) - 0.5 * X(i, 1) + 0.1 * dist(rng);
    bits.push_back(y[i] > 0 ? 1 : 0);
  }
  auto svr = metrics::fit_linear_svr(X, y);
  auto svm = metrics::fit_linear_svm(X, bits);
  CHECK(std::isfinite(metrics::svr_objective(svr, X, y, 0.1, 1.0)));
  CHECK(std::isfinite(metrics::svm_objective(svm, X, bits, 1.0)));
  // Descent sanity: fitted objective beats the zero model.
  metrics::LinearModel zero;
  zero.weights = Eigen::VectorXd::Zero(3);
  CHECK(metrics::svm_objective(svm, X, bits, 1.0) <=
        metrics::svm_objective(zero, X, bits, 1.0) + 1e-9);
  CHECK(metrics::svr_objective(svr, X, y, 0.1, 1.0) <=
        metrics::svr_objective(zero, X, y, 0.1, 1.0) + 1e-9);
}

TEST_CASE("rmse and pearson basics") {
  CHECK(metrics::rmse({1, 2, 3}, {1, 2, 3}) == 0.0);
  CHECK(metrics::rmse({0, 0}, {3, 4}) == doctest::Approx(std::sqrt(12.5)));
  auto r = metrics::pearson_r({1, 2, 3}, {2, 4, 6});
  REQUIRE(r.has_value());
  CHECK(*r == doctest::Approx(1.0));
  auto anti = metrics::pearson_r({1, 2, 3}, {3, 2, 1});
  CHECK(*anti == doctest::Approx(-1.0));
  CHECK_FALSE(metrics::pearson_r({1, 1, 1}, {1, 2, 3}).has_value());
  CHECK_THROWS(metrics::rmse({1}, {1, 2}));
}

TEST_CASE("classification metrics hand count") {
  auto m = metrics::classify_metrics({1, 1, 0, 0}, {1, 0, 0, 0});
  CHECK(m.tp == 1);
  CHECK(m.fp == 1);
  CHECK(m.tn == 2);
  CHECK(m.fn == 0);
  CHECK(m.precision == doctest::Approx(0.5));
  CHECK(m.recall == doctest::Approx(1.0));
  CHECK(m.f1 == doctest::Approx(2.0 / 3.0));
  CHECK(m.accuracy == doctest::Approx(0.75));
  // f1 is the harmonic mean of the emitted precision/recall.
  CHECK(m.f1 == doctest::Approx(2.0 * m.precision * m.recall /
                                (m.precision + m.recall))
                    .epsilon(1e-12));
}

TEST_CASE("classification metrics degenerate denominators") {
  auto m = metrics::classify_metrics({0, 0}, {1, 1});
  CHECK(m.precision == 0.0);
  CHECK(m.precision_undefined);
  CHECK(m.recall == 0.0);
  auto m2 = metrics::classify_metrics({0, 0}, {0, 0});
  CHECK(m2.accuracy == 1.0);
  CHECK(m2.recall_undefined);
}

TEST_CASE("resample endpoints and identity") {
  std::vector<double> x = {0.0, 1.0, 2.0, 3.0};
  auto same = metrics::resample(x, 4);
  CHECK(same == x);
  auto up = metrics::resample({0.0, 1.0}, 5);
  CHECK(up.front() == doctest::Approx(0.0));
  CHECK(up.back() == doctest::Approx(1.0));
  CHECK(up[2] == doctest::Approx(0.5));
}

TEST_CASE("correlation experiment finds a tonic-linked target") {
  // Arousal is a linear function of the tonic mean level.
  std::mt19937_64 rng(21);
  std::normal_distribution<double> noise(0.0, 0.01);
  std::vector<metrics::RegressionItem> items;
  for (int i = 0; i < 30; ++i) {
    double level = 0.2 + 0.6 * (static_cast<double>(i) / 29.0);
    metrics::RegressionItem item;
    item.tonic.assign(500, level);
    item.phasic.assign(500, 0.0);
    item.origin.assign(500, level);
    for (auto& v : item.tonic) v += noise(rng);
    for (std::size_t k = 0; k < item.origin.size(); ++k)
      item.origin[k] = item.tonic[k];
    item.arousal = level;
    item.valence = 0.5;
    items.push_back(std::move(item));
  }
  auto rows = metrics::run_correlation_experiment(items, 5);
  bool found = false;
  for (const auto& row : rows)
    if (row.method == "MLR" && row.axis == "arousal" && row.input == "tonic") {
      found = true;
      REQUIRE(row.pearson.has_value());
      CHECK(*row.pearson >= 0.9);
    }
  CHECK(found);
  CHECK(rows.size() == 12);  // 2 methods x 2 axes x 3 inputs
}

TEST_CASE("table1 CSV header") {
  testutil::TempDir tmp;
  std::vector<metrics::RegressionResult> rows = {
      {"MLR", "valence", "tonic", 0.12, 0.34}};
  auto path = tmp.file("t1.csv");
  metrics::write_table1_csv(path, rows);
  CHECK(testutil::read_file(path).rfind("method,axis,input,rmse,r\n", 0) == 0);
}
