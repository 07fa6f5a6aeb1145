#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace resin::metrics {

// Zero-phase 2nd-order Butterworth lowpass (forward-backward), DC gain 1.
std::vector<double> lowpass(const std::vector<double>& signal,
                            double cutoff_hz = 0.6, double rate_hz = 50.0);

struct ZscoreStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;  // population std; features with std < 1e-8 map to 0
};

ZscoreStats fit_zscore(const Eigen::MatrixXd& X);
Eigen::MatrixXd apply_zscore(const Eigen::MatrixXd& X, const ZscoreStats& s);

// Least squares with ridge 1e-8; an intercept column is added internally.
struct LinearModel {
  Eigen::VectorXd weights;  // without intercept
  double intercept = 0.0;
};

LinearModel fit_mlr(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

LinearModel fit_linear_svr(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                           double epsilon = 0.1, double C = 1.0);
// y_bits in {0,1}; throws if only one class is present.
LinearModel fit_linear_svm(const Eigen::MatrixXd& X,
                           const std::vector<int>& y_bits, double C = 1.0);

double predict_value(const LinearModel& m, const Eigen::VectorXd& x);
int predict_class(const LinearModel& m, const Eigen::VectorXd& x);

double svr_objective(const LinearModel& m, const Eigen::MatrixXd& X,
                     const Eigen::VectorXd& y, double epsilon, double C);
double svm_objective(const LinearModel& m, const Eigen::MatrixXd& X,
                     const std::vector<int>& y_bits, double C);

double rmse(const std::vector<double>& pred, const std::vector<double>& target);
std::optional<double> pearson_r(const std::vector<double>& a,
                                const std::vector<double>& b);

struct ClassificationMetrics {
  double accuracy = 0.0, f1 = 0.0, precision = 0.0, recall = 0.0;
  long tp = 0, fp = 0, tn = 0, fn = 0;
  bool precision_undefined = false, recall_undefined = false;
};

// Positive class = 1 (high).
ClassificationMetrics classify_metrics(const std::vector<int>& pred_bits,
                                       const std::vector<int>& true_bits);

// Linear resample to a fixed length (corner-aligned interpolation).
std::vector<double> resample(const std::vector<double>& x, std::size_t out_len);

// ------------------------------------------------------ regression harness

struct RegressionItem {
  std::vector<double> origin, phasic, tonic;
  double valence = 0.0, arousal = 0.0;
};

struct RegressionResult {
  std::string method;  // MLR | SVR
  std::string axis;    // valence | arousal
  std::string input;   // origin | tonic | phasic
  double rmse = 0.0;
  std::optional<double> pearson;
};

// Per (method x axis x input): lowpass -> resample 256 -> z-score on train
// folds -> fit -> test-fold RMSE and Pearson, averaged over folds.
std::vector<RegressionResult> run_correlation_experiment(
    const std::vector<RegressionItem>& items, int folds,
    double rate_hz = 50.0);

void write_table1_csv(const std::string& path,
                      const std::vector<RegressionResult>& rows);

}  // namespace resin::metrics
