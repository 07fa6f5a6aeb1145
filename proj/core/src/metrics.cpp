#include "resin/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

#include "resin/csv.hpp"

namespace resin::metrics {

namespace {

struct Biquad {
  double b0, b1, b2, a1, a2;
};

Biquad butter2_lowpass(double cutoff_hz, double rate_hz) {
  if (cutoff_hz <= 0.0 || cutoff_hz >= rate_hz / 2.0)
    throw std::invalid_argument("cutoff must lie in (0, Nyquist)");
  double wc = std::tan(std::numbers::pi * cutoff_hz / rate_hz);
  double k1 = std::numbers::sqrt2 * wc;
  double k2 = wc * wc;
  double a0 = 1.0 + k1 + k2;
  return {k2 / a0, 2.0 * k2 / a0, k2 / a0, 2.0 * (k2 - 1.0) / a0,
          (1.0 - k1 + k2) / a0};
}

std::vector<double> filter_once(const Biquad& f, const std::vector<double>& x) {
  std::vector<double> y(x.size());
  if (x.empty()) return y;
  // Steady-state initial conditions for a step of height x[0]: kills the
  // zero-state transient so constant inputs pass through exactly.
  double x1 = x[0], x2 = x[0];
  double dc = (f.b0 + f.b1 + f.b2) / (1.0 + f.a1 + f.a2);
  double y1 = x[0] * dc, y2 = y1;
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = f.b0 * x[i] + f.b1 * x1 + f.b2 * x2 - f.a1 * y1 - f.a2 * y2;
    x2 = x1;
    x1 = x[i];
    y2 = y1;
    y1 = y[i];
  }
  return y;
}

}  // namespace

std::vector<double> lowpass(const std::vector<double>& signal, double cutoff_hz,
                            double rate_hz) {
  if (signal.empty()) return {};
  Biquad f = butter2_lowpass(cutoff_hz, rate_hz);
  const std::size_t n = signal.size();
  const std::size_t pad = std::min(n - 1, static_cast<std::size_t>(5 * rate_hz));

  // Odd extension at both ends to suppress edge transients.
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i)
    ext.push_back(2.0 * signal.front() - signal[i]);
  ext.insert(ext.end(), signal.begin(), signal.end());
  for (std::size_t i = 1; i <= pad; ++i)
    ext.push_back(2.0 * signal.back() - signal[n - 1 - i]);

  std::vector<double> fwd = filter_once(f, ext);
  std::reverse(fwd.begin(), fwd.end());
  std::vector<double> bwd = filter_once(f, fwd);
  std::reverse(bwd.begin(), bwd.end());
  return {bwd.begin() + static_cast<std::ptrdiff_t>(pad),
          bwd.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

ZscoreStats fit_zscore(const Eigen::MatrixXd& X) {
  ZscoreStats s;
  s.mean = X.colwise().mean();
  Eigen::MatrixXd centered = X.rowwise() - s.mean.transpose();
  s.std = (centered.array().square().colwise().mean()).sqrt();
  return s;
}

Eigen::MatrixXd apply_zscore(const Eigen::MatrixXd& X, const ZscoreStats& s) {
  Eigen::MatrixXd out(X.rows(), X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    if (s.std[j] < 1e-8)
      out.col(j).setZero();
    else
      out.col(j) = (X.col(j).array() - s.mean[j]) / s.std[j];
  }
  return out;
}

LinearModel fit_mlr(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.rows() == 0 || X.rows() != y.size())
    throw std::invalid_argument("fit_mlr: bad dimensions");
  Eigen::MatrixXd Xa(X.rows(), X.cols() + 1);
  Xa << X, Eigen::VectorXd::Ones(X.rows());
  Eigen::MatrixXd A = Xa.transpose() * Xa;
  A.diagonal().array() += 1e-8;
  Eigen::VectorXd w = A.ldlt().solve(Xa.transpose() * y);
  LinearModel m;
  m.weights = w.head(X.cols());
  m.intercept = w[X.cols()];
  return m;
}

namespace {

// Deterministic subgradient descent; restarted from fixed seeds, keep best.
template <typename ObjGrad>
LinearModel descend(Eigen::Index dim, ObjGrad obj_grad, double* best_obj_out) {
  LinearModel best;
  double best_obj = std::numeric_limits<double>::infinity();
  for (std::uint64_t restart = 0; restart < 5; ++restart) {
    std::mt19937_64 rng(restart * 7919 + 13);
    std::normal_distribution<double> init(0.0, restart == 0 ? 0.0 : 0.1);
    Eigen::VectorXd w(dim);
    for (Eigen::Index i = 0; i < dim; ++i) w[i] = init(rng);
    double b = 0.0;
    const int iters = 4000;
    for (int t = 0; t < iters; ++t) {
      double step = 0.5 / (1.0 + static_cast<double>(t) / 200.0);
      Eigen::VectorXd gw;
      double gb;
      obj_grad(w, b, &gw, &gb, nullptr);
      w -= step * gw;
      b -= step * gb;
    }
    double obj;
    obj_grad(w, b, nullptr, nullptr, &obj);
    if (obj < best_obj) {
      best_obj = obj;
      best.weights = w;
      best.intercept = b;
    }
  }
  if (best_obj_out) *best_obj_out = best_obj;
  return best;
}

}  // namespace

double svr_objective(const LinearModel& m, const Eigen::MatrixXd& X,
                     const Eigen::VectorXd& y, double epsilon, double C) {
  double loss = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    double r = std::abs(X.row(i).dot(m.weights) + m.intercept - y[i]);
    loss += std::max(0.0, r - epsilon);
  }
  return 0.5 * m.weights.squaredNorm() +
         C * loss / static_cast<double>(X.rows());
}

LinearModel fit_linear_svr(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                           double epsilon, double C) {
  if (X.rows() < 2) throw std::invalid_argument("fit_linear_svr: n >= 2");
  auto og = [&](const Eigen::VectorXd& w, double b, Eigen::VectorXd* gw,
                double* gb, double* obj) {
    if (obj) {
      LinearModel m{w, b};
      *obj = svr_objective(m, X, y, epsilon, C);
      return;
    }
    *gw = w;
    *gb = 0.0;
    double inv_n = 1.0 / static_cast<double>(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      double r = X.row(i).dot(w) + b - y[i];
      if (std::abs(r) > epsilon) {
        double s = r > 0 ? 1.0 : -1.0;
        *gw += C * inv_n * s * X.row(i).transpose();
        *gb += C * inv_n * s;
      }
    }
  };
  return descend(X.cols(), og, nullptr);
}

double svm_objective(const LinearModel& m, const Eigen::MatrixXd& X,
                     const std::vector<int>& y_bits, double C) {
  double loss = 0.0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    double yi = y_bits[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0;
    loss += std::max(0.0, 1.0 - yi * (X.row(i).dot(m.weights) + m.intercept));
  }
  return 0.5 * m.weights.squaredNorm() +
         C * loss / static_cast<double>(X.rows());
}

LinearModel fit_linear_svm(const Eigen::MatrixXd& X,
                           const std::vector<int>& y_bits, double C) {
  if (X.rows() < 2 || static_cast<Eigen::Index>(y_bits.size()) != X.rows())
    throw std::invalid_argument("fit_linear_svm: bad dimensions");
  bool has0 = false, has1 = false;
  for (int b : y_bits) (b == 1 ? has1 : has0) = true;
  if (!has0 || !has1)
    throw std::invalid_argument("fit_linear_svm: both classes required");
  auto og = [&](const Eigen::VectorXd& w, double b, Eigen::VectorXd* gw,
                double* gb, double* obj) {
    if (obj) {
      LinearModel m{w, b};
      *obj = svm_objective(m, X, y_bits, C);
      return;
    }
    *gw = w;
    *gb = 0.0;
    double inv_n = 1.0 / static_cast<double>(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      double yi = y_bits[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0;
      if (yi * (X.row(i).dot(w) + b) < 1.0) {
        *gw -= C * inv_n * yi * X.row(i).transpose();
        *gb -= C * inv_n * yi;
      }
    }
  };
  return descend(X.cols(), og, nullptr);
}

double predict_value(const LinearModel& m, const Eigen::VectorXd& x) {
  return x.dot(m.weights) + m.intercept;
}

int predict_class(const LinearModel& m, const Eigen::VectorXd& x) {
  return predict_value(m, x) > 0.0 ? 1 : 0;
}

double rmse(const std::vector<double>& pred,
            const std::vector<double>& target) {
  if (pred.size() != target.size() || pred.empty())
    throw std::invalid_argument("rmse: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    double d = pred[i] - target[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(pred.size()));
}

std::optional<double> pearson_r(const std::vector<double>& a,
                                const std::vector<double>& b) {
  if (a.size() != b.size() || a.empty())
    throw std::invalid_argument("pearson_r: length mismatch");
  double n = static_cast<double>(a.size());
  double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa <= 0.0 || sbb <= 0.0) return std::nullopt;
  return sab / std::sqrt(saa * sbb);
}

ClassificationMetrics classify_metrics(const std::vector<int>& pred_bits,
                                       const std::vector<int>& true_bits) {
  if (pred_bits.size() != true_bits.size() || pred_bits.empty())
    throw std::invalid_argument("classify_metrics: length mismatch");
  ClassificationMetrics m;
  for (std::size_t i = 0; i < pred_bits.size(); ++i) {
    if (pred_bits[i] == 1 && true_bits[i] == 1) ++m.tp;
    else if (pred_bits[i] == 1) ++m.fp;
    else if (true_bits[i] == 1) ++m.fn;
    else ++m.tn;
  }
  double total = static_cast<double>(pred_bits.size());
  m.accuracy = static_cast<double>(m.tp + m.tn) / total;
  if (m.tp + m.fp == 0) {
    m.precision_undefined = true;
  } else {
    m.precision = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
  }
  if (m.tp + m.fn == 0) {
    m.recall_undefined = true;
  } else {
    m.recall = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
  }
  if (m.precision + m.recall > 0.0)
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

std::vector<double> resample(const std::vector<double>& x,
                             std::size_t out_len) {
  if (x.empty() || out_len < 2)
    throw std::invalid_argument("resample: bad sizes");
  std::vector<double> out(out_len);
  if (x.size() == 1) {
    std::fill(out.begin(), out.end(), x[0]);
    return out;
  }
  double scale = static_cast<double>(x.size() - 1) /
                 static_cast<double>(out_len - 1);
  for (std::size_t i = 0; i < out_len; ++i) {
    double pos = static_cast<double>(i) * scale;
    auto j = static_cast<std::size_t>(pos);
    if (j >= x.size() - 1) j = x.size() - 2;
    double f = pos - static_cast<double>(j);
    out[i] = (1.0 - f) * x[j] + f * x[j + 1];
  }
  return out;
}

std::vector<RegressionResult> run_correlation_experiment(
    const std::vector<RegressionItem>& items, int folds, double rate_hz) {
  if (static_cast<int>(items.size()) < folds || folds < 2)
    throw std::invalid_argument("need at least `folds` items");
  constexpr std::size_t kFeatLen = 256;

  std::vector<RegressionResult> results;
  const char* methods[] = {"MLR", "SVR"};
  const char* axes[] = {"valence", "arousal"};
  const char* inputs[] = {"origin", "tonic", "phasic"};

  // Features once per input channel.
  std::map<std::string, Eigen::MatrixXd> features;
  for (const char* input : inputs) {
    Eigen::MatrixXd X(static_cast<Eigen::Index>(items.size()), kFeatLen);
    for (std::size_t i = 0; i < items.size(); ++i) {
      const auto& it = items[i];
      const std::vector<double>& raw = std::string(input) == "origin"
                                           ? it.origin
                                           : std::string(input) == "tonic"
                                                 ? it.tonic
                                                 : it.phasic;
      auto feat = resample(lowpass(raw, 0.6, rate_hz), kFeatLen);
      for (std::size_t j = 0; j < kFeatLen; ++j)
        X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = feat[j];
    }
    features.emplace(input, std::move(X));
  }

  for (const char* method : methods)
    for (const char* axis : axes)
      for (const char* input : inputs) {
        const Eigen::MatrixXd& X = features.at(input);
        std::vector<double> preds, trues;
        for (int fold = 0; fold < folds; ++fold) {
          std::vector<Eigen::Index> train_idx, test_idx;
          for (std::size_t i = 0; i < items.size(); ++i)
            (static_cast<int>(i % static_cast<std::size_t>(folds)) == fold
                 ? test_idx
                 : train_idx)
                .push_back(static_cast<Eigen::Index>(i));
          Eigen::MatrixXd Xtr(static_cast<Eigen::Index>(train_idx.size()),
                              X.cols());
          Eigen::VectorXd ytr(static_cast<Eigen::Index>(train_idx.size()));
          for (std::size_t i = 0; i < train_idx.size(); ++i) {
            Xtr.row(static_cast<Eigen::Index>(i)) = X.row(train_idx[i]);
            const auto& item = items[static_cast<std::size_t>(train_idx[i])];
            ytr[static_cast<Eigen::Index>(i)] =
                std::string(axis) == "valence" ? item.valence : item.arousal;
          }
          ZscoreStats stats = fit_zscore(Xtr);
          Eigen::MatrixXd Xtr_z = apply_zscore(Xtr, stats);
          LinearModel model = std::string(method) == "MLR"
                                  ? fit_mlr(Xtr_z, ytr)
                                  : fit_linear_svr(Xtr_z, ytr);
          for (Eigen::Index i : test_idx) {
            Eigen::MatrixXd row = apply_zscore(X.row(i), stats);
            preds.push_back(predict_value(model, row.row(0)));
            const auto& item = items[static_cast<std::size_t>(i)];
            trues.push_back(std::string(axis) == "valence" ? item.valence
                                                           : item.arousal);
          }
        }
        RegressionResult r;
        r.method = method;
        r.axis = axis;
        r.input = input;
        r.rmse = rmse(preds, trues);
        r.pearson = pearson_r(preds, trues);
        results.push_back(std::move(r));
      }
  return results;
}

void write_table1_csv(const std::string& path,
                      const std::vector<RegressionResult>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "method,axis,input,rmse,r\n";
  for (const auto& r : rows)
    out << r.method << ',' << r.axis << ',' << r.input << ','
        << csv::format_double(r.rmse) << ','
        << (r.pearson ? csv::format_double(*r.pearson) : "undefined") << "\n";
}

}  // namespace resin::metrics
