#include "resin/gradcheck.hpp"

#include <cmath>
#include <random>

namespace resin::nn {

namespace {

constexpr double kStep = 1e-5;

double rel_error(double analytic, double numeric) {
  double denom = std::max({1e-6, std::abs(analytic), std::abs(numeric)});
  return std::abs(analytic - numeric) / denom;
}

// Central differences over every entry of `storage`, compared against
// `analytic`. `eval` recomputes the scalar loss from the current storage.
double check_block(std::vector<double>& storage,
                   const std::vector<double>& analytic,
                   const std::function<double()>& eval) {
  double worst = 0.0;
  for (std::size_t i = 0; i < storage.size(); ++i) {
    double saved = storage[i];
    storage[i] = saved + kStep;
    double up = eval();
    storage[i] = saved - kStep;
    double down = eval();
    storage[i] = saved;
    double numeric = (up - down) / (2.0 * kStep);
    worst = std::max(worst, rel_error(analytic[i], numeric));
  }
  return worst;
}

Vol random_vol(int c, int h, int w, std::mt19937_64& rng) {
  Vol v(c, h, w);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (double& x : v.data) x = dist(rng);
  return v;
}

std::vector<double> random_coeffs(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> c(n);
  for (double& x : c) x = dist(rng);
  return c;
}

double dot(const std::vector<double>& c, const Vol& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) s += c[i] * v.data[i];
  return s;
}

double dot(const std::vector<double>& c, const Eigen::VectorXd& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i)
    s += c[i] * v[static_cast<Eigen::Index>(i)];
  return s;
}

// Checks a Vol -> Vol layer: loss = c . layer(x), gradients for every
// parameter block and the input.
template <typename Layer>
GradCheckResult check_vol_layer(const std::string& name, Layer& layer, Vol x,
                                std::mt19937_64& rng) {
  Vol out0 = layer.forward(x);
  auto coeffs = random_coeffs(out0.data.size(), rng);
  auto eval = [&]() { return dot(coeffs, layer.forward(x)); };

  // Analytic pass.
  for (auto& b : layer.params())
    std::fill(b.grads->begin(), b.grads->end(), 0.0);
  layer.forward(x);
  Vol grad_out(out0.c, out0.h, out0.w);
  grad_out.data = coeffs;
  Vol grad_in = layer.backward(grad_out);

  double worst = 0.0;
  for (auto& b : layer.params()) {
    std::vector<double> analytic = *b.grads;
    worst = std::max(worst, check_block(*b.values, analytic, eval));
  }
  worst = std::max(worst, check_block(x.data, grad_in.data, eval));
  return {name, worst};
}

struct ReluAdapter {
  ReluVol relu;
  Vol forward(const Vol& v) { return relu.forward(v); }
  Vol backward(const Vol& g) { return relu.backward(g); }
  std::vector<ParamBlock> params() { return {}; }
};

GradCheckResult check_maxpool(std::mt19937_64& rng) {
  MaxPool2 pool;
  Vol x = random_vol(2, 6, 8, rng);
  Vol out0 = pool.forward(x);
  auto coeffs = random_coeffs(out0.data.size(), rng);
  auto eval = [&]() { return dot(coeffs, pool.forward(x)); };
  pool.forward(x);
  Vol grad_out(out0.c, out0.h, out0.w);
  grad_out.data = coeffs;
  Vol grad_in = pool.backward(grad_out);
  return {"maxpool2", check_block(x.data, grad_in.data, eval)};
}

GradCheckResult check_gap(std::mt19937_64& rng) {
  GlobalAvgPool gap;
  Vol x = random_vol(3, 5, 4, rng);
  Eigen::VectorXd out0 = gap.forward(x);
  auto coeffs = random_coeffs(static_cast<std::size_t>(out0.size()), rng);
  auto eval = [&]() { return dot(coeffs, gap.forward(x)); };
  gap.forward(x);
  Eigen::VectorXd grad_out(out0.size());
  for (Eigen::Index i = 0; i < grad_out.size(); ++i)
    grad_out[i] = coeffs[static_cast<std::size_t>(i)];
  Vol grad_in = gap.backward(grad_out);
  return {"global_avg_pool", check_block(x.data, grad_in.data, eval)};
}

GradCheckResult check_linear(std::mt19937_64& rng) {
  Linear lin(7, 4, rng);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> xs(7);
  for (double& v : xs) v = dist(rng);
  auto coeffs = random_coeffs(4, rng);
  auto eval = [&]() {
    Eigen::VectorXd x = Eigen::Map<Eigen::VectorXd>(xs.data(), 7);
    return dot(coeffs, lin.forward(x));
  };
  for (auto& b : lin.params()) std::fill(b.grads->begin(), b.grads->end(), 0.0);
  eval();
  Eigen::VectorXd grad_out(4);
  for (int i = 0; i < 4; ++i) grad_out[i] = coeffs[static_cast<std::size_t>(i)];
  Eigen::VectorXd grad_in = lin.backward(grad_out);
  double worst = 0.0;
  for (auto& b : lin.params()) {
    std::vector<double> analytic = *b.grads;
    worst = std::max(worst, check_block(*b.values, analytic, eval));
  }
  std::vector<double> gin(grad_in.data(), grad_in.data() + grad_in.size());
  worst = std::max(worst, check_block(xs, gin, eval));
  return {"linear", worst};
}

GradCheckResult check_subnet(std::mt19937_64& rng) {
  ResSiConfig cfg;
  cfg.stage_channels = {2, 3, 4, 5};
  cfg.blocks_per_stage = 1;
  Subnet net(cfg, rng);
  Vol x = random_vol(3, 16, 16, rng);
  Eigen::VectorXd out0 = net.forward(x);
  auto coeffs = random_coeffs(static_cast<std::size_t>(out0.size()), rng);
  auto eval = [&]() { return dot(coeffs, net.forward(x)); };
  for (auto& b : net.params()) std::fill(b.grads->begin(), b.grads->end(), 0.0);
  net.forward(x);
  Eigen::VectorXd grad_out(out0.size());
  for (Eigen::Index i = 0; i < grad_out.size(); ++i)
    grad_out[i] = coeffs[static_cast<std::size_t>(i)];
  Vol grad_in = net.backward(grad_out);
  double worst = 0.0;
  for (auto& b : net.params()) {
    std::vector<double> analytic = *b.grads;
    worst = std::max(worst, check_block(*b.values, analytic, eval));
  }
  worst = std::max(worst, check_block(x.data, grad_in.data, eval));
  return {"subnet_tiny", worst};
}

// Full fused head with softmax + cross-entropy on top; the combined
// gradient is probs - onehot.
GradCheckResult check_fused_head(std::mt19937_64& rng) {
  const int eda_dim = 5, music_dim = 6, hidden = 8;
  FusionHead head(eda_dim, music_dim, hidden, rng);
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::VectorXd mean(eda_dim + music_dim), stddev(eda_dim + music_dim);
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    mean[i] = dist(rng);
    stddev[i] = 0.5 + std::abs(dist(rng));
  }
  head.set_stats(mean, stddev);

  std::vector<double> eda(eda_dim), music(music_dim);
  for (double& v : eda) v = dist(rng);
  for (double& v : music) v = dist(rng);
  const int label = 1;
  auto eval = [&]() {
    Eigen::VectorXd e = Eigen::Map<Eigen::VectorXd>(eda.data(), eda_dim);
    Eigen::VectorXd m = Eigen::Map<Eigen::VectorXd>(music.data(), music_dim);
    return cross_entropy(head.forward(e, m), label);
  };
  for (auto& b : head.params())
    std::fill(b.grads->begin(), b.grads->end(), 0.0);
  {
    Eigen::VectorXd e = Eigen::Map<Eigen::VectorXd>(eda.data(), eda_dim);
    Eigen::VectorXd m = Eigen::Map<Eigen::VectorXd>(music.data(), music_dim);
    Eigen::Vector2d probs = head.forward(e, m);
    Eigen::Vector2d grad_logits = probs;
    grad_logits[label] -= 1.0;
    Eigen::VectorXd ge, gm;
    head.backward(grad_logits, ge, gm);
    double worst = 0.0;
    for (auto& b : head.params()) {
      std::vector<double> analytic = *b.grads;
      worst = std::max(worst, check_block(*b.values, analytic, eval));
    }
    std::vector<double> ge_v(ge.data(), ge.data() + ge.size());
    std::vector<double> gm_v(gm.data(), gm.data() + gm.size());
    worst = std::max(worst, check_block(eda, ge_v, eval));
    worst = std::max(worst, check_block(music, gm_v, eval));
    return {"fused_head", worst};
  }
}

}  // namespace

std::vector<GradCheckResult> gradient_check_suite(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<GradCheckResult> results;

  {
    Conv3x3 conv(2, 3, 1, rng);
    results.push_back(
        check_vol_layer("conv3x3_s1", conv, random_vol(2, 6, 7, rng), rng));
  }
  {
    Conv3x3 conv(2, 3, 2, rng);
    results.push_back(
        check_vol_layer("conv3x3_s2", conv, random_vol(2, 7, 6, rng), rng));
  }
  {
    Conv1x1 conv(3, 2, 2, rng);
    results.push_back(
        check_vol_layer("conv1x1_s2", conv, random_vol(3, 6, 6, rng), rng));
  }
  {
    ReluAdapter relu;
    results.push_back(
        check_vol_layer("relu", relu, random_vol(2, 5, 5, rng), rng));
  }
  results.push_back(check_maxpool(rng));
  results.push_back(check_gap(rng));
  results.push_back(check_linear(rng));
  {
    ResidualBlock block(3, 3, 1, rng);
    results.push_back(check_vol_layer("residual_block_identity", block,
                                      random_vol(3, 6, 6, rng), rng));
  }
  {
    ResidualBlock block(2, 4, 2, rng);
    results.push_back(check_vol_layer("residual_block_downsample", block,
                                      random_vol(2, 6, 6, rng), rng));
  }
  results.push_back(check_subnet(rng));
  results.push_back(check_fused_head(rng));
  return results;
}

}  // namespace resin::nn
