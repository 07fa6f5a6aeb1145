#include "resin/nn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "json.hpp"
#include "resin/errors.hpp"

namespace resin::nn {

namespace {

std::vector<double> he_init(std::size_t count, std::size_t fan_in,
                            std::mt19937_64& rng) {
  std::normal_distribution<double> dist(
      0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
  std::vector<double> w(count);
  for (double& v : w) v = dist(rng);
  return w;
}

int conv_out(int in, int pad, int kernel, int stride) {
  return (in + 2 * pad - kernel) / stride + 1;
}

}  // namespace

// ---------------------------------------------------------------- Conv3x3

Conv3x3::Conv3x3(int in_c, int out_c, int stride, std::mt19937_64& rng)
    : in_c_(in_c), out_c_(out_c), stride_(stride) {
  auto count = static_cast<std::size_t>(out_c) * in_c * 9;
  w_ = he_init(count, static_cast<std::size_t>(in_c) * 9, rng);
  b_.assign(static_cast<std::size_t>(out_c), 0.0);
  gw_.assign(count, 0.0);
  gb_.assign(static_cast<std::size_t>(out_c), 0.0);
}

Vol Conv3x3::forward(const Vol& in) {
  if (in.c != in_c_) throw std::invalid_argument("Conv3x3: channel mismatch");
  in_cache_ = in;
  int oh = conv_out(in.h, 1, 3, stride_);
  int ow = conv_out(in.w, 1, 3, stride_);
  Vol out(out_c_, oh, ow);
  for (int oc = 0; oc < out_c_; ++oc) {
    const double* wc = &w_[static_cast<std::size_t>(oc) * in_c_ * 9];
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox) {
        double acc = b_[static_cast<std::size_t>(oc)];
        for (int ic = 0; ic < in_c_; ++ic)
          for (int ky = 0; ky < 3; ++ky) {
            int iy = oy * stride_ + ky - 1;
            if (iy < 0 || iy >= in.h) continue;
            for (int kx = 0; kx < 3; ++kx) {
              int ix = ox * stride_ + kx - 1;
              if (ix < 0 || ix >= in.w) continue;
              acc += wc[(ic * 3 + ky) * 3 + kx] * in.at(ic, iy, ix);
            }
          }
        out.at(oc, oy, ox) = acc;
      }
  }
  return out;
}

Vol Conv3x3::backward(const Vol& grad_out) {
  const Vol& in = in_cache_;
  Vol grad_in(in.c, in.h, in.w);
  for (int oc = 0; oc < out_c_; ++oc) {
    const double* wc = &w_[static_cast<std::size_t>(oc) * in_c_ * 9];
    double* gwc = &gw_[static_cast<std::size_t>(oc) * in_c_ * 9];
    for (int oy = 0; oy < grad_out.h; ++oy)
      for (int ox = 0; ox < grad_out.w; ++ox) {
        double g = grad_out.at(oc, oy, ox);
        if (g == 0.0) continue;
        gb_[static_cast<std::size_t>(oc)] += g;
        for (int ic = 0; ic < in_c_; ++ic)
          for (int ky = 0; ky < 3; ++ky) {
            int iy = oy * stride_ + ky - 1;
            if (iy < 0 || iy >= in.h) continue;
            for (int kx = 0; kx < 3; ++kx) {
              int ix = ox * stride_ + kx - 1;
              if (ix < 0 || ix >= in.w) continue;
              gwc[(ic * 3 + ky) * 3 + kx] += g * in.at(ic, iy, ix);
              grad_in.at(ic, iy, ix) += g * wc[(ic * 3 + ky) * 3 + kx];
            }
          }
      }
  }
  return grad_in;
}

std::vector<ParamBlock> Conv3x3::params() {
  return {{&w_, &gw_}, {&b_, &gb_}};
}

// ---------------------------------------------------------------- Conv1x1

Conv1x1::Conv1x1(int in_c, int out_c, int stride, std::mt19937_64& rng)
    : in_c_(in_c), out_c_(out_c), stride_(stride) {
  auto count = static_cast<std::size_t>(out_c) * in_c;
  w_ = he_init(count, static_cast<std::size_t>(in_c), rng);
  b_.assign(static_cast<std::size_t>(out_c), 0.0);
  gw_.assign(count, 0.0);
  gb_.assign(static_cast<std::size_t>(out_c), 0.0);
}

Vol Conv1x1::forward(const Vol& in) {
  if (in.c != in_c_) throw std::invalid_argument("Conv1x1: channel mismatch");
  in_cache_ = in;
  int oh = conv_out(in.h, 0, 1, stride_);
  int ow = conv_out(in.w, 0, 1, stride_);
  Vol out(out_c_, oh, ow);
  for (int oc = 0; oc < out_c_; ++oc)
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox) {
        double acc = b_[static_cast<std::size_t>(oc)];
        for (int ic = 0; ic < in_c_; ++ic)
          acc += w_[static_cast<std::size_t>(oc) * in_c_ + ic] *
                 in.at(ic, oy * stride_, ox * stride_);
        out.at(oc, oy, ox) = acc;
      }
  return out;
}

Vol Conv1x1::backward(const Vol& grad_out) {
  const Vol& in = in_cache_;
  Vol grad_in(in.c, in.h, in.w);
  for (int oc = 0; oc < out_c_; ++oc)
    for (int oy = 0; oy < grad_out.h; ++oy)
      for (int ox = 0; ox < grad_out.w; ++ox) {
        double g = grad_out.at(oc, oy, ox);
        gb_[static_cast<std::size_t>(oc)] += g;
        for (int ic = 0; ic < in_c_; ++ic) {
          gw_[static_cast<std::size_t>(oc) * in_c_ + ic] +=
              g * in.at(ic, oy * stride_, ox * stride_);
          grad_in.at(ic, oy * stride_, ox * stride_) +=
              g * w_[static_cast<std::size_t>(oc) * in_c_ + ic];
        }
      }
  return grad_in;
}

std::vector<ParamBlock> Conv1x1::params() {
  return {{&w_, &gw_}, {&b_, &gb_}};
}

// ------------------------------------------------------------------- ReLU

Vol ReluVol::forward(const Vol& in) {
  Vol out = in;
  for (double& v : out.data) v = v > 0.0 ? v : 0.0;
  out_cache_ = out;
  return out;
}

Vol ReluVol::backward(const Vol& grad_out) {
  Vol grad_in = grad_out;
  for (std::size_t i = 0; i < grad_in.data.size(); ++i)
    if (out_cache_.data[i] == 0.0) grad_in.data[i] = 0.0;
  return grad_in;
}

// ---------------------------------------------------------------- MaxPool2

Vol MaxPool2::forward(const Vol& in) {
  in_h_ = in.h;
  in_w_ = in.w;
  out_c_ = in.c;
  out_h_ = in.h / 2;
  out_w_ = in.w / 2;
  Vol out(out_c_, out_h_, out_w_);
  argmax_.assign(out.data.size(), 0);
  std::size_t idx = 0;
  for (int c = 0; c < out_c_; ++c)
    for (int oy = 0; oy < out_h_; ++oy)
      for (int ox = 0; ox < out_w_; ++ox, ++idx) {
        double best = -std::numeric_limits<double>::infinity();
        std::size_t best_at = 0;
        for (int dy = 0; dy < 2; ++dy)
          for (int dx = 0; dx < 2; ++dx) {
            int iy = oy * 2 + dy, ix = ox * 2 + dx;
            double v = in.at(c, iy, ix);
            if (v > best) {
              best = v;
              best_at = (static_cast<std::size_t>(c) * in.h + iy) * in.w + ix;
            }
          }
        out.data[idx] = best;
        argmax_[idx] = best_at;
      }
  return out;
}

Vol MaxPool2::backward(const Vol& grad_out) {
  Vol grad_in(out_c_, in_h_, in_w_);
  for (std::size_t i = 0; i < grad_out.data.size(); ++i)
    grad_in.data[argmax_[i]] += grad_out.data[i];
  return grad_in;
}

// ----------------------------------------------------------- GlobalAvgPool

Eigen::VectorXd GlobalAvgPool::forward(const Vol& in) {
  c_ = in.c;
  h_ = in.h;
  w_ = in.w;
  Eigen::VectorXd out(in.c);
  double inv = 1.0 / (static_cast<double>(in.h) * in.w);
  for (int c = 0; c < in.c; ++c) {
    double sum = 0.0;
    for (int y = 0; y < in.h; ++y)
      for (int x = 0; x < in.w; ++x) sum += in.at(c, y, x);
    out[c] = sum * inv;
  }
  return out;
}

Vol GlobalAvgPool::backward(const Eigen::VectorXd& grad_out) {
  Vol grad_in(c_, h_, w_);
  double inv = 1.0 / (static_cast<double>(h_) * w_);
  for (int c = 0; c < c_; ++c) {
    double g = grad_out[c] * inv;
    for (int y = 0; y < h_; ++y)
      for (int x = 0; x < w_; ++x) grad_in.at(c, y, x) = g;
  }
  return grad_in;
}

// ----------------------------------------------------------------- Linear

Linear::Linear(int in_dim, int out_dim, std::mt19937_64& rng)
    : in_dim_(in_dim), out_dim_(out_dim) {
  auto count = static_cast<std::size_t>(out_dim) * in_dim;
  w_ = he_init(count, static_cast<std::size_t>(in_dim), rng);
  b_.assign(static_cast<std::size_t>(out_dim), 0.0);
  gw_.assign(count, 0.0);
  gb_.assign(static_cast<std::size_t>(out_dim), 0.0);
}

Eigen::VectorXd Linear::forward(const Eigen::VectorXd& in) {
  if (in.size() != in_dim_) throw std::invalid_argument("Linear: dim mismatch");
  in_cache_ = in;
  Eigen::VectorXd out(out_dim_);
  for (int o = 0; o < out_dim_; ++o) {
    double acc = b_[static_cast<std::size_t>(o)];
    const double* row = &w_[static_cast<std::size_t>(o) * in_dim_];
    for (int i = 0; i < in_dim_; ++i) acc += row[i] * in[i];
    out[o] = acc;
  }
  return out;
}

Eigen::VectorXd Linear::backward(const Eigen::VectorXd& grad_out) {
  Eigen::VectorXd grad_in = Eigen::VectorXd::Zero(in_dim_);
  for (int o = 0; o < out_dim_; ++o) {
    double g = grad_out[o];
    gb_[static_cast<std::size_t>(o)] += g;
    double* grow = &gw_[static_cast<std::size_t>(o) * in_dim_];
    const double* row = &w_[static_cast<std::size_t>(o) * in_dim_];
    for (int i = 0; i < in_dim_; ++i) {
      grow[i] += g * in_cache_[i];
      grad_in[i] += g * row[i];
    }
  }
  return grad_in;
}

std::vector<ParamBlock> Linear::params() {
  return {{&w_, &gw_}, {&b_, &gb_}};
}

// ---------------------------------------------------------- ResidualBlock

ResidualBlock::ResidualBlock(int in_c, int out_c, int stride,
                             std::mt19937_64& rng)
    : conv1_(in_c, out_c, stride, rng),
      conv2_(out_c, out_c, 1, rng),
      downsample_(stride != 1 || in_c != out_c) {
  if (downsample_) proj_ = Conv1x1(in_c, out_c, stride, rng);
}

Vol ResidualBlock::forward(const Vol& in) {
  in_cache_ = in;
  Vol f = conv2_.forward(relu1_.forward(conv1_.forward(in)));
  Vol skip = downsample_ ? proj_.forward(in) : in;
  if (f.data.size() != skip.data.size())
    throw std::logic_error("residual shape mismatch");
  Vol sum = f;
  for (std::size_t i = 0; i < sum.data.size(); ++i)
    sum.data[i] += skip.data[i];
  sum_cache_ = sum;
  Vol out = sum;
  for (double& v : out.data) v = v > 0.0 ? v : 0.0;
  return out;
}

Vol ResidualBlock::backward(const Vol& grad_out) {
  Vol grad_sum = grad_out;
  for (std::size_t i = 0; i < grad_sum.data.size(); ++i)
    if (sum_cache_.data[i] <= 0.0) grad_sum.data[i] = 0.0;
  Vol grad_in = conv1_.backward(relu1_.backward(conv2_.backward(grad_sum)));
  if (downsample_) {
    Vol grad_skip = proj_.backward(grad_sum);
    for (std::size_t i = 0; i < grad_in.data.size(); ++i)
      grad_in.data[i] += grad_skip.data[i];
  } else {
    for (std::size_t i = 0; i < grad_in.data.size(); ++i)
      grad_in.data[i] += grad_sum.data[i];
  }
  return grad_in;
}

std::vector<ParamBlock> ResidualBlock::params() {
  auto out = conv1_.params();
  auto p2 = conv2_.params();
  out.insert(out.end(), p2.begin(), p2.end());
  if (downsample_) {
    auto pp = proj_.params();
    out.insert(out.end(), pp.begin(), pp.end());
  }
  return out;
}

// ------------------------------------------------------------------ Subnet

Subnet::Subnet(const ResSiConfig& config, std::mt19937_64& rng)
    : stem_(3, config.stem_channels(), 1, rng), config_(config) {
  int in_c = config.stem_channels();
  for (int stage = 0; stage < 4; ++stage) {
    int out_c = config.stage_channels[static_cast<std::size_t>(stage)];
    for (int b = 0; b < config.blocks_per_stage; ++b) {
      int stride = (stage > 0 && b == 0) ? 2 : 1;
      blocks_.emplace_back(in_c, out_c, stride, rng);
      in_c = out_c;
    }
  }
}

Eigen::VectorXd Subnet::forward(const Vol& in) {
  Vol x = pool_.forward(stem_relu_.forward(stem_.forward(in)));
  for (auto& block : blocks_) x = block.forward(x);
  return gap_.forward(x);
}

Vol Subnet::backward(const Eigen::VectorXd& grad_out) {
  Vol g = gap_.backward(grad_out);
  for (auto it = blocks_.rbegin(); it != blocks_.rend(); ++it)
    g = it->backward(g);
  return stem_.backward(stem_relu_.backward(pool_.backward(g)));
}

std::vector<ParamBlock> Subnet::params() {
  auto out = stem_.params();
  for (auto& block : blocks_) {
    auto p = block.params();
    out.insert(out.end(), p.begin(), p.end());
  }
  return out;
}

// -------------------------------------------------------------- FusionHead

FusionHead::FusionHead(int eda_dim, int music_dim, int hidden,
                       std::mt19937_64& rng)
    : fc1_(eda_dim + music_dim, hidden, rng),
      fc2_(hidden, 2, rng),
      eda_dim_(eda_dim),
      music_dim_(music_dim) {
  stat_mean_ = Eigen::VectorXd::Zero(eda_dim + music_dim);
  stat_std_ = Eigen::VectorXd::Ones(eda_dim + music_dim);
}

void FusionHead::set_stats(const Eigen::VectorXd& mean,
                           const Eigen::VectorXd& std) {
  if (mean.size() != eda_dim_ + music_dim_ || std.size() != mean.size())
    throw std::invalid_argument("FusionHead stats dim mismatch");
  stat_mean_ = mean;
  stat_std_ = std;
}

Eigen::Vector2d FusionHead::forward(const Eigen::VectorXd& eda_vec,
                                    const Eigen::VectorXd& music_vec) {
  if (eda_vec.size() != eda_dim_ || music_vec.size() != music_dim_)
    throw std::invalid_argument("FusionHead input dim mismatch");
  Eigen::VectorXd z(eda_dim_ + music_dim_);
  z.head(eda_dim_) = eda_vec;
  z.tail(music_dim_) = music_vec;
  for (Eigen::Index i = 0; i < z.size(); ++i)
    z[i] = stat_std_[i] < 1e-8 ? 0.0 : (z[i] - stat_mean_[i]) / stat_std_[i];
  Eigen::VectorXd h = fc1_.forward(z);
  for (Eigen::Index i = 0; i < h.size(); ++i) h[i] = std::max(h[i], 0.0);
  relu_cache_ = h;
  Eigen::VectorXd logits = fc2_.forward(h);
  probs_cache_ = softmax2(Eigen::Vector2d(logits[0], logits[1]));
  return probs_cache_;
}

void FusionHead::backward(const Eigen::Vector2d& grad_logits,
                          Eigen::VectorXd& grad_eda,
                          Eigen::VectorXd& grad_music) {
  Eigen::VectorXd g = fc2_.backward(grad_logits);
  for (Eigen::Index i = 0; i < g.size(); ++i)
    if (relu_cache_[i] == 0.0) g[i] = 0.0;
  Eigen::VectorXd gz = fc1_.backward(g);
  for (Eigen::Index i = 0; i < gz.size(); ++i)
    gz[i] = stat_std_[i] < 1e-8 ? 0.0 : gz[i] / stat_std_[i];
  grad_eda = gz.head(eda_dim_);
  grad_music = gz.tail(music_dim_);
}

std::vector<ParamBlock> FusionHead::params() {
  auto out = fc1_.params();
  auto p2 = fc2_.params();
  out.insert(out.end(), p2.begin(), p2.end());
  return out;
}

// ------------------------------------------------------------ loss helpers

Eigen::Vector2d softmax2(const Eigen::Vector2d& logits) {
  double m = std::max(logits[0], logits[1]);
  double e0 = std::exp(logits[0] - m);
  double e1 = std::exp(logits[1] - m);
  double s = e0 + e1;
  return {e0 / s, e1 / s};
}

double cross_entropy(const Eigen::Vector2d& probs, int label) {
  if (label != 0 && label != 1)
    throw std::invalid_argument("label must be 0 or 1");
  return -std::log(std::max(probs[label], 1e-12));
}

// ------------------------------------------------------------------- Model

std::vector<ParamBlock> Model::params() {
  std::vector<ParamBlock> out;
  if (use_eda) out = subnet.params();
  auto hp = head.params();
  out.insert(out.end(), hp.begin(), hp.end());
  return out;
}

void Model::zero_grads() {
  for (auto& block : params())
    std::fill(block.grads->begin(), block.grads->end(), 0.0);
}

Model make_model(const ResSiConfig& config, int music_dim, int hidden,
                 bool use_eda, bool use_music, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Model m;
  m.use_eda = use_eda;
  m.use_music = use_music;
  if (use_eda) m.subnet = Subnet(config, rng);
  m.head = FusionHead(use_eda ? config.output_dim() : 0,
                      use_music ? music_dim : 0, hidden, rng);
  return m;
}

Vol vol_from_channels(const std::array<imaging::Matrix, 3>& channels) {
  const auto h = static_cast<int>(channels[0].rows());
  const auto w = static_cast<int>(channels[0].cols());
  Vol v(3, h, w);
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        v.at(c, y, x) = channels[static_cast<std::size_t>(c)](y, x);
  return v;
}

double learning_rate_at(const TrainConfig& config, int iter) {
  return config.lr0 *
         std::pow(config.decay_factor, iter / config.decay_every);
}

namespace {

// Shared crop offsets across the three channels: they are time-aligned.
Vol training_vol(const NnSample& sample, std::mt19937_64& rng, bool augment) {
  if (!augment) return vol_from_channels(sample.base);
  std::uniform_int_distribution<int> off(0, 2 * imaging::kCropPad);
  int oy = off(rng);
  int ox = off(rng);
  std::array<imaging::Matrix, 3> cropped;
  for (int c = 0; c < 3; ++c) {
    imaging::Matrix padded =
        imaging::reflect_pad(sample.base[static_cast<std::size_t>(c)],
                             imaging::kCropPad);
    cropped[static_cast<std::size_t>(c)] =
        padded.block(oy, ox, imaging::kImageSize, imaging::kImageSize);
  }
  return vol_from_channels(cropped);
}

double forward_backward(Model& model, const NnSample& sample, const Vol& vol) {
  Eigen::VectorXd eda_vec =
      model.use_eda ? model.subnet.forward(vol) : Eigen::VectorXd(0);
  Eigen::VectorXd music_vec =
      model.use_music ? sample.music : Eigen::VectorXd(0);
  Eigen::Vector2d probs = model.head.forward(eda_vec, music_vec);
  double loss = cross_entropy(probs, sample.label);
  Eigen::Vector2d grad_logits = probs;  // softmax + CE: probs - onehot
  grad_logits[sample.label] -= 1.0;
  Eigen::VectorXd grad_eda, grad_music;
  model.head.backward(grad_logits, grad_eda, grad_music);
  if (model.use_eda) model.subnet.backward(grad_eda);
  return loss;
}

}  // namespace

std::vector<LossPoint> train(Model& model, const std::vector<NnSample>& samples,
                             const TrainConfig& config) {
  if (samples.empty()) throw std::invalid_argument("train: empty dataset");
  std::mt19937_64 shuffle_rng(config.seed);
  std::mt19937_64 crop_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), shuffle_rng);
  std::size_t cursor = 0;

  auto blocks = model.params();
  std::vector<std::vector<double>> velocity;
  if (config.momentum != 0.0)
    for (auto& b : blocks) velocity.emplace_back(b.values->size(), 0.0);

  std::vector<LossPoint> curve;
  curve.reserve(static_cast<std::size_t>(config.max_iters));
  const auto batch =
      std::min<std::size_t>(static_cast<std::size_t>(config.batch_size),
                            samples.size());

  for (int iter = 0; iter < config.max_iters; ++iter) {
    double lr = learning_rate_at(config, iter);
    model.zero_grads();
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < batch; ++b) {
      if (cursor >= order.size()) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        cursor = 0;
      }
      const NnSample& sample = samples[order[cursor++]];
      Vol vol = training_vol(sample, crop_rng, config.augment);
      loss_sum += forward_backward(model, sample, vol);
    }
    double loss = loss_sum / static_cast<double>(batch);
    if (!std::isfinite(loss))
      throw NumericalError("train: NaN loss at iteration " +
                               std::to_string(iter));
    double scale = lr / static_cast<double>(batch);
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
      auto& w = *blocks[bi].values;
      auto& g = *blocks[bi].grads;
      if (config.momentum != 0.0) {
        auto& v = velocity[bi];
        for (std::size_t i = 0; i < w.size(); ++i) {
          v[i] = config.momentum * v[i] + g[i] / static_cast<double>(batch);
          w[i] -= lr * v[i];
        }
      } else {
        for (std::size_t i = 0; i < w.size(); ++i) w[i] -= scale * g[i];
      }
    }
    curve.push_back({iter, loss, lr});
  }
  return curve;
}

Prediction predict(Model& model, const NnSample& sample) {
  Eigen::VectorXd eda_vec =
      model.use_eda ? model.subnet.forward(vol_from_channels(sample.base))
                    : Eigen::VectorXd(0);
  Eigen::VectorXd music_vec =
      model.use_music ? sample.music : Eigen::VectorXd(0);
  Eigen::Vector2d probs = model.head.forward(eda_vec, music_vec);
  // Ties go to the lower index.
  int label = probs[1] > probs[0] ? 1 : 0;
  return {label, probs[label]};
}

void write_loss_curve_csv(const std::string& path,
                          const std::vector<LossPoint>& curve) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "iter,loss,lr\n";
  out.precision(17);
  for (const auto& p : curve)
    out << p.iter << ',' << p.loss << ',' << p.lr << "\n";
}

// -------------------------------------------------------------- checkpoint

namespace {

nlohmann::json dump_params(std::vector<ParamBlock> blocks) {
  nlohmann::json arr = nlohmann::json::array();
  for (auto& b : blocks) arr.push_back(*b.values);
  return arr;
}

void restore_params(std::vector<ParamBlock> blocks, const nlohmann::json& arr) {
  if (arr.size() != blocks.size())
    throw std::runtime_error("checkpoint: parameter block count mismatch");
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    auto vals = arr[i].get<std::vector<double>>();
    if (vals.size() != blocks[i].values->size())
      throw std::runtime_error("checkpoint: parameter size mismatch");
    *blocks[i].values = std::move(vals);
  }
}

}  // namespace

void save_model(const std::string& path, const Model& model) {
  Model& m = const_cast<Model&>(model);
  nlohmann::json j;
  j["version"] = 1;
  const auto& cfg = m.subnet.config();
  j["config"]["stage_channels"] = cfg.stage_channels;
  j["config"]["blocks_per_stage"] = cfg.blocks_per_stage;
  j["use_eda"] = m.use_eda;
  j["use_music"] = m.use_music;
  j["eda_dim"] = m.head.eda_dim();
  j["music_dim"] = m.head.music_dim();
  j["hidden"] = m.head.fc1_.out_dim_;
  j["stats"]["mean"] = std::vector<double>(
      m.head.stat_mean_.data(), m.head.stat_mean_.data() + m.head.stat_mean_.size());
  j["stats"]["std"] = std::vector<double>(
      m.head.stat_std_.data(), m.head.stat_std_.data() + m.head.stat_std_.size());
  j["params"] = dump_params(m.params());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump();
}

void load_model(const std::string& path, Model& model) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  in >> j;
  if (j.value("version", 0) != 1)
    throw std::runtime_error("checkpoint: unsupported version");
  ResSiConfig cfg;
  cfg.stage_channels = j["config"]["stage_channels"].get<std::array<int, 4>>();
  cfg.blocks_per_stage = j["config"]["blocks_per_stage"].get<int>();
  model = make_model(cfg, j["music_dim"].get<int>(), j["hidden"].get<int>(),
                     j["use_eda"].get<bool>(), j["use_music"].get<bool>(), 0);
  auto mean = j["stats"]["mean"].get<std::vector<double>>();
  auto std_ = j["stats"]["std"].get<std::vector<double>>();
  model.head.set_stats(
      Eigen::Map<Eigen::VectorXd>(mean.data(),
                                  static_cast<Eigen::Index>(mean.size())),
      Eigen::Map<Eigen::VectorXd>(std_.data(),
                                  static_cast<Eigen::Index>(std_.size())));
  restore_params(model.params(), j["params"]);
}

}  // namespace resin::nn
