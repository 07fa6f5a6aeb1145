#include "resin/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace resin::imaging {

std::vector<double> minmax_normalize(const std::vector<double>& channel) {
  if (channel.empty()) throw std::invalid_argument("empty channel");
  auto [mn_it, mx_it] = std::minmax_element(channel.begin(), channel.end());
  double mn = *mn_it, mx = *mx_it;
  std::vector<double> out(channel.size());
  if (mx == mn) return out;  // constant channel -> zeros
  for (std::size_t i = 0; i < channel.size(); ++i)
    out[i] = (channel[i] - mn) / (mx - mn);
  return out;
}

Matrix signal_to_matrix(const std::vector<double>& channel, int rate) {
  const auto n = channel.size();
  const auto t = n / static_cast<std::size_t>(rate);
  if (t == 0)
    throw std::invalid_argument("signal shorter than one second");
  Matrix m(static_cast<Eigen::Index>(t), rate);
  for (std::size_t row = 0; row < t; ++row)
    for (int col = 0; col < rate; ++col)
      m(static_cast<Eigen::Index>(row), col) =
          channel[row * static_cast<std::size_t>(rate) +
                  static_cast<std::size_t>(col)];
  return m;
}

Matrix bilinear_resize(const Matrix& input, int out_h, int out_w) {
  const auto in_h = input.rows();
  const auto in_w = input.cols();
  if (in_h < 2 || in_w < 2 || out_h < 2 || out_w < 2)
    throw std::invalid_argument("bilinear_resize needs dims >= 2");
  Matrix out(out_h, out_w);
  const double sy = static_cast<double>(in_h - 1) / (out_h - 1);
  const double sx = static_cast<double>(in_w - 1) / (out_w - 1);
  for (int i = 0; i < out_h; ++i) {
    double y = i * sy;
    auto y0 = static_cast<Eigen::Index>(y);
    if (y0 >= in_h - 1) y0 = in_h - 2;
    double fy = y - static_cast<double>(y0);
    for (int j = 0; j < out_w; ++j) {
      double x = j * sx;
      auto x0 = static_cast<Eigen::Index>(x);
      if (x0 >= in_w - 1) x0 = in_w - 2;
      double fx = x - static_cast<double>(x0);
      out(i, j) = (1 - fy) * ((1 - fx) * input(y0, x0) + fx * input(y0, x0 + 1)) +
                  fy * ((1 - fx) * input(y0 + 1, x0) + fx * input(y0 + 1, x0 + 1));
    }
  }
  return out;
}

Matrix reflect_pad(const Matrix& image, int pad) {
  const auto h = image.rows(), w = image.cols();
  Matrix out(h + 2 * pad, w + 2 * pad);
  auto reflect = [](Eigen::Index i, Eigen::Index n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
    return i;
  };
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index j = 0; j < out.cols(); ++j)
      out(i, j) = image(reflect(i - pad, h), reflect(j - pad, w));
  return out;
}

Matrix random_crop(const Matrix& image, std::mt19937_64& rng, int pad,
                   int out) {
  if (image.rows() != out || image.cols() != out)
    throw std::invalid_argument("random_crop expects an out x out image");
  Matrix padded = reflect_pad(image, pad);
  std::uniform_int_distribution<int> off(0, 2 * pad);
  int oy = off(rng);
  int ox = off(rng);
  return padded.block(oy, ox, out, out);
}

Matrix center_view(const Matrix& image) { return image; }

namespace {

Matrix channel_image(const std::vector<double>& raw) {
  return bilinear_resize(signal_to_matrix(minmax_normalize(raw)), kImageSize,
                         kImageSize);
}

std::array<std::vector<double>, 3> raw_channels(
    const EdaSignal& signal, const cvxeda::Decomposition& d) {
  auto to_vec = [](const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
  };
  return {signal.samples, to_vec(d.phasic), to_vec(d.tonic)};
}

}  // namespace

SignalImageTensor make_image_tensor(const EdaSignal& signal,
                                    const cvxeda::Decomposition& decomposition,
                                    const ChannelStats& stats,
                                    ImagingMode mode, std::mt19937_64& rng) {
  auto raw = raw_channels(signal, decomposition);
  SignalImageTensor out;
  for (int c = 0; c < 3; ++c) {
    Matrix img = channel_image(raw[static_cast<std::size_t>(c)]);
    if (mode == ImagingMode::train)
      img = random_crop(img, rng);
    else
      img = center_view(img);
    img.array() -= stats.mean[static_cast<std::size_t>(c)];
    out.channels[static_cast<std::size_t>(c)] = std::move(img);
  }
  return out;
}

ChannelStats fit_channel_stats(
    const std::vector<const EdaSignal*>& signals,
    const std::vector<const cvxeda::Decomposition*>& decompositions) {
  if (signals.size() != decompositions.size() || signals.empty())
    throw std::invalid_argument("fit_channel_stats: bad inputs");
  ChannelStats stats;
  for (std::size_t i = 0; i < signals.size(); ++i) {
    auto raw = raw_channels(*signals[i], *decompositions[i]);
    for (int c = 0; c < 3; ++c)
      stats.mean[static_cast<std::size_t>(c)] +=
          channel_image(raw[static_cast<std::size_t>(c)]).mean();
  }
  for (double& m : stats.mean) m /= static_cast<double>(signals.size());
  return stats;
}

void write_pgm(const std::string& path, const Matrix& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  double mn = image.minCoeff(), mx = image.maxCoeff();
  double span = mx > mn ? mx - mn : 1.0;
  out << "P5\n" << image.cols() << ' ' << image.rows() << "\n255\n";
  for (Eigen::Index i = 0; i < image.rows(); ++i)
    for (Eigen::Index j = 0; j < image.cols(); ++j) {
      auto v = static_cast<unsigned char>(
          std::lround(255.0 * (image(i, j) - mn) / span));
      out.put(static_cast<char>(v));
    }
}

}  // namespace resin::imaging
