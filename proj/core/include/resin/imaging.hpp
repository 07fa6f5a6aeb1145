#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "resin/cvxeda.hpp"

namespace resin::imaging {

using Matrix = Eigen::MatrixXd;  // (rows = seconds or pixels, cols)

constexpr int kImageSize = 224;
constexpr int kCropPad = 8;

// (x - min) / (max - min); a constant channel maps to all zeros.
std::vector<double> minmax_normalize(const std::vector<double>& channel);

// T x 50 rearrangement, row = one second; trailing partial second dropped.
Matrix signal_to_matrix(const std::vector<double>& channel, int rate = 50);

// Corner-aligned bilinear: source coord of output i is i*(in-1)/(out-1).
Matrix bilinear_resize(const Matrix& input, int out_h, int out_w);

Matrix reflect_pad(const Matrix& image, int pad);

// Training path: reflect-pad then crop a random window (uniform offsets).
Matrix random_crop(const Matrix& image, std::mt19937_64& rng,
                   int pad = kCropPad, int out = kImageSize);
// Eval path is the identity.
Matrix center_view(const Matrix& image);

struct SignalImageTensor {
  std::array<Matrix, 3> channels;  // origin, phasic, tonic
};

struct ChannelStats {
  std::array<double, 3> mean = {0.0, 0.0, 0.0};
};

enum class ImagingMode { train, eval };

// Full pipeline: minmax -> T x 50 -> bilinear 224 -> crop/center -> subtract
// the training-fold channel mean.
SignalImageTensor make_image_tensor(const EdaSignal& signal,
                                    const cvxeda::Decomposition& decomposition,
                                    const ChannelStats& stats,
                                    ImagingMode mode, std::mt19937_64& rng);

// Channel means over the eval-path images of a set of items; fit on the
// training fold only.
ChannelStats fit_channel_stats(
    const std::vector<const EdaSignal*>& signals,
    const std::vector<const cvxeda::Decomposition*>& decompositions);

// 8-bit debug dump, values linearly mapped from [min,max].
void write_pgm(const std::string& path, const Matrix& image);

}  // namespace resin::imaging
