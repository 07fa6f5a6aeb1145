#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "resin/imaging.hpp"

namespace resin::nn {

// C x H x W activation volume.
struct Vol {
  int c = 0, h = 0, w = 0;
  std::vector<double> data;

  Vol() = default;
  Vol(int c_, int h_, int w_) : c(c_), h(h_), w(w_) {
    data.assign(static_cast<std::size_t>(c_) * h_ * w_, 0.0);
  }
  double& at(int ci, int y, int x) {
    return data[(static_cast<std::size_t>(ci) * h + y) * w + x];
  }
  double at(int ci, int y, int x) const {
    return data[(static_cast<std::size_t>(ci) * h + y) * w + x];
  }
};

struct ParamBlock {
  std::vector<double>* values;
  std::vector<double>* grads;
};

class Conv3x3 {
 public:
  Conv3x3() = default;
  Conv3x3(int in_c, int out_c, int stride, std::mt19937_64& rng);
  Vol forward(const Vol& in);
  Vol backward(const Vol& grad_out);  // accumulates parameter grads
  std::vector<ParamBlock> params();
  int out_channels() const { return out_c_; }

  int in_c_ = 0, out_c_ = 0, stride_ = 1;
  std::vector<double> w_, b_, gw_, gb_;  // w: [out][in][3][3]

 private:
  Vol in_cache_;
};

class Conv1x1 {
 public:
  Conv1x1() = default;
  Conv1x1(int in_c, int out_c, int stride, std::mt19937_64& rng);
  Vol forward(const Vol& in);
  Vol backward(const Vol& grad_out);
  std::vector<ParamBlock> params();

  int in_c_ = 0, out_c_ = 0, stride_ = 1;
  std::vector<double> w_, b_, gw_, gb_;

 private:
  Vol in_cache_;
};

class ReluVol {
 public:
  Vol forward(const Vol& in);
  Vol backward(const Vol& grad_out);

 private:
  Vol out_cache_;
};

class MaxPool2 {
 public:
  Vol forward(const Vol& in);
  Vol backward(const Vol& grad_out);

 private:
  int in_h_ = 0, in_w_ = 0;
  std::vector<std::size_t> argmax_;
  int out_c_ = 0, out_h_ = 0, out_w_ = 0;
};

class GlobalAvgPool {
 public:
  Eigen::VectorXd forward(const Vol& in);
  Vol backward(const Eigen::VectorXd& grad_out);

 private:
  int c_ = 0, h_ = 0, w_ = 0;
};

class Linear {
 public:
  Linear() = default;
  Linear(int in_dim, int out_dim, std::mt19937_64& rng);
  Eigen::VectorXd forward(const Eigen::VectorXd& in);
  Eigen::VectorXd backward(const Eigen::VectorXd& grad_out);
  std::vector<ParamBlock> params();

  int in_dim_ = 0, out_dim_ = 0;
  std::vector<double> w_, b_, gw_, gb_;  // w row-major [out][in]

 private:
  Eigen::VectorXd in_cache_;
};

// conv-relu-conv plus identity (or 1x1 stride-2 projection) skip, ReLU after
// the add.
class ResidualBlock {
 public:
  ResidualBlock() = default;
  ResidualBlock(int in_c, int out_c, int stride, std::mt19937_64& rng);
  Vol forward(const Vol& in);
  Vol backward(const Vol& grad_out);
  std::vector<ParamBlock> params();

  bool has_projection() const { return downsample_; }

  Conv3x3 conv1_, conv2_;
  Conv1x1 proj_;

 private:
  bool downsample_ = false;
  ReluVol relu1_;
  Vol in_cache_;
  Vol sum_cache_;
};

struct ResSiConfig {
  std::array<int, 4> stage_channels = {64, 128, 256, 512};
  int blocks_per_stage = 2;
  int stem_channels() const { return stage_channels[0]; }
  int output_dim() const { return stage_channels[3]; }
};

// Stem conv (3x3, s1) -> stride-2 pool -> 4 stages x blocks (stride 2 at
// stage entries 2-4) -> global average pool.
class Subnet {
 public:
  Subnet() = default;
  Subnet(const ResSiConfig& config, std::mt19937_64& rng);
  Eigen::VectorXd forward(const Vol& in);
  Vol backward(const Eigen::VectorXd& grad_out);
  std::vector<ParamBlock> params();
  const ResSiConfig& config() const { return config_; }

  Conv3x3 stem_;
  std::vector<ResidualBlock> blocks_;

 private:
  ResSiConfig config_;
  ReluVol stem_relu_;
  MaxPool2 pool_;
  GlobalAvgPool gap_;
};

// z-score (fixed training-fold stats) -> concat -> linear(hidden) -> ReLU ->
// linear(2) -> softmax.
class FusionHead {
 public:
  FusionHead() = default;
  FusionHead(int eda_dim, int music_dim, int hidden, std::mt19937_64& rng);
  // Returns softmax probabilities (2).
  Eigen::Vector2d forward(const Eigen::VectorXd& eda_vec,
                          const Eigen::VectorXd& music_vec);
  // grad_logits in, gradients for the two input vectors out.
  void backward(const Eigen::Vector2d& grad_logits, Eigen::VectorXd& grad_eda,
                Eigen::VectorXd& grad_music);
  std::vector<ParamBlock> params();

  void set_stats(const Eigen::VectorXd& mean, const Eigen::VectorXd& std);
  int eda_dim() const { return eda_dim_; }
  int music_dim() const { return music_dim_; }

  Linear fc1_, fc2_;
  Eigen::VectorXd stat_mean_, stat_std_;  // over the concatenated input

 private:
  int eda_dim_ = 0, music_dim_ = 0;
  Eigen::VectorXd relu_cache_;
  Eigen::Vector2d probs_cache_;
};

Eigen::Vector2d softmax2(const Eigen::Vector2d& logits);
double cross_entropy(const Eigen::Vector2d& probs, int label);

struct Model {
  Subnet subnet;
  FusionHead head;
  bool use_eda = true;   // feed images through the subnet
  bool use_music = true; // concatenate the music vector

  std::vector<ParamBlock> params();
  void zero_grads();
};

Model make_model(const ResSiConfig& config, int music_dim, int hidden,
                 bool use_eda, bool use_music, std::uint64_t seed);

// One training/eval sample: mean-subtracted pre-crop channel images plus the
// music vector and the target bit.
struct NnSample {
  std::array<imaging::Matrix, 3> base;  // 224 x 224, eval-path view
  Eigen::VectorXd music;
  int label = 0;
};

Vol vol_from_channels(const std::array<imaging::Matrix, 3>& channels);

struct TrainConfig {
  int batch_size = 100;
  double lr0 = 0.001;
  double decay_factor = 0.1;
  int decay_every = 300;
  int max_iters = 900;
  std::uint64_t seed = 0;
  double momentum = 0.0;
  bool augment = true;  // random crop on the training path
};

double learning_rate_at(const TrainConfig& config, int iter);

struct LossPoint {
  int iter;
  double loss;
  double lr;
};

// Plain SGD with the step-decay schedule; deterministic given the seed
// (fixed shuffling, fixed crop rng, ordered gradient reduction).
std::vector<LossPoint> train(Model& model, const std::vector<NnSample>& samples,
                             const TrainConfig& config);

struct Prediction {
  int label;
  double probability;  // of the predicted class
};

Prediction predict(Model& model, const NnSample& sample);

void write_loss_curve_csv(const std::string& path,
                          const std::vector<LossPoint>& curve);

void save_model(const std::string& path, const Model& model);
void load_model(const std::string& path, Model& model);

}  // namespace resin::nn
