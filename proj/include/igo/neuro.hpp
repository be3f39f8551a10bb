#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "igo/bernoulli.hpp"
#include "igo/optimizer.hpp"
#include "igo/rng.hpp"

namespace igo::neuro {

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> a;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const {
    return a[i * cols + j];
  }
};

/// Fully connected network parameters. widths = [input, hidden..., output];
/// w[l] maps activations of width widths[l] to widths[l+1].
struct NetWeights {
  std::vector<std::size_t> widths;
  std::vector<Matrix> w;
  std::vector<std::vector<double>> b;

  std::size_t layers() const { return w.size(); }
  std::size_t hidden_layers() const { return widths.size() - 2; }
};

/// How the binary mask steers the architecture: layer_skip gates the
/// residual branch of every hidden layer after the first
/// (x <- x + m * relu(W x + b), one bit per skippable layer);
/// activation_select picks relu (1) or tanh (0) per hidden unit.
enum class Gating { layer_skip, activation_select };

std::size_t mask_dim(Gating kind, const std::vector<std::size_t>& widths);

NetWeights init_weights(const std::vector<std::size_t>& widths, Rng& rng);

struct Dataset {
  std::size_t feature_dim = 0;
  std::size_t classes = 0;
  std::vector<std::vector<double>> x;
  std::vector<int> y;

  std::size_t size() const { return y.size(); }
};

/// Interleaved 2-D spirals, class-balanced, features standardized to zero
/// mean and unit variance. noise = 0 puts every point exactly on its
/// spiral.
Dataset gen_spiral_dataset(std::size_t points, std::size_t classes,
                           double noise, std::uint64_t seed);

/// CSV with feature columns followed by one integer label column.
Dataset load_csv_dataset(const std::string& path);

/// Indices into a dataset; batches reference, never copy, the examples.
struct Batch {
  const Dataset* data = nullptr;
  std::vector<std::size_t> idx;

  std::size_t size() const { return idx.size(); }
};

Batch full_batch(const Dataset& data);
Batch draw_batch(const Dataset& data, std::size_t batch_size, Rng& rng);

struct LossGrad {
  double loss = 0.0;
  NetWeights grad;
};

/// Mean softmax cross-entropy over the batch and its exact gradient with
/// respect to every weight. Branches gated off by the mask contribute zero
/// gradient.
LossGrad loss_and_grad(const NetWeights& w, const BitString& mask,
                       const Batch& batch, Gating mode);

struct Eval {
  double loss = 0.0;
  double accuracy = 0.0;
};

Eval evaluate_net(const NetWeights& w, const BitString& mask,
                  const Batch& batch, Gating mode);

/// Deterministic evaluation with the mask thresholded from theta
/// (bit k = 1 iff theta_k >= 0.5).
Eval predict_fixed(const ThetaParams& theta, const NetWeights& w,
                   const Batch& batch, Gating mode);

BitString threshold_mask(const ThetaParams& theta);

struct TrainConfig {
  enum class Opt { pbil_eps, pbil_lambda, cga, fixed_mask };

  Gating gating = Gating::activation_select;
  Opt optimizer = Opt::pbil_eps;
  BitString fixed_mask;               // Opt::fixed_mask only
  std::vector<std::size_t> hidden;    // empty picks the per-gating default
  std::size_t batch_size = 64;
  std::size_t t_max = 20000;          // weight-update budget
  double lr0 = 0.05;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  double clip_norm = 2.0;             // applied in layer_skip gating only
  bool double_batch_lambda = false;   // 2N batches for the per-sample loop
  std::size_t eval_every = 500;
  std::uint64_t seed = 1;

  std::vector<std::size_t> resolve_hidden() const;
};

/// Learning rate of the 1-based update u: lr0, divided by 10 from
/// u = ceil(t_max/2) and by 100 from u = ceil(3 t_max/4).
double scheduled_lr(double lr0, std::size_t update_index, std::size_t t_max);

/// One Nesterov momentum step: optional global clip of the loss gradient to
/// clip_norm (layer_skip only), weight decay, then the momentum update at
/// the scheduled rate. Mutates grad in place.
void weight_update(NetWeights& w, NetWeights& grad, NetWeights& velocity,
                   std::size_t update_index, const TrainConfig& config);

struct HistoryRow {
  std::size_t update = 0;
  double loss = 0.0;
  double lambda_r = 0.0;
  double epsilon = 0.0;
  double theta_entropy = 0.0;
  // Filled at checkpoints, otherwise negative.
  double train_accuracy = -1.0;
  double test_accuracy = -1.0;
};

struct TrainResult {
  NetWeights weights;
  ThetaParams theta;
  std::vector<HistoryRow> history;
  Eval final_train;
  Eval final_test;
};

/// Joint training of connection weights and the mask distribution. The
/// pbil_eps / cga loops draw one mini-batch per iteration, evaluate two
/// masks on it, apply the averaged weight gradient once, then tell. The
/// pbil_lambda loop draws a fresh mini-batch per mask and applies that
/// sample's gradient immediately, so one iteration advances the update
/// counter by the current lambda. fixed_mask trains the given mask with the
/// identical schedule and no distribution updates.
TrainResult train_simultaneous(const TrainConfig& config, const Dataset& train,
                               const Dataset& test);

}  // namespace igo::neuro
