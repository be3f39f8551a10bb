#include "igo/neuro.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace igo::neuro {

namespace {

double relu(double z) { return z > 0.0 ? z : 0.0; }
double relu_grad(double z) { return z > 0.0 ? 1.0 : 0.0; }

void require_finite(double v, const char* where) {
  if (!std::isfinite(v)) {
    throw std::runtime_error(std::string(where) + ": non-finite value");
  }
}

// y = W x + b
void affine(const Matrix& w, const std::vector<double>& b,
            const std::vector<double>& x, std::vector<double>& y) {
  y.assign(w.rows, 0.0);
  for (std::size_t i = 0; i < w.rows; ++i) {
    double acc = b[i];
    const double* row = &w.a[i * w.cols];
    for (std::size_t j = 0; j < w.cols; ++j) {
      acc += row[j] * x[j];
    }
    y[i] = acc;
  }
}

// grad_w += dy x^T, grad_b += dy, dx = W^T dy
void backprop_affine(const Matrix& w, const std::vector<double>& x,
                     const std::vector<double>& dy, Matrix& grad_w,
                     std::vector<double>& grad_b, std::vector<double>& dx) {
  for (std::size_t i = 0; i < w.rows; ++i) {
    grad_b[i] += dy[i];
    double* grow = &grad_w.a[i * w.cols];
    for (std::size_t j = 0; j < w.cols; ++j) {
      grow[j] += dy[i] * x[j];
    }
  }
  dx.assign(w.cols, 0.0);
  for (std::size_t i = 0; i < w.rows; ++i) {
    const double* row = &w.a[i * w.cols];
    for (std::size_t j = 0; j < w.cols; ++j) {
      dx[j] += row[j] * dy[i];
    }
  }
}

// Returns the cross-entropy of the example and writes softmax - onehot
// into dlogits.
double softmax_ce(const std::vector<double>& logits, int label,
                  std::vector<double>& dlogits) {
  const double zmax = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  dlogits.resize(logits.size());
  for (std::size_t c = 0; c < logits.size(); ++c) {
    dlogits[c] = std::exp(logits[c] - zmax);
    sum += dlogits[c];
  }
  for (double& p : dlogits) p /= sum;
  const double loss = -std::log(dlogits[static_cast<std::size_t>(label)]);
  dlogits[static_cast<std::size_t>(label)] -= 1.0;
  return loss;
}

NetWeights zeros_like(const NetWeights& w) {
  NetWeights g;
  g.widths = w.widths;
  g.w.reserve(w.w.size());
  g.b.reserve(w.b.size());
  for (const Matrix& m : w.w) g.w.emplace_back(m.rows, m.cols);
  for (const std::vector<double>& bv : w.b) g.b.emplace_back(bv.size(), 0.0);
  return g;
}

struct ForwardTrace {
  // pre-activations z and post-activations a per hidden layer
  std::vector<std::vector<double>> z;
  std::vector<std::vector<double>> a;
  std::vector<double> logits;
};

void forward_one(const NetWeights& w, const BitString& mask,
                 const std::vector<double>& input, Gating mode,
                 ForwardTrace& trace) {
  const std::size_t hidden = w.hidden_layers();
  trace.z.resize(hidden);
  trace.a.resize(hidden);

  if (mode == Gating::layer_skip) {
    affine(w.w[0], w.b[0], input, trace.z[0]);
    trace.a[0].resize(trace.z[0].size());
    for (std::size_t j = 0; j < trace.z[0].size(); ++j) {
      trace.a[0][j] = relu(trace.z[0][j]);
    }
    for (std::size_t l = 1; l < hidden; ++l) {
      affine(w.w[l], w.b[l], trace.a[l - 1], trace.z[l]);
      const double m = static_cast<double>(mask[l - 1]);
      trace.a[l].resize(trace.z[l].size());
      for (std::size_t j = 0; j < trace.z[l].size(); ++j) {
        trace.a[l][j] = trace.a[l - 1][j] + m * relu(trace.z[l][j]);
      }
    }
  } else {
    std::size_t off = 0;
    const std::vector<double>* prev = &input;
    for (std::size_t l = 0; l < hidden; ++l) {
      affine(w.w[l], w.b[l], *prev, trace.z[l]);
      trace.a[l].resize(trace.z[l].size());
      for (std::size_t j = 0; j < trace.z[l].size(); ++j) {
        const double m = static_cast<double>(mask[off + j]);
        trace.a[l][j] = m * relu(trace.z[l][j]) +
                        (1.0 - m) * std::tanh(trace.z[l][j]);
      }
      off += trace.z[l].size();
      prev = &trace.a[l];
    }
  }
  const std::vector<double>& last =
      hidden > 0 ? trace.a[hidden - 1] : input;
  affine(w.w[w.layers() - 1], w.b[w.layers() - 1], last, trace.logits);
  for (const double v : trace.logits) require_finite(v, "forward");
}

void backward_one(const NetWeights& w, const BitString& mask,
                  const std::vector<double>& input, Gating mode,
                  const ForwardTrace& trace, std::vector<double> dlogits,
                  NetWeights& grad) {
  const std::size_t hidden = w.hidden_layers();
  const std::size_t out = w.layers() - 1;
  std::vector<double> da;
  backprop_affine(w.w[out], trace.a[hidden - 1], dlogits, grad.w[out],
                  grad.b[out], da);

  if (mode == Gating::layer_skip) {
    std::vector<double> dz, dprev;
    for (std::size_t l = hidden - 1; l >= 1; --l) {
      const double m = static_cast<double>(mask[l - 1]);
      dz.resize(da.size());
      for (std::size_t j = 0; j < da.size(); ++j) {
        dz[j] = m * da[j] * relu_grad(trace.z[l][j]);
      }
      backprop_affine(w.w[l], trace.a[l - 1], dz, grad.w[l], grad.b[l],
                      dprev);
      for (std::size_t j = 0; j < da.size(); ++j) {
        da[j] += dprev[j];  // identity path of the residual
      }
    }
    dz.resize(da.size());
    for (std::size_t j = 0; j < da.size(); ++j) {
      dz[j] = da[j] * relu_grad(trace.z[0][j]);
    }
    backprop_affine(w.w[0], input, dz, grad.w[0], grad.b[0], dprev);
  } else {
    std::vector<std::size_t> offsets(hidden, 0);
    for (std::size_t l = 1; l < hidden; ++l) {
      offsets[l] = offsets[l - 1] + trace.z[l - 1].size();
    }
    std::vector<double> dz, dprev;
    for (std::size_t l = hidden; l-- > 0;) {
      dz.resize(da.size());
      for (std::size_t j = 0; j < da.size(); ++j) {
        const double m = static_cast<double>(mask[offsets[l] + j]);
        const double th = std::tanh(trace.z[l][j]);
        const double dact =
            m * relu_grad(trace.z[l][j]) + (1.0 - m) * (1.0 - th * th);
        dz[j] = da[j] * dact;
      }
      const std::vector<double>& below = l == 0 ? input : trace.a[l - 1];
      backprop_affine(w.w[l], below, dz, grad.w[l], grad.b[l], dprev);
      da = dprev;
    }
  }
}

}  // namespace

std::size_t mask_dim(Gating kind, const std::vector<std::size_t>& widths) {
  if (widths.size() < 3) {
    throw std::invalid_argument("mask_dim: need at least one hidden layer");
  }
  const std::size_t hidden = widths.size() - 2;
  if (kind == Gating::layer_skip) {
    if (hidden < 2) {
      throw std::invalid_argument(
          "mask_dim: layer_skip needs at least two hidden layers");
    }
    for (std::size_t l = 2; l < widths.size() - 1; ++l) {
      if (widths[l] != widths[1]) {
        throw std::invalid_argument(
            "mask_dim: layer_skip needs equal hidden widths");
      }
    }
    return hidden - 1;
  }
  std::size_t units = 0;
  for (std::size_t l = 1; l + 1 < widths.size(); ++l) units += widths[l];
  return units;
}

NetWeights init_weights(const std::vector<std::size_t>& widths, Rng& rng) {
  if (widths.size() < 3) {
    throw std::invalid_argument("init_weights: need at least 3 layer widths");
  }
  NetWeights net;
  net.widths = widths;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const std::size_t fan_in = widths[l];
    const std::size_t fan_out = widths[l + 1];
    const double bound =
        std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Matrix m(fan_out, fan_in);
    for (double& v : m.a) {
      v = bound * (2.0 * rng.uniform() - 1.0);
    }
    net.w.push_back(std::move(m));
    net.b.emplace_back(fan_out, 0.0);
  }
  return net;
}

Dataset gen_spiral_dataset(std::size_t points, std::size_t classes,
                           double noise, std::uint64_t seed) {
  if (classes < 2 || points < classes) {
    throw std::invalid_argument("gen_spiral_dataset: need points >= classes >= 2");
  }
  Dataset data;
  data.feature_dim = 2;
  data.classes = classes;
  Rng rng = Rng(seed).child(fnv1a64("spiral"));

  const std::size_t base = points / classes;
  const std::size_t extra = points % classes;
  for (std::size_t c = 0; c < classes; ++c) {
    const std::size_t count = base + (c < extra ? 1 : 0);
    Rng class_rng = rng.child(c);
    for (std::size_t j = 0; j < count; ++j) {
      const double t =
          static_cast<double>(j) / static_cast<double>(count);
      const double radius = 0.1 + 0.9 * t;
      const double angle =
          2.0 * std::numbers::pi * static_cast<double>(c) /
              static_cast<double>(classes) +
          3.0 * std::numbers::pi * t + noise * class_rng.gaussian();
      data.x.push_back({radius * std::cos(angle), radius * std::sin(angle)});
      data.y.push_back(static_cast<int>(c));
    }
  }

  // standardize features over the generated set
  for (std::size_t d = 0; d < data.feature_dim; ++d) {
    double mean = 0.0;
    for (const auto& row : data.x) mean += row[d];
    mean /= static_cast<double>(data.size());
    double var = 0.0;
    for (const auto& row : data.x) {
      const double delta = row[d] - mean;
      var += delta * delta;
    }
    var /= static_cast<double>(data.size());
    const double sd = var > 0.0 ? std::sqrt(var) : 1.0;
    for (auto& row : data.x) row[d] = (row[d] - mean) / sd;
  }
  return data;
}

Dataset load_csv_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("load_csv_dataset: cannot open " + path);
  }
  Dataset data;
  std::string line;
  int max_label = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> fields;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      fields.push_back(std::stod(cell));
    }
    if (fields.size() < 2) {
      throw std::runtime_error("load_csv_dataset: need features and a label");
    }
    const int label = static_cast<int>(std::lround(fields.back()));
    fields.pop_back();
    if (data.feature_dim == 0) {
      data.feature_dim = fields.size();
    } else if (fields.size() != data.feature_dim) {
      throw std::runtime_error("load_csv_dataset: ragged rows");
    }
    data.x.push_back(std::move(fields));
    data.y.push_back(label);
    max_label = std::max(max_label, label);
  }
  if (data.size() == 0) {
    throw std::runtime_error("load_csv_dataset: empty file");
  }
  data.classes = static_cast<std::size_t>(max_label) + 1;
  return data;
}

Batch full_batch(const Dataset& data) {
  Batch batch;
  batch.data = &data;
  batch.idx.resize(data.size());
  std::iota(batch.idx.begin(), batch.idx.end(), 0);
  return batch;
}

Batch draw_batch(const Dataset& data, std::size_t batch_size, Rng& rng) {
  Batch batch;
  batch.data = &data;
  batch.idx.reserve(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) {
    batch.idx.push_back(static_cast<std::size_t>(
        rng.uniform() * static_cast<double>(data.size())));
  }
  return batch;
}

LossGrad loss_and_grad(const NetWeights& w, const BitString& mask,
                       const Batch& batch, Gating mode) {
  if (batch.size() == 0) {
    throw std::invalid_argument("loss_and_grad: empty batch");
  }
  if (mask.size() != mask_dim(mode, w.widths)) {
    throw std::invalid_argument("loss_and_grad: mask dimension mismatch");
  }
  LossGrad out;
  out.grad = zeros_like(w);
  ForwardTrace trace;
  std::vector<double> dlogits;
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (const std::size_t i : batch.idx) {
    const std::vector<double>& x = batch.data->x[i];
    forward_one(w, mask, x, mode, trace);
    out.loss += softmax_ce(trace.logits, batch.data->y[i], dlogits);
    for (double& d : dlogits) d *= inv;
    backward_one(w, mask, x, mode, trace, dlogits, out.grad);
  }
  out.loss *= inv;
  return out;
}

Eval evaluate_net(const NetWeights& w, const BitString& mask,
                  const Batch& batch, Gating mode) {
  Eval eval;
  ForwardTrace trace;
  std::vector<double> dlogits;
  for (const std::size_t i : batch.idx) {
    forward_one(w, mask, batch.data->x[i], mode, trace);
    eval.loss += softmax_ce(trace.logits, batch.data->y[i], dlogits);
    const auto best = static_cast<int>(
        std::max_element(trace.logits.begin(), trace.logits.end()) -
        trace.logits.begin());
    eval.accuracy += best == batch.data->y[i] ? 1.0 : 0.0;
  }
  eval.loss /= static_cast<double>(batch.size());
  eval.accuracy /= static_cast<double>(batch.size());
  return eval;
}

BitString threshold_mask(const ThetaParams& theta) {
  BitString mask(theta.dim());
  for (std::size_t k = 0; k < mask.size(); ++k) {
    mask[k] = theta.probs[k] >= 0.5 ? 1 : 0;
  }
  return mask;
}

Eval predict_fixed(const ThetaParams& theta, const NetWeights& w,
                   const Batch& batch, Gating mode) {
  return evaluate_net(w, threshold_mask(theta), batch, mode);
}

std::vector<std::size_t> TrainConfig::resolve_hidden() const {
  if (!hidden.empty()) {
    return hidden;
  }
  if (gating == Gating::layer_skip) {
    return std::vector<std::size_t>(8, 16);
  }
  return std::vector<std::size_t>(2, 32);
}

double scheduled_lr(double lr0, std::size_t update_index, std::size_t t_max) {
  const std::size_t half = (t_max + 1) / 2;
  const std::size_t three_quarters = (3 * t_max + 3) / 4;
  double lr = lr0;
  if (update_index >= half) lr /= 10.0;
  if (update_index >= three_quarters) lr /= 10.0;
  return lr;
}

void weight_update(NetWeights& w, NetWeights& grad, NetWeights& velocity,
                   std::size_t update_index, const TrainConfig& config) {
  if (config.gating == Gating::layer_skip && config.clip_norm > 0.0) {
    double sq = 0.0;
    for (const Matrix& m : grad.w) {
      for (const double v : m.a) sq += v * v;
    }
    for (const auto& bv : grad.b) {
      for (const double v : bv) sq += v * v;
    }
    const double norm = std::sqrt(sq);
    if (norm > config.clip_norm) {
      const double scale = config.clip_norm / norm;
      for (Matrix& m : grad.w) {
        for (double& v : m.a) v *= scale;
      }
      for (auto& bv : grad.b) {
        for (double& v : bv) v *= scale;
      }
    }
  }

  const double lr = scheduled_lr(config.lr0, update_index, config.t_max);
  const double mu = config.momentum;
  auto step = [&](double& wv, double& gv, double& vv) {
    require_finite(gv, "weight_update");
    gv += config.weight_decay * wv;
    vv = mu * vv + gv;
    wv -= lr * (gv + mu * vv);
    require_finite(wv, "weight_update");
  };
  for (std::size_t l = 0; l < w.w.size(); ++l) {
    for (std::size_t i = 0; i < w.w[l].a.size(); ++i) {
      step(w.w[l].a[i], grad.w[l].a[i], velocity.w[l].a[i]);
    }
    for (std::size_t i = 0; i < w.b[l].size(); ++i) {
      step(w.b[l][i], grad.b[l][i], velocity.b[l][i]);
    }
  }
}

TrainResult train_simultaneous(const TrainConfig& config, const Dataset& train,
                               const Dataset& test) {
  const std::vector<std::size_t> hidden = config.resolve_hidden();
  std::vector<std::size_t> widths;
  widths.push_back(train.feature_dim);
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(train.classes);
  const std::size_t n_mask = mask_dim(config.gating, widths);

  Rng root(config.seed);
  Rng init_rng = root.child(fnv1a64("weights"));
  Rng mask_rng = root.child(fnv1a64("masks"));
  Rng batch_rng = root.child(fnv1a64("batches"));

  TrainResult result;
  result.weights = init_weights(widths, init_rng);
  NetWeights velocity = zeros_like(result.weights);

  const bool has_optimizer = config.optimizer != TrainConfig::Opt::fixed_mask;
  Optimizer opt;
  BitString fixed = config.fixed_mask;
  if (has_optimizer) {
    switch (config.optimizer) {
      case TrainConfig::Opt::pbil_eps:
        opt = parameterless(n_mask, Mode::adapt_epsilon);
        break;
      case TrainConfig::Opt::pbil_lambda:
        opt = parameterless(n_mask, Mode::adapt_lambda);
        break;
      case TrainConfig::Opt::cga:
        opt = baseline(BaselineKind::cga, n_mask);
        break;
      case TrainConfig::Opt::fixed_mask:
        break;
    }
    result.theta = opt.theta;
  } else if (fixed.size() != n_mask) {
    throw std::invalid_argument("train_simultaneous: fixed mask dimension");
  }

  const Batch train_all = full_batch(train);
  const Batch test_all = full_batch(test);
  std::size_t t = 0;
  std::uint64_t round = 0;

  auto record = [&](double loss) {
    HistoryRow row;
    row.update = t;
    row.loss = loss;
    if (has_optimizer) {
      row.lambda_r = opt.lambda_r;
      row.epsilon = opt.epsilon;
      row.theta_entropy = mean_entropy(opt.theta);
    }
    if (config.eval_every > 0 &&
        (t % config.eval_every == 0 || t >= config.t_max)) {
      const ThetaParams& th = has_optimizer ? opt.theta : result.theta;
      const BitString mask = has_optimizer ? threshold_mask(th) : fixed;
      row.train_accuracy =
          evaluate_net(result.weights, mask, train_all, config.gating)
              .accuracy;
      row.test_accuracy =
          evaluate_net(result.weights, mask, test_all, config.gating)
              .accuracy;
    }
    result.history.push_back(row);
  };

  if (config.optimizer == TrainConfig::Opt::pbil_lambda) {
    while (t < config.t_max) {
      Rng ask_rng = mask_rng.child(round);
      const std::vector<BitString> masks = opt.ask(ask_rng);
      std::vector<double> losses(masks.size());
      const std::size_t batch_size =
          config.double_batch_lambda ? 2 * config.batch_size
                                     : config.batch_size;
      for (std::size_t i = 0; i < masks.size(); ++i) {
        Rng b_rng = batch_rng.child(t);
        const Batch batch = draw_batch(train, batch_size, b_rng);
        LossGrad lg =
            loss_and_grad(result.weights, masks[i], batch, config.gating);
        weight_update(result.weights, lg.grad, velocity, t + 1, config);
        t += 1;
        losses[i] = lg.loss;
        record(lg.loss);
      }
      opt.tell(masks, losses);
      round += 1;
    }
  } else {
    while (t < config.t_max) {
      Rng b_rng = batch_rng.child(t);
      const Batch batch = draw_batch(train, config.batch_size, b_rng);
      if (has_optimizer) {
        Rng ask_rng = mask_rng.child(round);
        const std::vector<BitString> masks = opt.ask(ask_rng);
        std::vector<double> losses(masks.size());
        LossGrad total;
        for (std::size_t i = 0; i < masks.size(); ++i) {
          LossGrad lg =
              loss_and_grad(result.weights, masks[i], batch, config.gating);
          losses[i] = lg.loss;
          if (i == 0) {
            total = std::move(lg);
          } else {
            total.loss += lg.loss;
            for (std::size_t l = 0; l < total.grad.w.size(); ++l) {
              for (std::size_t k2 = 0; k2 < total.grad.w[l].a.size(); ++k2) {
                total.grad.w[l].a[k2] += lg.grad.w[l].a[k2];
              }
              for (std::size_t k2 = 0; k2 < total.grad.b[l].size(); ++k2) {
                total.grad.b[l][k2] += lg.grad.b[l][k2];
              }
            }
          }
        }
        const double inv = 1.0 / static_cast<double>(masks.size());
        total.loss *= inv;
        for (Matrix& m : total.grad.w) {
          for (double& v : m.a) v *= inv;
        }
        for (auto& bv : total.grad.b) {
          for (double& v : bv) v *= inv;
        }
        weight_update(result.weights, total.grad, velocity, t + 1, config);
        opt.tell(masks, losses);
        t += 1;
        round += 1;
        record(total.loss);
      } else {
        LossGrad lg =
            loss_and_grad(result.weights, fixed, batch, config.gating);
        weight_update(result.weights, lg.grad, velocity, t + 1, config);
        t += 1;
        record(lg.loss);
      }
    }
  }

  if (has_optimizer) {
    result.theta = opt.theta;
    const BitString mask = threshold_mask(result.theta);
    result.final_train =
        evaluate_net(result.weights, mask, train_all, config.gating);
    result.final_test =
        evaluate_net(result.weights, mask, test_all, config.gating);
  } else {
    result.final_train =
        evaluate_net(result.weights, fixed, train_all, config.gating);
    result.final_test =
        evaluate_net(result.weights, fixed, test_all, config.gating);
  }
  return result;
}

}  // namespace igo::neuro
