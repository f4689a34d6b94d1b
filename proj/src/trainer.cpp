#include "spinann/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "spinann/crossbar.hpp"
#include "spinann/errors.hpp"

namespace spinann {

void Dataset::validate() const {
  if (labels.empty()) throw ConfigError("dataset is empty");
  if (features.rows() != labels.size()) throw DimensionError("one label per feature row");
  if (n_classes < 1) throw ConfigError("dataset needs at least one class");
  for (int y : labels) {
    if (y < 0 || y >= n_classes) throw DomainError("label " + std::to_string(y) + " out of range");
  }
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0,1)");
  if (epochs < 1) throw ConfigError("epochs must be positive");
  if (!(target_accuracy > 0.0 && target_accuracy <= 1.0)) {
    throw ConfigError("target accuracy must lie in (0,1]");
  }
  if (!(logit_scale > 0.0)) throw ConfigError("logit scale must be positive");
  if (weight_clip < 0.0 || noise_sigma < 0.0 || load_ratio < 0.0 || !(init_spread > 0.0)) {
    throw ConfigError("weight clip, noise sigma and load ratio must be non-negative, init spread positive");
  }
  if (quantization) {
    quantization->validate();
    if (qat_epochs < 0 || qat_epochs > epochs) throw ConfigError("qat_epochs must lie in [0, epochs]");
  }
  if (anneal_epochs < 0 || anneal_epochs > epochs) throw ConfigError("anneal_epochs must lie in [0, epochs]");
  if (selection_trials < 0) throw ConfigError("selection_trials must be non-negative");
  if (restarts < 1 || max_hidden < 1) throw ConfigError("restarts and max_hidden must be positive");
}

namespace {

int argmax_unique(std::span<const double> v) {
  if (v.empty()) return -1;
  std::size_t best = 0;
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (v[k] > v[best]) best = k;
  }
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k != best && v[k] == v[best]) return -1;
  }
  return static_cast<int>(best);
}

double max_feature_weight(const Matrix& w) {
  double m = 0.0;
  for (std::size_t i = 0; i + 1 < w.rows(); ++i) {
    for (double v : w.row(i)) m = std::max(m, std::abs(v));
  }
  return m;
}

// Layer pre-activation in trainer units: bias row last. `c` compresses each
// input as x / (1 + c x).
void affine(const Matrix& w, std::span<const double> in, std::vector<double>& out,
            double c = 0.0) {
  const std::size_t n_in = w.rows() - 1;
  out.assign(w.cols(), 0.0);
  for (std::size_t j = 0; j < w.cols(); ++j) out[j] = w(n_in, j);
  for (std::size_t i = 0; i < n_in; ++i) {
    const double x = in[i] / (1.0 + c * in[i]);
    if (x == 0.0) continue;
    const auto r = w.row(i);
    for (std::size_t j = 0; j < w.cols(); ++j) out[j] += x * r[j];
  }
}

// Training runs in normalized coordinates u, with z = center + width * u, so
// learning rates mean the same thing for every transfer kind.
struct NormalizedNet {
  Matrix w1, w2;
};

}  // namespace

double layer_compression(const Matrix& w, double load_ratio) {
  return load_ratio * max_feature_weight(w);
}

namespace {

TrainedNetwork to_physical(const NormalizedNet& n, const TransferFunction& f, double load_ratio) {
  TrainedNetwork out;
  out.transfer = f;
  out.load_ratio = load_ratio;
  const double c = f.center(), s = f.width();
  auto convert = [&](const Matrix& m) {
    Matrix p = m;
    for (double& v : p.data()) v *= s;
    for (std::size_t j = 0; j < p.cols(); ++j) p(p.rows() - 1, j) += c;
    return p;
  };
  out.w1 = convert(n.w1);
  out.w2 = convert(n.w2);
  return out;
}

NormalizedNet to_normalized(const TrainedNetwork& net) {
  const double c = net.transfer.center(), s = net.transfer.width();
  auto convert = [&](const Matrix& m) {
    Matrix p = m;
    for (std::size_t j = 0; j < p.cols(); ++j) p(p.rows() - 1, j) -= c;
    for (double& v : p.data()) v /= s;
    return p;
  };
  return {convert(net.w1), convert(net.w2)};
}

struct Pass {
  double loss = 0.0;
  int correct = 0;
};

// Forward + backward over the full batch. Gradients are with respect to the
// normalized weights and averaged over samples.
Pass batch_pass(const NormalizedNet& net, const TransferFunction& f, const Dataset& data,
                double load_ratio, double logit_scale, Matrix* g1, Matrix* g2) {
  const std::size_t n_in = net.w1.rows() - 1, n_h = net.w1.cols(), n_out = net.w2.cols();
  const double c = f.center(), s = f.width();
  // Compression in physical units: max|w_phys| = s * max|w_norm|.
  const double c1 = load_ratio * s * max_feature_weight(net.w1);
  const double c2 = load_ratio * s * max_feature_weight(net.w2);
  Pass pass;
  std::vector<double> u1, h(n_h), u2, o(n_out), p(n_out), d2(n_out), d1(n_h), xe(n_in), he(n_h);
  if (g1) *g1 = Matrix(net.w1.rows(), net.w1.cols());
  if (g2) *g2 = Matrix(net.w2.rows(), net.w2.cols());
  const double inv_n = 1.0 / static_cast<double>(data.size());
  for (std::size_t n = 0; n < data.size(); ++n) {
    const auto x = data.features.row(n);
    for (std::size_t i = 0; i < n_in; ++i) xe[i] = x[i] / (1.0 + c1 * x[i]);
    affine(net.w1, xe, u1);
    for (std::size_t j = 0; j < n_h; ++j) {
      h[j] = f(c + s * u1[j]);
      he[j] = h[j] / (1.0 + c2 * h[j]);
    }
    affine(net.w2, he, u2);
    for (std::size_t k = 0; k < n_out; ++k) o[k] = f(c + s * u2[k]);
    const int y = data.labels[n];
    if (argmax_unique(o) == y) ++pass.correct;
    // Softmax cross-entropy over the scaled output activations, the same
    // quantity the winner-take-all readout compares.
    double sum = 0.0;
    for (std::size_t k = 0; k < n_out; ++k) {
      p[k] = std::exp(logit_scale * (o[k] - 1.0));
      sum += p[k];
    }
    for (std::size_t k = 0; k < n_out; ++k) p[k] /= sum;
    pass.loss -= std::log(p[static_cast<std::size_t>(y)]) * inv_n;
    for (std::size_t k = 0; k < n_out; ++k) {
      const double t = static_cast<int>(k) == y ? 1.0 : 0.0;
      d2[k] = (p[k] - t) * logit_scale * s * f.derivative(c + s * u2[k]) * inv_n;
    }
    if (!g1 || !g2) continue;
    for (std::size_t j = 0; j < n_h; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n_out; ++k) {
        (*g2)(j, k) += he[j] * d2[k];
        acc += net.w2(j, k) * d2[k];
      }
      const double dh = 1.0 / ((1.0 + c2 * h[j]) * (1.0 + c2 * h[j]));
      d1[j] = acc * dh * s * f.derivative(c + s * u1[j]);
    }
    for (std::size_t k = 0; k < n_out; ++k) (*g2)(n_h, k) += d2[k];
    for (std::size_t i = 0; i < n_in; ++i) {
      if (xe[i] == 0.0) continue;
      for (std::size_t j = 0; j < n_h; ++j) (*g1)(i, j) += xe[i] * d1[j];
    }
    for (std::size_t j = 0; j < n_h; ++j) (*g1)(n_in, j) += d1[j];
  }
  return pass;
}

}  // namespace

std::vector<double> TrainedNetwork::hidden(std::span<const double> features) const {
  if (features.size() != n_inputs()) throw DimensionError("feature vector length mismatch");
  std::vector<double> z;
  affine(w1, features, z, layer_compression(w1, load_ratio));
  for (double& v : z) v = transfer(v);
  return z;
}

std::vector<double> TrainedNetwork::forward(std::span<const double> features) const {
  const auto h = hidden(features);
  std::vector<double> z;
  affine(w2, h, z, layer_compression(w2, load_ratio));
  for (double& v : z) v = transfer(v);
  return z;
}

int TrainedNetwork::predict(std::span<const double> features) const {
  return argmax_unique(forward(features));
}

double accuracy(const TrainedNetwork& net, const Dataset& data) {
  int correct = 0;
  for (std::size_t n = 0; n < data.size(); ++n) {
    if (net.predict(data.features.row(n)) == data.labels[n]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

LossGradient loss_gradient(const TrainedNetwork& net, const Dataset& data) {
  data.validate();
  const NormalizedNet norm = to_normalized(net);
  Matrix g1, g2;
  const Pass p = batch_pass(norm, net.transfer, data, net.load_ratio, net.logit_scale, &g1, &g2);
  // d/dW_phys = (d/dW_norm) / width.
  const double s = net.transfer.width();
  for (double& v : g1.data()) v /= s;
  for (double& v : g2.data()) v /= s;
  return {p.loss, std::move(g1), std::move(g2)};
}

TrainedNetwork train(const Dataset& data, std::size_t n_hidden, const TransferFunction& kind,
                     const TrainConfig& cfg) {
  data.validate();
  cfg.validate();
  if (n_hidden < 1) throw ConfigError("n_hidden must be at least 1");
  const std::size_t n_in = data.features.cols();
  const auto n_out = static_cast<std::size_t>(data.n_classes);

  std::mt19937_64 rng(cfg.seed);
  auto init = [&](std::size_t fan_in, std::size_t cols) {
    Matrix m(fan_in + 1, cols, 0.0);
    const double a = std::sqrt(3.0 / static_cast<double>(fan_in));
    std::uniform_real_distribution<double> u(-a, a);
    for (std::size_t i = 0; i < fan_in; ++i) {
      for (std::size_t j = 0; j < cols; ++j) m(i, j) = u(rng);
    }
    return m;
  };
  NormalizedNet net{init(n_in, n_hidden), init(n_hidden, n_out)};
  // Center each unit on the data and give it a spread of init_spread, so
  // every unit starts inside the informative region of its transfer.
  auto calibrate = [&](Matrix& w, const Matrix& in) {
    const std::size_t fan_in = w.rows() - 1;
    std::vector<double> z;
    for (std::size_t j = 0; j < w.cols(); ++j) {
      double mean = 0.0, sq = 0.0;
      for (std::size_t n = 0; n < in.rows(); ++n) {
        double acc = 0.0;
        for (std::size_t i = 0; i < fan_in; ++i) acc += in(n, i) * w(i, j);
        mean += acc;
        sq += acc * acc;
      }
      mean /= static_cast<double>(in.rows());
      const double sd = std::sqrt(std::max(sq / static_cast<double>(in.rows()) - mean * mean, 0.0));
      const double k = sd > 0.0 ? cfg.init_spread / sd : 1.0;
      for (std::size_t i = 0; i < fan_in; ++i) w(i, j) *= k;
      w(fan_in, j) = -mean * k;
    }
  };
  calibrate(net.w1, data.features);
  {
    Matrix h(data.size(), n_hidden);
    std::vector<double> u;
    for (std::size_t n = 0; n < data.size(); ++n) {
      affine(net.w1, data.features.row(n), u);
      for (std::size_t j = 0; j < n_hidden; ++j) h(n, j) = kind(kind.center() + kind.width() * u[j]);
    }
    calibrate(net.w2, h);
  }
  Matrix v1(net.w1.rows(), net.w1.cols()), v2(net.w2.rows(), net.w2.cols());
  std::normal_distribution<double> noise(0.0, cfg.noise_sigma > 0.0 ? cfg.noise_sigma : 1.0);

  TrainedNetwork out;
  const double n = static_cast<double>(data.size());
  Matrix g1, g2;
  int epoch = 0;
  auto quantized = [&](const NormalizedNet& n) {
    TrainedNetwork phys = to_physical(n, kind, cfg.load_ratio);
    phys.w1 = hardware_quantize(phys.w1, *cfg.quantization);
    phys.w2 = hardware_quantize(phys.w2, *cfg.quantization);
    return to_normalized(phys);
  };
  for (epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const bool qat = cfg.quantization && epoch > cfg.epochs - cfg.qat_epochs;
    const NormalizedNet seen = qat ? quantized(net) : net;
    if (cfg.noise_sigma > 0.0) {
      // Perturb in physical units, where the conductances live.
      TrainedNetwork phys = to_physical(seen, kind, cfg.load_ratio);
      for (double& w : phys.w1.data()) w *= 1.0 + noise(rng);
      for (double& w : phys.w2.data()) w *= 1.0 + noise(rng);
      batch_pass(to_normalized(phys), kind, data, cfg.load_ratio, cfg.logit_scale, &g1, &g2);
    } else {
      batch_pass(seen, kind, data, cfg.load_ratio, cfg.logit_scale, &g1, &g2);
    }
    const int left = cfg.epochs - epoch + 1;
    const double rate = left <= cfg.anneal_epochs
                            ? cfg.learning_rate * left / static_cast<double>(cfg.anneal_epochs)
                            : cfg.learning_rate;
    auto update = [&](Matrix& w, Matrix& v, const Matrix& g) {
      for (std::size_t k = 0; k < w.data().size(); ++k) {
        v.data()[k] = cfg.momentum * v.data()[k] - rate * g.data()[k];
        w.data()[k] += v.data()[k];
        if (cfg.weight_clip > 0.0) {
          w.data()[k] = std::clamp(w.data()[k], -cfg.weight_clip, cfg.weight_clip);
        }
      }
    };
    update(net.w1, v1, g1);
    update(net.w2, v2, g2);

    const Pass clean = batch_pass(qat ? quantized(net) : net, kind, data, cfg.load_ratio,
                                  cfg.logit_scale, nullptr, nullptr);
    out.log.push_back({epoch, clean.loss, clean.correct / n});
    if (cfg.early_stop && (!cfg.quantization || qat) && clean.correct / n >= cfg.target_accuracy) break;
  }

  TrainedNetwork result = to_physical(net, kind, cfg.load_ratio);
  if (cfg.quantization) {
    result.w1 = hardware_quantize(result.w1, *cfg.quantization);
    result.w2 = hardware_quantize(result.w2, *cfg.quantization);
  }
  result.logit_scale = cfg.logit_scale;
  result.log = std::move(out.log);
  result.epochs_run = std::min(epoch, cfg.epochs);
  result.loss = result.log.back().loss;
  result.accuracy = accuracy(result, data);
  return result;
}

double noisy_accuracy(const TrainedNetwork& net, const Dataset& data, double sigma, int trials,
                      std::uint64_t seed) {
  if (trials < 1) throw ConfigError("noisy_accuracy needs at least one trial");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  int ok = 0;
  for (int t = 0; t < trials; ++t) {
    TrainedNetwork copy = net;
    for (double& w : copy.w1.data()) w *= 1.0 + noise(rng);
    for (double& w : copy.w2.data()) w *= 1.0 + noise(rng);
    if (accuracy(copy, data) >= 1.0) ++ok;
  }
  return static_cast<double>(ok) / trials;
}

RestartResult train_with_restarts(const Dataset& data, std::size_t n_hidden,
                                  const TransferFunction& kind, const TrainConfig& cfg) {
  cfg.validate();
  const bool select = cfg.selection_trials > 0 && cfg.noise_sigma > 0.0;
  std::optional<RestartResult> best;
  double best_score = -1.0;
  TrainConfig run = cfg;
  for (int r = 0; r < cfg.restarts; ++r) {
    run.seed = cfg.seed + static_cast<std::uint64_t>(r);
    TrainedNetwork net = train(data, n_hidden, kind, run);
    const bool reached = net.accuracy >= cfg.target_accuracy;
    double score = net.accuracy;
    if (select && reached) {
      score += noisy_accuracy(net, data, cfg.noise_sigma, cfg.selection_trials, run.seed);
    }
    if (!best || score > best_score) {
      best = RestartResult{std::move(net), r};
      best_score = score;
    }
    if (reached && !select) break;
  }
  return std::move(*best);
}

HiddenSearchResult min_hidden_search(const Dataset& data, const TransferFunction& kind,
                                     const TrainConfig& cfg) {
  cfg.validate();
  TrainConfig run = cfg;
  run.early_stop = true;
  for (int h = 1; h <= cfg.max_hidden; ++h) {
    for (int r = 0; r < cfg.restarts; ++r) {
      run.seed = cfg.seed + 1000ULL * static_cast<std::uint64_t>(h) + static_cast<std::uint64_t>(r);
      TrainedNetwork net = train(data, static_cast<std::size_t>(h), kind, run);
      if (net.accuracy >= cfg.target_accuracy) {
        return {static_cast<std::size_t>(h), r, std::move(net)};
      }
    }
  }
  throw SearchExhaustedError("no hidden size up to " + std::to_string(cfg.max_hidden) +
                             " reached the target accuracy for " +
                             std::string(to_string(kind.tag())));
}

Matrix hardware_quantize(const Matrix& weights, const ConductanceRange& range) {
  if (weights.rows() < 2) throw DimensionError("weights need a bias row");
  const std::size_t n_in = weights.rows() - 1;
  double max_feature = 0.0, max_bias = 0.0;
  for (std::size_t i = 0; i < n_in; ++i) {
    for (double w : weights.row(i)) max_feature = std::max(max_feature, std::abs(w));
  }
  for (double w : weights.row(n_in)) max_bias = std::max(max_bias, std::abs(w));
  const double top = max_feature > 0.0 ? max_feature : max_bias;
  if (!(top > 0.0)) throw DegenerateScaleError("all weights are zero");
  const double stretch = (max_feature > 0.0 && max_bias > 0.0) ? max_feature / max_bias : 1.0;
  const double scale = range.g_max / top;
  auto q = [&](double w, double k) {
    const double g = range.quantize(std::abs(w) * k * scale);
    const double mag = g <= range.g_off ? 0.0 : g / (k * scale);
    return w < 0.0 ? -mag : mag;
  };
  Matrix out(weights.rows(), weights.cols());
  for (std::size_t i = 0; i < weights.rows(); ++i) {
    const double k = i == n_in ? stretch : 1.0;
    for (std::size_t j = 0; j < weights.cols(); ++j) out(i, j) = q(weights(i, j), k);
  }
  return out;
}

QuantizedWeights quantize_weights(const Matrix& weights, int levels) {
  ConductanceRange range;
  range.levels = levels;
  const MappedCrossbar mapped = map_weights(weights, range, true);
  return {decode_weights(mapped.array, mapped.report.scale), mapped.report.scale,
          mapped.report.max_abs_error, mapped.report.pruned};
}

}  // namespace spinann
