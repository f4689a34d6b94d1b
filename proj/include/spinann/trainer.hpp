#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "spinann/crossbar.hpp"
#include "spinann/matrix.hpp"
#include "spinann/transfer.hpp"

namespace spinann {

struct Dataset {
  Matrix features;  // one sample per row
  std::vector<int> labels;
  int n_classes = 0;

  void validate() const;
  std::size_t size() const noexcept { return labels.size(); }
};

struct TrainConfig {
  double learning_rate = 0.003;
  double momentum = 0.9;
  int epochs = 10000;
  std::uint64_t seed = 1;
  double target_accuracy = 1.0;
  // Bound on |weight| in normalized units (multiples of the transfer width);
  // 0 disables clipping.
  double weight_clip = 0.0;
  double step_slope = 1.0;
  // Initial standard deviation of each unit's normalized pre-activation over
  // the training set.
  double init_spread = 0.25;
  // Multiplicative weight noise applied to each epoch's forward pass.
  double noise_sigma = 0.0;
  // DTCS load model: a feature x reaches the crossbar as x / (1 + c x) with
  // c = load_ratio * max|feature weight| of the layer (trainer units). Zero
  // trains against ideal current sources.
  double load_ratio = 0.0;
  // Softmax temperature applied to the output activations.
  double logit_scale = 10.0;
  // When set, the last qat_epochs run the forward pass on crossbar-quantized
  // weights (straight-through update of the float weights) and the returned
  // weights are the quantized ones.
  std::optional<ConductanceRange> quantization;
  int qat_epochs = 2000;
  // Learning rate falls linearly to zero over the final anneal_epochs.
  int anneal_epochs = 0;
  // With noise_sigma > 0, train_with_restarts runs every restart and keeps
  // the one most often fully correct under that weight noise.
  int selection_trials = 0;
  bool early_stop = false;
  int restarts = 5;
  int max_hidden = 40;

  void validate() const;
};

struct TrainLogRow {
  int epoch;
  double loss;
  double accuracy;
};

// Float two-layer network. Weights are in trainer units: the last row of each
// matrix is the bias (an always-on input of 1).
struct TrainedNetwork {
  TransferFunction transfer;
  Matrix w1;  // (n_inputs + 1) x n_hidden
  Matrix w2;  // (n_hidden + 1) x n_classes
  double load_ratio = 0.0;
  double logit_scale = 10.0;
  double accuracy = 0.0;
  double loss = 0.0;
  int epochs_run = 0;
  std::vector<TrainLogRow> log;

  std::size_t n_inputs() const noexcept { return w1.rows() - 1; }
  std::size_t n_hidden() const noexcept { return w1.cols(); }
  std::size_t n_classes() const noexcept { return w2.cols(); }

  std::vector<double> hidden(std::span<const double> features) const;
  std::vector<double> forward(std::span<const double> features) const;
  // Argmax, or -1 when the top output is tied.
  int predict(std::span<const double> features) const;
};

TrainedNetwork train(const Dataset& data, std::size_t n_hidden, const TransferFunction& kind,
                     const TrainConfig& cfg);

double accuracy(const TrainedNetwork& net, const Dataset& data);

// Compression constant c for one layer's feature rows.
double layer_compression(const Matrix& w, double load_ratio);

// Softmax cross-entropy of the scaled normalized output pre-activations and
// its gradient with respect to
// every weight, in the same units as TrainedNetwork's matrices.
struct LossGradient {
  double loss;
  Matrix d_w1;
  Matrix d_w2;
};
LossGradient loss_gradient(const TrainedNetwork& net, const Dataset& data);

// Fraction of noisy copies (multiplicative Gaussian weight noise) that
// classify every sample correctly.
double noisy_accuracy(const TrainedNetwork& net, const Dataset& data, double sigma, int trials,
                      std::uint64_t seed);

// Trains with seeds cfg.seed, cfg.seed + 1, ... (cfg.restarts attempts) and
// returns the first run reaching cfg.target_accuracy, else the most accurate.
// See TrainConfig::selection_trials for the robustness-selected variant.
struct RestartResult {
  TrainedNetwork network;
  int restart;
};
RestartResult train_with_restarts(const Dataset& data, std::size_t n_hidden,
                                  const TransferFunction& kind, const TrainConfig& cfg);

struct HiddenSearchResult {
  std::size_t n_hidden;
  int restart;
  TrainedNetwork network;
};

// Scans n_hidden = 1, 2, ... and returns the first size at which any restart
// reaches cfg.target_accuracy.
HiddenSearchResult min_hidden_search(const Dataset& data, const TransferFunction& kind,
                                     const TrainConfig& cfg);

struct QuantizedWeights {
  Matrix weights;
  double scale = 0.0;
  double max_abs_error = 0.0;
  std::size_t pruned = 0;
};

// Weights exactly as a crossbar layer stores them: feature rows share one
// conductance scale, the bias row is stored at the feature rows' largest
// magnitude. Idempotent.
Matrix hardware_quantize(const Matrix& weights, const ConductanceRange& range);

// Rounds weights to what a crossbar with `levels` conductance levels can hold.
QuantizedWeights quantize_weights(const Matrix& weights, int levels);

}  // namespace spinann
