#include "spinann/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "spinann/errors.hpp"

namespace spinann {

void PhaseSchedule::validate() const {
  if (!(t_program > 0.0 && t_sense > 0.0 && t_reset > 0.0)) {
    throw ConfigError("phase durations must be positive");
  }
}

void NetworkConfig::validate() const {
  range.validate();
  dtcs.validate();
  schedule.validate();
  if (!(utilization > 0.0 && utilization <= 1.0)) {
    throw ConfigError("DTCS utilization must lie in (0,1]");
  }
  if (!(variation_sigma >= 0.0)) throw ConfigError("variation sigma must be non-negative");
  if (bias_rows < 0) throw ConfigError("bias row count must be non-negative (0 selects automatically)");
}

// --- neuron bank -----------------------------------------------------------

NeuronBank::NeuronBank(const DeviceParams& params, std::size_t count) : params_(&params) {
  neurons_.reserve(count);
  for (std::size_t k = 0; k < count; ++k) neurons_.emplace_back(params);
}

void NeuronBank::enter(Phase next) {
  const bool ok = (phase_ == Phase::idle && next == Phase::reset) ||
                  (phase_ == Phase::reset && next == Phase::program) ||
                  (phase_ == Phase::program && next == Phase::sense) ||
                  (phase_ == Phase::sense && (next == Phase::reset || next == Phase::idle));
  if (!ok) throw PhaseError("illegal clock phase transition");
  phase_ = next;
}

void NeuronBank::require(Phase p, const char* what) const {
  if (phase_ != p) throw PhaseError(std::string(what) + " issued outside its clock phase");
}

double NeuronBank::reset_all() {
  require(Phase::reset, "reset");
  double e = 0.0;
  for (auto& n : neurons_) e += n.reset();
  return e;
}

double NeuronBank::program(std::span<const double> currents, double duration) {
  require(Phase::program, "program");
  if (currents.size() != neurons_.size()) throw DimensionError("one programming current per neuron");
  double e = 0.0;
  for (std::size_t k = 0; k < neurons_.size(); ++k) e += neurons_[k].program(currents[k], duration);
  return e;
}

double NeuronBank::sense_all(double duration, std::vector<double>& voltages) {
  require(Phase::sense, "sense");
  voltages.resize(neurons_.size());
  double e = 0.0;
  for (std::size_t k = 0; k < neurons_.size(); ++k) {
    const auto& p = *params_;
    const double x = neurons_[k].state().x;
    const double i_s = divider_current(x, p.geometry, p.mtj);
    voltages[k] = neurons_[k].sense(i_s);
    e += std::abs(i_s) * p.mtj.v_sense * duration;
  }
  return e;
}

// --- layer -----------------------------------------------------------------

Layer::Layer(const Matrix& weights, double unit_current, const NetworkConfig& cfg)
    : weights_(weights), utilization_(cfg.utilization) {
  cfg.validate();
  if (weights.rows() < 2 || weights.cols() < 1) {
    throw DimensionError("layer weights need at least one input row plus a bias row");
  }
  if (!(unit_current > 0.0)) throw ConfigError("unit current must be positive");
  const std::size_t n_in = weights.rows() - 1;

  double max_feature = 0.0, max_bias = 0.0;
  for (std::size_t i = 0; i < n_in; ++i) {
    for (double w : weights.row(i)) max_feature = std::max(max_feature, std::abs(w));
  }
  for (double w : weights.row(n_in)) max_bias = std::max(max_bias, std::abs(w));
  // Each bias row stores the bias at the feature rows' largest magnitude;
  // the row count sets how much current each bias source must deliver.
  const double stretch = (max_feature > 0.0 && max_bias > 0.0) ? max_feature / max_bias : 1.0;

  auto build = [&](std::size_t r) {
    Matrix stored(n_in + r, weights.cols());
    for (std::size_t i = 0; i < n_in; ++i) {
      for (std::size_t j = 0; j < weights.cols(); ++j) stored(i, j) = weights(i, j);
    }
    for (std::size_t k = 0; k < r; ++k) {
      for (std::size_t j = 0; j < weights.cols(); ++j) stored(n_in + k, j) = weights(n_in, j) * stretch;
    }
    return map_weights(stored, cfg.range, cfg.options.quantize);
  };

  std::size_t r = cfg.bias_rows > 0 ? static_cast<std::size_t>(cfg.bias_rows) : 1;
  auto mapped = build(r);
  double full = unit_current * mapped.report.g_tr / mapped.report.scale;
  if (cfg.bias_rows == 0) {
    const double limit = kBiasHeadroom * cfg.dtcs.delta_v * mapped.report.g_tr;
    const double needed = std::ceil(full / stretch / limit);
    if (needed > static_cast<double>(kMaxBiasRows)) {
      throw DomainError("bias needs more than " + std::to_string(kMaxBiasRows) + " rows");
    }
    if (needed > static_cast<double>(r)) {
      r = static_cast<std::size_t>(needed);
      mapped = build(r);
      full = unit_current * mapped.report.g_tr / mapped.report.scale;
    }
  }
  mapping_ = mapped.report;
  nominal_ = std::move(mapped.array);
  active_ = nominal_;

  full_scale_ = full;
  bias_current_ = full / (stretch * static_cast<double>(r));

  plus_ = cfg.dtcs;
  plus_.polarity = Rail::positive;
  minus_ = cfg.dtcs;
  minus_.polarity = Rail::negative;
  plus_.k_beta = minus_.k_beta = k_beta_for_current(full_scale_, cfg.dtcs, utilization_);

  bias_plus_ = plus_;
  bias_minus_ = minus_;
  const double load_p = cfg.options.ideal_dtcs ? kIdealLoad : nominal_.g_tr_plus()[n_in];
  const double load_m = cfg.options.ideal_dtcs ? kIdealLoad : nominal_.g_tr_minus()[n_in];
  bias_plus_.k_beta = k_beta_for_current(bias_current_, cfg.dtcs, utilization_, load_p);
  bias_minus_.k_beta = k_beta_for_current(bias_current_, cfg.dtcs, utilization_, load_m);
}

Layer Layer::with_array(CrossbarArray varied) const {
  if (varied.rows() != nominal_.rows() || varied.cols() != nominal_.cols()) {
    throw DimensionError("replacement crossbar has a different shape");
  }
  Layer copy = *this;
  copy.active_ = std::move(varied);
  return copy;
}

Layer::Drive Layer::drive(std::span<const double> features, bool ideal_dtcs,
                          double t_program) const {
  if (features.size() != n_inputs()) {
    throw DimensionError("layer expects " + std::to_string(n_inputs()) + " inputs, got " +
                         std::to_string(features.size()));
  }
  const std::size_t rows = active_.rows();
  Drive d;
  d.i_plus.resize(rows);
  d.i_minus.resize(rows);
  const auto gp = active_.g_tr_plus();
  const auto gm = active_.g_tr_minus();
  for (std::size_t i = 0; i < rows; ++i) {
    const bool bias = i >= n_inputs();
    const double v_g = encode_input(bias ? 1.0 : features[i], plus_, utilization_);
    const auto& rp = bias ? bias_plus_ : plus_;
    const auto& rm = bias ? bias_minus_ : minus_;
    // A floating bar (every cell off) sinks no current.
    auto source = [&](const DtcsParams& rail, double load) {
      if (ideal_dtcs) return dtcs_current(v_g, rail);
      return load > 0.0 ? dtcs_current(v_g, rail, load) : 0.0;
    };
    d.i_plus[i] = source(rp, gp[i]);
    d.i_minus[i] = source(rm, gm[i]);
  }
  d.column = weighted_sum(active_, d.i_plus, d.i_minus);

  // Static dissipation while the rails are powered. Cells see the bar
  // voltage I/g_TR; each source is charged its full rail, I * delta_v.
  auto account = [&](double current, double g_tr, double delta_v) {
    if (g_tr > 0.0) {
      const double v_bar = current / g_tr;
      d.crossbar_energy += v_bar * v_bar * g_tr * t_program;
    }
    d.dtcs_energy += current * delta_v * t_program;
  };
  for (std::size_t i = 0; i < rows; ++i) {
    account(d.i_plus[i], gp[i], plus_.delta_v);
    account(d.i_minus[i], gm[i], minus_.delta_v);
  }
  return d;
}

// --- network ---------------------------------------------------------------

namespace {

DeviceParams scheduled(const DeviceParams& device, const PhaseSchedule& schedule) {
  DeviceParams p = device;
  p.reset_duration = schedule.t_reset;
  p.validate();
  return p;
}

}  // namespace

Network::Network(const TrainedNetwork& trained, const DeviceParams& device,
                 const NetworkConfig& cfg)
    : cfg_(cfg),
      device_(scheduled(device, cfg.schedule)),
      curve_(trained.transfer.tag() == TransferTag::stt_snn && trained.transfer.curve()
                 ? trained.transfer.shared_curve()
                 : std::make_shared<const SttCurve>(
                       SttCurve::from_device(device_, cfg.schedule.t_program))),
      hidden_(trained.w1, trained.transfer.unit_current(), cfg),
      output_(trained.w2, trained.transfer.unit_current(), cfg) {
  if (trained.transfer.tag() != TransferTag::stt_snn) {
    throw ConfigError("hardware network needs weights trained for the stt_snn transfer");
  }
  if (trained.w2.rows() != trained.w1.cols() + 1) {
    throw DimensionError("output layer inputs must equal hidden neuron count");
  }
}

Network Network::with_variation(double sigma, std::uint64_t seed) const {
  Network copy = *this;
  copy.hidden_ = hidden_.with_array(inject_variation(hidden_.nominal(), sigma, mix_seed(seed, 1)));
  copy.output_ = output_.with_array(inject_variation(output_.nominal(), sigma, mix_seed(seed, 2)));
  return copy;
}

void Network::run_layer(const Layer& layer, std::span<const double> in,
                        std::vector<double>& currents, std::vector<double>& voltages,
                        EnergyReport& energy) const {
  const auto& s = cfg_.schedule;
  NeuronBank bank(device_, layer.n_neurons());

  bank.enter(Phase::reset);
  energy.neuron_reset += bank.reset_all();

  bank.enter(Phase::program);
  auto d = layer.drive(in, cfg_.options.ideal_dtcs, s.t_program);
  energy.crossbar_static += d.crossbar_energy;
  energy.dtcs_static += d.dtcs_energy;
  energy.neuron_program += bank.program(d.column, s.t_program);
  currents = std::move(d.column);

  bank.enter(Phase::sense);
  energy.neuron_sense += bank.sense_all(s.t_sense, voltages);
  if (cfg_.options.ideal_neuron) {
    for (std::size_t k = 0; k < voltages.size(); ++k) voltages[k] = curve_->voltage(currents[k]);
  }
  bank.enter(Phase::idle);
}

ForwardResult Network::forward(std::span<const double> features,
                               std::optional<std::uint64_t> variation_seed) const {
  if (variation_seed) {
    return with_variation(cfg_.variation_sigma, *variation_seed).forward(features);
  }
  ForwardResult r;
  run_layer(hidden_, features, r.hidden_currents, r.hidden_voltages, r.energy);

  // Level shift: [v_min, v_max] of a hidden neuron onto [0, 1] feature scale.
  const double lo = output_voltage_min(device_), hi = output_voltage_max(device_);
  std::vector<double> level(r.hidden_voltages.size());
  for (std::size_t k = 0; k < level.size(); ++k) {
    level[k] = std::clamp((r.hidden_voltages[k] - lo) / (hi - lo), 0.0, 1.0);
  }
  run_layer(output_, level, r.output_currents, r.output_voltages, r.energy);
  return r;
}

// --- readout & energy summary ----------------------------------------------

Readout readout(std::span<const double> v) {
  if (v.empty()) throw DimensionError("readout of an empty vector");
  std::size_t best = 0;
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (v[k] > v[best]) best = k;
  }
  double second = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k != best) second = std::max(second, v[k]);
  }
  if (v.size() == 1) return {0, v[0]};
  const double tol = 4.0 * std::numeric_limits<double>::epsilon() * std::abs(v[best]);
  if (v[best] - second <= tol) {
    throw TieError("top two outputs are tied at " + std::to_string(v[best]) + " V");
  }
  return {static_cast<int>(best), v[best] - second};
}

std::vector<int> threshold_readout(std::span<const double> v, double v_threshold) {
  std::vector<int> bits(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) bits[k] = v[k] > v_threshold ? 0 : 1;
  return bits;
}

EnergyReport neuron_count_energy(std::size_t neurons, const PhaseSchedule& s,
                                 const OperatingPoint& op, const DeviceParams& device) {
  const EnergyReport one =
      neuron_energy(op.i_program, s.t_program, op.i_sense, s.t_sense, op.i_reset, s.t_reset,
                    device.r_lateral, device.mtj.v_sense);
  return one.scaled(static_cast<double>(neurons));
}

EnergyReport neuron_count_energy(const Network& network) {
  return neuron_count_energy(network.neuron_count(), network.config().schedule,
                             network.config().operating_point, network.device());
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the combined value.
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace spinann
