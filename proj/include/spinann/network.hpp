#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "spinann/axon.hpp"
#include "spinann/crossbar.hpp"
#include "spinann/device.hpp"
#include "spinann/energy.hpp"
#include "spinann/trainer.hpp"

namespace spinann {

struct PhaseSchedule {
  double t_program = 1e-9;
  double t_sense = 1e-9;
  double t_reset = 1e-9;

  void validate() const;
};

// Closed-form per-neuron operating point used for the itemized energy summary.
struct OperatingPoint {
  double i_program = 40e-6;
  double i_sense = 25e-6;
  double i_reset = 50e-6;
};

struct HardwareOptions {
  bool quantize = true;
  bool ideal_dtcs = false;
  // Read neurons off the sampled transfer curve instead of the DW kinematics.
  bool ideal_neuron = false;
};

struct NetworkConfig {
  ConductanceRange range;
  DtcsParams dtcs;           // template for both rails; k_beta is calibrated per layer
  double utilization = 0.9;  // fraction of the DTCS overdrive range used by a feature of 1
  PhaseSchedule schedule;
  OperatingPoint operating_point;
  double variation_sigma = 0.05;
  // Always-on rows that carry each neuron's bias, split evenly. Zero picks
  // the fewest rows whose sources stay within kBiasHeadroom of delta_v.
  int bias_rows = 0;
  HardwareOptions options;

  void validate() const;
};

inline constexpr double kBiasHeadroom = 0.5;
inline constexpr std::size_t kMaxBiasRows = 64;

enum class Phase { idle, reset, program, sense };

// A bank of STT-SNNs sharing one clocked supply. Operations are only legal in
// their own phase; phases advance reset -> program -> sense.
class NeuronBank {
public:
  NeuronBank(const DeviceParams& params, std::size_t count);

  Phase phase() const noexcept { return phase_; }
  void enter(Phase next);

  std::size_t size() const noexcept { return neurons_.size(); }
  const NeuronDevice& neuron(std::size_t k) const { return neurons_.at(k); }

  // Each returns the energy spent, J.
  double reset_all();
  double program(std::span<const double> currents, double duration);
  // Fills voltages; returns sense energy.
  double sense_all(double duration, std::vector<double>& voltages);

private:
  void require(Phase p, const char* what) const;

  const DeviceParams* params_;
  std::vector<NeuronDevice> neurons_;
  Phase phase_ = Phase::idle;
};

// One axon + crossbar + neuron stage. Inputs are features in [0,1]. The
// crossbar holds one row per input followed by `bias_rows` always-on rows.
// Bias rows hold the bias rescaled to the feature rows' largest magnitude and
// their DTCS is calibrated against the (fixed) bar load.
class Layer {
public:
  Layer(const Matrix& weights, double unit_current, const NetworkConfig& cfg);

  std::size_t n_inputs() const noexcept { return weights_.rows() - 1; }
  std::size_t bias_rows() const noexcept { return nominal_.rows() - n_inputs(); }
  std::size_t n_neurons() const noexcept { return weights_.cols(); }

  const Matrix& weights() const noexcept { return weights_; }
  const CrossbarArray& nominal() const noexcept { return nominal_; }
  const CrossbarArray& array() const noexcept { return active_; }
  const MappingReport& mapping() const noexcept { return mapping_; }
  const DtcsParams& rail(Rail r) const noexcept { return r == Rail::positive ? plus_ : minus_; }
  const DtcsParams& bias_rail(Rail r) const noexcept {
    return r == Rail::positive ? bias_plus_ : bias_minus_;
  }
  // Ideal per-row current for a feature of 1, and for each bias row.
  double full_scale_current() const noexcept { return full_scale_; }
  double bias_row_current() const noexcept { return bias_current_; }
  double utilization() const noexcept { return utilization_; }

  Layer with_array(CrossbarArray varied) const;

  struct Drive {
    std::vector<double> i_plus, i_minus;  // per input row, A
    std::vector<double> column;           // per neuron, A
    double crossbar_energy = 0.0;
    double dtcs_energy = 0.0;
  };
  Drive drive(std::span<const double> features, bool ideal_dtcs, double t_program) const;

private:
  Matrix weights_;
  CrossbarArray nominal_, active_;
  MappingReport mapping_;
  DtcsParams plus_, minus_, bias_plus_, bias_minus_;
  double full_scale_ = 0.0;
  double bias_current_ = 0.0;
  double utilization_ = 1.0;
};

struct ForwardResult {
  std::vector<double> hidden_currents, hidden_voltages;
  std::vector<double> output_currents, output_voltages;
  EnergyReport energy;
};

class Network {
public:
  Network(const TrainedNetwork& trained, const DeviceParams& device, const NetworkConfig& cfg);

  const Layer& hidden() const noexcept { return hidden_; }
  const Layer& output() const noexcept { return output_; }
  const NetworkConfig& config() const noexcept { return cfg_; }
  const DeviceParams& device() const noexcept { return device_; }
  const SttCurve& curve() const noexcept { return *curve_; }
  std::size_t neuron_count() const noexcept { return hidden_.n_neurons() + output_.n_neurons(); }

  // Copy whose crossbars (both layers, dummies included) carry Gaussian
  // conductance variation. Deterministic in the seed.
  Network with_variation(double sigma, std::uint64_t seed) const;

  ForwardResult forward(std::span<const double> features,
                        std::optional<std::uint64_t> variation_seed = std::nullopt) const;

private:
  void run_layer(const Layer& layer, std::span<const double> in, std::vector<double>& currents,
                 std::vector<double>& voltages, EnergyReport& energy) const;

  NetworkConfig cfg_;
  DeviceParams device_;
  std::shared_ptr<const SttCurve> curve_;
  Layer hidden_;
  Layer output_;
};

struct Readout {
  int label;
  double margin;  // winner minus runner-up, V
};

// Argmax readout. Throws TieError when the top two agree to machine precision.
Readout readout(std::span<const double> output_voltages);

// Inverter readout: 0 for neurons above the threshold, 1 otherwise.
std::vector<int> threshold_readout(std::span<const double> output_voltages, double v_threshold);

// Closed-form neuron energy at the configured operating point, times the
// number of neurons.
EnergyReport neuron_count_energy(const Network& network);
EnergyReport neuron_count_energy(std::size_t neurons, const PhaseSchedule& schedule,
                                 const OperatingPoint& op, const DeviceParams& device);

// 64-bit mixer used to derive independent per-trial / per-layer seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace spinann
