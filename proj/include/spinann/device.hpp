#pragma once

#include <cmath>
#include <numbers>

#include "spinann/energy.hpp"
#include "spinann/velocity_table.hpp"

namespace spinann {

// Free-layer material constants (SI).
struct MaterialParams {
  double damping = 0.02;
  double k_u = 3.5e5;     // J/m^3
  double m_s = 6.8e5;     // A/m
  double a_ex = 1.1e-11;  // J/m
  double polarization = 0.6;

  void validate() const;

  // Bloch-wall width pi * sqrt(A_ex / K_u).
  double dw_length() const noexcept { return std::numbers::pi * std::sqrt(a_ex / k_u); }
};

// Free-layer geometry. dw_length is carried explicitly so a rounded value can
// be used; validate() checks it against the material-derived width.
struct NeuronGeometry {
  double length = 100e-9;
  double width = 20e-9;
  double thickness = 2e-9;
  double dw_length = 17e-9;

  void validate() const;
  void validate_against(const MaterialParams& material) const;

  double x_min() const noexcept { return 0.5 * dw_length; }
  double x_max() const noexcept { return length - 0.5 * dw_length; }
  double travel() const noexcept { return length - dw_length; }
  double cross_section() const noexcept { return width * thickness; }
};

// Vertical read stack. RA products are in ohm * m^2.
struct MtjStack {
  double ra_ap = 5e-12;
  double ra_dw = 3.5e-12;
  double ra_p = 2e-12;
  double r_ref = 2500.0;
  double v_sense = 0.100;  // PclkB+ minus PclkB-
  double i_crit_vertical = 100e-6;

  void validate() const;
};

// R(x) = a / (b * x + c).
struct RationalCoefficients {
  double a;
  double b;
  double c;
};

struct NeuronState {
  double x;  // DW midpoint, m
};

// Everything needed to simulate one STT-SNN.
struct DeviceParams {
  MaterialParams material;
  NeuronGeometry geometry;
  MtjStack mtj;
  VelocityTable velocity;
  double sense_safety_fraction = 0.5;
  double sense_current = 25e-6;
  double reset_current = -50e-6;
  double reset_duration = 1e-9;
  double r_lateral = 300.0;

  explicit DeviceParams(VelocityTable table) : velocity(std::move(table)) {}

  void validate() const;

  NeuronState reset_state() const noexcept { return {geometry.x_min()}; }
  double max_sense_current() const noexcept { return sense_safety_fraction * mtj.i_crit_vertical; }
};

RationalCoefficients rational_coefficients(const NeuronGeometry& geom, const MtjStack& mtj);

double neuron_resistance(double x, const NeuronGeometry& geom, const MtjStack& mtj);
double output_voltage(double x, const NeuronGeometry& geom, const MtjStack& mtj);

// Current drawn through the reference divider during sensing.
double divider_current(double x, const NeuronGeometry& geom, const MtjStack& mtj);

double dw_velocity(double j, const VelocityTable& table);

// One kinematic step: x += sign(i) * v(|i| / A) * dt, clamped to the strip.
// Positive current pushes the wall toward x_max (higher output).
NeuronState apply_pulse(NeuronState state, double current, double duration,
                        const DeviceParams& device);

// Non-destructive read. Throws DisturbanceError above the safe sense current.
double sense(const NeuronState& state, double i_sense, const DeviceParams& device);

// reset -> program -> sense starting from x_min.
double transfer(double i_prog, double t_prog, const DeviceParams& device);

// Depinning current: flat-output boundary.
double threshold_low(const DeviceParams& device);
// Smallest current that drives the wall end to end within t_prog.
double threshold_high(const DeviceParams& device, double t_prog);

double output_voltage_min(const DeviceParams& device);
double output_voltage_max(const DeviceParams& device);

EnergyReport neuron_energy(double i_prog, double t_prog, double i_sense, double t_sense,
                           double i_reset, double t_reset, double r_lateral, double v_sense);

// Stateful wrapper used by the neuron banks. Single owner.
class NeuronDevice {
public:
  explicit NeuronDevice(const DeviceParams& params)
      : params_(&params), state_(params.reset_state()) {}

  const NeuronState& state() const noexcept { return state_; }
  const DeviceParams& params() const noexcept { return *params_; }

  // Applies the configured reset pulse. If the pulse is too weak to reach
  // x_min the wall is parked there anyway. Returns the reset energy.
  double reset();
  // Returns the programming energy (I^2 R t).
  double program(double current, double duration);
  double sense(double i_sense) const;

private:
  const DeviceParams* params_;
  NeuronState state_;
};

}  // namespace spinann
