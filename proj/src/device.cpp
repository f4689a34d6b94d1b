#include "spinann/device.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spinann/errors.hpp"

namespace spinann {

void MaterialParams::validate() const {
  if (!(damping > 0.0 && damping < 1.0)) throw ConfigError("material damping must lie in (0,1)");
  if (!(k_u > 0.0)) throw ConfigError("anisotropy k_u must be positive");
  if (!(m_s > 0.0)) throw ConfigError("saturation magnetization must be positive");
  if (!(a_ex > 0.0)) throw ConfigError("exchange stiffness must be positive");
  if (!(polarization > 0.0 && polarization <= 1.0)) {
    throw ConfigError("polarization must lie in (0,1]");
  }
}

void NeuronGeometry::validate() const {
  if (!(width > 0.0) || !(thickness > 0.0)) throw ConfigError("strip width and thickness must be positive");
  if (!(dw_length > 0.0)) throw ConfigError("domain wall length must be positive");
  if (!(length > dw_length)) throw ConfigError("strip must be longer than the domain wall");
}

void NeuronGeometry::validate_against(const MaterialParams& material) const {
  // The configured wall width may be a rounded figure, but not a different one.
  const double derived = material.dw_length();
  if (std::abs(dw_length - derived) > 0.05 * derived) {
    throw ConfigError("domain wall length " + std::to_string(dw_length * 1e9) +
                      " nm disagrees with pi*sqrt(A_ex/K_u) = " + std::to_string(derived * 1e9) +
                      " nm by more than 5%");
  }
}

void MtjStack::validate() const {
  if (!(ra_p > 0.0 && ra_dw > ra_p && ra_ap > ra_dw)) {
    throw ConfigError("MTJ stack requires ra_ap > ra_dw > ra_p > 0");
  }
  if (!(r_ref > 0.0)) throw ConfigError("reference resistance must be positive");
  if (!(v_sense > 0.0)) throw ConfigError("sense voltage must be positive");
  if (!(i_crit_vertical > 0.0)) throw ConfigError("vertical critical current must be positive");
}

void DeviceParams::validate() const {
  material.validate();
  geometry.validate();
  geometry.validate_against(material);
  mtj.validate();
  if (!(sense_safety_fraction > 0.0 && sense_safety_fraction <= 1.0)) {
    throw ConfigError("sense safety fraction must lie in (0,1]");
  }
  if (std::abs(sense_current) > max_sense_current()) {
    throw ConfigError("default sense current exceeds the safe vertical current");
  }
  if (!(reset_duration >= 0.0)) throw ConfigError("reset duration must be non-negative");
  if (!(r_lateral >= 0.0)) throw ConfigError("lateral resistance must be non-negative");
}

RationalCoefficients rational_coefficients(const NeuronGeometry& g, const MtjStack& m) {
  const double a = m.ra_ap * m.ra_p * m.ra_dw;
  const double b = (m.ra_ap - m.ra_p) * m.ra_dw * g.width;
  const double c = m.ra_p * m.ra_dw * g.width * g.length +
                   (m.ra_ap * m.ra_p - 0.5 * m.ra_p * m.ra_dw - 0.5 * m.ra_ap * m.ra_dw) *
                       g.width * g.dw_length;
  return {a, b, c};
}

namespace {

void check_position(double x, const NeuronGeometry& g) {
  // A few ulps of slack so clamped states always pass.
  const double slack = 1e-12 * g.length;
  if (!(x >= g.x_min() - slack && x <= g.x_max() + slack)) {
    throw DomainError("DW position " + std::to_string(x * 1e9) + " nm outside [" +
                      std::to_string(g.x_min() * 1e9) + ", " + std::to_string(g.x_max() * 1e9) +
                      "] nm");
  }
}

}  // namespace

double neuron_resistance(double x, const NeuronGeometry& geom, const MtjStack& mtj) {
  check_position(x, geom);
  const auto k = rational_coefficients(geom, mtj);
  return k.a / (k.b * x + k.c);
}

double output_voltage(double x, const NeuronGeometry& geom, const MtjStack& mtj) {
  const double r = neuron_resistance(x, geom, mtj);
  return mtj.v_sense * mtj.r_ref / (mtj.r_ref + r);
}

double divider_current(double x, const NeuronGeometry& geom, const MtjStack& mtj) {
  return mtj.v_sense / (mtj.r_ref + neuron_resistance(x, geom, mtj));
}

double dw_velocity(double j, const VelocityTable& table) { return table.velocity(j); }

NeuronState apply_pulse(NeuronState state, double current, double duration,
                        const DeviceParams& device) {
  if (!(duration >= 0.0)) throw DomainError("pulse duration must be non-negative");
  if (current == 0.0 || duration == 0.0) return state;
  const auto& g = device.geometry;
  const double j = std::abs(current) / g.cross_section();
  const double dx = dw_velocity(j, device.velocity) * duration;
  const double x = current > 0.0 ? state.x + dx : state.x - dx;
  return {std::clamp(x, g.x_min(), g.x_max())};
}

double sense(const NeuronState& state, double i_sense, const DeviceParams& device) {
  if (std::abs(i_sense) > device.max_sense_current()) {
    throw DisturbanceError("sense current " + std::to_string(i_sense * 1e6) +
                           " uA exceeds safe limit " +
                           std::to_string(device.max_sense_current() * 1e6) + " uA");
  }
  return output_voltage(state.x, device.geometry, device.mtj);
}

double transfer(double i_prog, double t_prog, const DeviceParams& device) {
  NeuronDevice neuron(device);
  neuron.reset();
  neuron.program(i_prog, t_prog);
  return neuron.sense(device.sense_current);
}

double threshold_low(const DeviceParams& device) {
  return device.velocity.j_th() * device.geometry.cross_section();
}

double threshold_high(const DeviceParams& device, double t_prog) {
  if (!(t_prog > 0.0)) throw DomainError("programming time must be positive");
  const double v_needed = device.geometry.travel() / t_prog;
  return device.velocity.density_for_velocity(v_needed) * device.geometry.cross_section();
}

double output_voltage_min(const DeviceParams& device) {
  return output_voltage(device.geometry.x_min(), device.geometry, device.mtj);
}

double output_voltage_max(const DeviceParams& device) {
  return output_voltage(device.geometry.x_max(), device.geometry, device.mtj);
}

EnergyReport neuron_energy(double i_prog, double t_prog, double i_sense, double t_sense,
                           double i_reset, double t_reset, double r_lateral, double v_sense) {
  if (t_prog < 0.0 || t_sense < 0.0 || t_reset < 0.0) {
    throw DomainError("phase durations must be non-negative");
  }
  EnergyReport e;
  e.neuron_program = i_prog * i_prog * r_lateral * t_prog;
  e.neuron_sense = std::abs(i_sense) * v_sense * t_sense;
  e.neuron_reset = i_reset * i_reset * r_lateral * t_reset;
  return e;
}

double NeuronDevice::reset() {
  const auto& p = *params_;
  state_ = apply_pulse(state_, p.reset_current, p.reset_duration, p);
  // Explicit rule: reset always leaves the wall parked at x_min.
  state_ = p.reset_state();
  return p.reset_current * p.reset_current * p.r_lateral * p.reset_duration;
}

double NeuronDevice::program(double current, double duration) {
  state_ = apply_pulse(state_, current, duration, *params_);
  return current * current * params_->r_lateral * duration;
}

double NeuronDevice::sense(double i_sense) const { return spinann::sense(state_, i_sense, *params_); }

}  // namespace spinann
