#pragma once

namespace spinann {

// Per-component energy ledger for one inference cycle, in joules.
struct EnergyReport {
  double neuron_program = 0.0;
  double neuron_sense = 0.0;
  double neuron_reset = 0.0;
  double crossbar_static = 0.0;
  double dtcs_static = 0.0;

  double neuron_total() const noexcept { return neuron_program + neuron_sense + neuron_reset; }
  double total() const noexcept { return neuron_total() + crossbar_static + dtcs_static; }

  EnergyReport& operator+=(const EnergyReport& o) noexcept {
    neuron_program += o.neuron_program;
    neuron_sense += o.neuron_sense;
    neuron_reset += o.neuron_reset;
    crossbar_static += o.crossbar_static;
    dtcs_static += o.dtcs_static;
    return *this;
  }

  EnergyReport scaled(double k) const noexcept {
    return {neuron_program * k, neuron_sense * k, neuron_reset * k, crossbar_static * k,
            dtcs_static * k};
  }

  bool operator==(const EnergyReport&) const = default;
};

}  // namespace spinann
