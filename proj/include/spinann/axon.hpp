#pragma once

#include <limits>

namespace spinann {

enum class Rail { positive, negative };

// Deep-triode current source. Source sits at V +/- delta_v, drain on a
// crossbar bar whose total conductance is the load.
struct DtcsParams {
  double v_dd = 1.0;
  double v_t = 0.3;
  double k_beta = 1.0e-3;  // A/V^2
  double delta_v = 0.050;
  Rail polarity = Rail::positive;

  void validate() const;

  double max_overdrive() const noexcept { return v_dd - v_t; }
};

inline constexpr double kIdealLoad = std::numeric_limits<double>::infinity();

// Magnitude of the drain current. Solves I = k V_ov (delta_v - I / g_load):
// I = k V_ov delta_v / (1 + k V_ov / g_load). Zero at or beyond cutoff.
double dtcs_current(double v_g, const DtcsParams& params, double load_g = kIdealLoad);

// Feature in [0,1] to gate voltage; higher feature, lower gate, more current.
double encode_input(double feature, const DtcsParams& params, double utilization = 1.0);

// k_beta that delivers `current` at full feature into `load_g`.
double k_beta_for_current(double current, const DtcsParams& params, double utilization,
                          double load_g = kIdealLoad);

}  // namespace spinann
