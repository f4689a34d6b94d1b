#include "spinann/axon.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spinann/errors.hpp"

namespace spinann {

void DtcsParams::validate() const {
  if (!(v_t > 0.0 && v_dd > v_t)) throw ConfigError("DTCS requires v_dd > v_t > 0");
  if (!(k_beta > 0.0)) throw ConfigError("DTCS k_beta must be positive");
  if (!(delta_v > 0.0)) throw ConfigError("DTCS delta_v must be positive");
}

double dtcs_current(double v_g, const DtcsParams& p, double load_g) {
  if (!(load_g > 0.0)) throw DomainError("DTCS load conductance must be positive");
  const double v_ov = std::max(p.v_dd - p.v_t - v_g, 0.0);
  if (v_ov == 0.0) return 0.0;
  const double g_channel = p.k_beta * v_ov;
  if (std::isinf(load_g)) return g_channel * p.delta_v;
  return g_channel * p.delta_v / (1.0 + g_channel / load_g);
}

double encode_input(double feature, const DtcsParams& p, double utilization) {
  if (!(feature >= 0.0 && feature <= 1.0)) {
    throw DomainError("input feature " + std::to_string(feature) + " outside [0,1]");
  }
  if (!(utilization > 0.0 && utilization <= 1.0)) {
    throw DomainError("DTCS utilization must lie in (0,1]");
  }
  return p.max_overdrive() * (1.0 - feature * utilization);
}

double k_beta_for_current(double current, const DtcsParams& p, double utilization,
                          double load_g) {
  const double v_ov = p.max_overdrive() * utilization;
  const double v_ds = std::isinf(load_g) ? p.delta_v : p.delta_v - current / load_g;
  if (!(v_ds > 0.0)) {
    throw DomainError("requested DTCS current " + std::to_string(current * 1e6) +
                      " uA saturates the bar (needs more than delta_v across the load)");
  }
  return current / (v_ov * v_ds);
}

}  // namespace spinann
