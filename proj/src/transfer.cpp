#include "spinann/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "spinann/errors.hpp"

namespace spinann {

std::string_view to_string(TransferTag tag) {
  switch (tag) {
    case TransferTag::step: return "step";
    case TransferTag::sat_linear: return "sat_linear";
    case TransferTag::sigmoid: return "sigmoid";
    case TransferTag::stt_snn: return "stt_snn";
  }
  return "?";
}

TransferTag parse_transfer_tag(std::string_view name) {
  if (name == "step") return TransferTag::step;
  if (name == "sat_linear") return TransferTag::sat_linear;
  if (name == "sigmoid") return TransferTag::sigmoid;
  if (name == "stt_snn") return TransferTag::stt_snn;
  throw ConfigError("unknown transfer kind '" + std::string(name) + "'");
}

SttCurve SttCurve::from_device(const DeviceParams& device, double t_prog, std::size_t samples) {
  if (samples < 2) throw ConfigError("transfer curve needs at least two samples");
  SttCurve c;
  c.th1_ = threshold_low(device);
  c.th2_ = threshold_high(device, t_prog);
  c.v_min_ = output_voltage_min(device);
  c.v_max_ = output_voltage_max(device);
  c.shape_ = rational_coefficients(device.geometry, device.mtj);
  if (!(c.th2_ > c.th1_)) throw ConfigError("transfer thresholds must satisfy th2 > th1");
  c.samples_.resize(samples);
  const double span = c.v_max_ - c.v_min_;
  for (std::size_t k = 0; k < samples; ++k) {
    const double i = c.th1_ + (c.th2_ - c.th1_) * static_cast<double>(k) /
                                  static_cast<double>(samples - 1);
    c.samples_[k] = std::clamp((transfer(i, t_prog, device) - c.v_min_) / span, 0.0, 1.0);
  }
  c.samples_.front() = 0.0;
  c.samples_.back() = 1.0;
  for (std::size_t k = 1; k < samples; ++k) {
    c.samples_[k] = std::max(c.samples_[k], c.samples_[k - 1]);
  }
  return c;
}

double SttCurve::operator()(double current) const {
  if (current <= th1_) return 0.0;
  if (current >= th2_) return 1.0;
  const double pos = (current - th1_) / spacing();
  const auto k = std::min(static_cast<std::size_t>(pos), samples_.size() - 2);
  const double t = pos - static_cast<double>(k);
  return samples_[k] + t * (samples_[k + 1] - samples_[k]);
}

double SttCurve::derivative(double current) const {
  if (current <= th1_ || current >= th2_) return 0.0;
  const double pos = (current - th1_) / spacing();
  const auto k = std::min(static_cast<std::size_t>(pos), samples_.size() - 2);
  return (samples_[k + 1] - samples_[k]) / spacing();
}

double stt_transfer(double current, const SttCurve& curve) { return curve(current); }

TransferFunction TransferFunction::step(double surrogate_slope) {
  if (!(surrogate_slope > 0.0)) throw ConfigError("step surrogate slope must be positive");
  TransferFunction f;
  f.tag_ = TransferTag::step;
  f.slope_ = surrogate_slope;
  return f;
}

TransferFunction TransferFunction::sat_linear() {
  TransferFunction f;
  f.tag_ = TransferTag::sat_linear;
  return f;
}

TransferFunction TransferFunction::sigmoid() {
  TransferFunction f;
  f.tag_ = TransferTag::sigmoid;
  return f;
}

TransferFunction TransferFunction::stt_snn(std::shared_ptr<const SttCurve> curve,
                                           double unit_current) {
  if (!curve) throw ConfigError("stt_snn transfer needs a sampled curve");
  if (!(unit_current > 0.0)) throw ConfigError("unit current must be positive");
  TransferFunction f;
  f.tag_ = TransferTag::stt_snn;
  f.curve_ = std::move(curve);
  f.unit_current_ = unit_current;
  return f;
}

double TransferFunction::operator()(double z) const {
  switch (tag_) {
    case TransferTag::step: return z >= 0.0 ? 1.0 : 0.0;
    case TransferTag::sat_linear: return std::clamp(z, 0.0, 1.0);
    case TransferTag::sigmoid: return 1.0 / (1.0 + std::exp(-z));
    case TransferTag::stt_snn: return (*curve_)(z * unit_current_);
  }
  return 0.0;
}

double TransferFunction::derivative(double z) const {
  switch (tag_) {
    case TransferTag::step:
      // Straight-through estimate: slope of the ramp clamp(0.5 + slope*z, 0, 1).
      return std::abs(z) < 0.5 / slope_ ? slope_ : 0.0;
    case TransferTag::sat_linear: return (z > 0.0 && z < 1.0) ? 1.0 : 0.0;
    case TransferTag::sigmoid: {
      const double s = 1.0 / (1.0 + std::exp(-z));
      return s * (1.0 - s);
    }
    case TransferTag::stt_snn: return curve_->derivative(z * unit_current_) * unit_current_;
  }
  return 0.0;
}

double TransferFunction::center() const {
  switch (tag_) {
    case TransferTag::step: return 0.0;
    case TransferTag::sat_linear: return 0.5;
    case TransferTag::sigmoid: return 0.0;
    case TransferTag::stt_snn: return 0.5 * (curve_->th1() + curve_->th2()) / unit_current_;
  }
  return 0.0;
}

double TransferFunction::width() const {
  switch (tag_) {
    case TransferTag::step: return 1.0 / slope_;
    case TransferTag::sat_linear: return 1.0;
    case TransferTag::sigmoid: return 4.0;
    case TransferTag::stt_snn: return (curve_->th2() - curve_->th1()) / unit_current_;
  }
  return 1.0;
}

TransferFunction make_transfer(TransferTag tag, std::shared_ptr<const SttCurve> curve,
                               double unit_current, double step_slope) {
  switch (tag) {
    case TransferTag::step: return TransferFunction::step(step_slope);
    case TransferTag::sat_linear: return TransferFunction::sat_linear();
    case TransferTag::sigmoid: return TransferFunction::sigmoid();
    case TransferTag::stt_snn: return TransferFunction::stt_snn(std::move(curve), unit_current);
  }
  throw ConfigError("unknown transfer kind");
}

}  // namespace spinann
