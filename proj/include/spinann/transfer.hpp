#pragma once

#include <memory>
#include <string_view>
#include <vector>

#include "spinann/device.hpp"

namespace spinann {

enum class TransferTag { step, sat_linear, sigmoid, stt_snn };

std::string_view to_string(TransferTag tag);
TransferTag parse_transfer_tag(std::string_view name);

// The STT-SNN output voltage vs. programming current, sampled from the device
// model on a uniform grid between the two thresholds and normalized to [0,1].
// Training and ideal-mode hardware both read this table.
class SttCurve {
public:
  static SttCurve from_device(const DeviceParams& device, double t_prog,
                              std::size_t samples = 1024);

  double th1() const noexcept { return th1_; }
  double th2() const noexcept { return th2_; }
  double v_min() const noexcept { return v_min_; }
  double v_max() const noexcept { return v_max_; }
  const RationalCoefficients& shape() const noexcept { return shape_; }
  const std::vector<double>& samples() const noexcept { return samples_; }
  double spacing() const noexcept { return (th2_ - th1_) / static_cast<double>(samples_.size() - 1); }

  // Normalized activation: exactly 0 at/below th1, exactly 1 at/above th2.
  double operator()(double current) const;
  // Slope of the interpolating segment (1/A); zero outside (th1, th2).
  double derivative(double current) const;

  double voltage(double current) const { return v_min_ + (*this)(current) * (v_max_ - v_min_); }

private:
  double th1_ = 0.0, th2_ = 0.0, v_min_ = 0.0, v_max_ = 0.0;
  RationalCoefficients shape_{};
  std::vector<double> samples_;
};

double stt_transfer(double current, const SttCurve& curve);

// Activation used by the trainer. Pre-activations are in trainer units; for
// stt_snn one unit is `unit_current` amperes of programming current.
class TransferFunction {
public:
  TransferFunction() = default;
  static TransferFunction step(double surrogate_slope = 1.0);
  static TransferFunction sat_linear();
  static TransferFunction sigmoid();
  static TransferFunction stt_snn(std::shared_ptr<const SttCurve> curve, double unit_current);

  TransferTag tag() const noexcept { return tag_; }
  const SttCurve* curve() const noexcept { return curve_.get(); }
  std::shared_ptr<const SttCurve> shared_curve() const noexcept { return curve_; }
  double unit_current() const noexcept { return unit_current_; }
  double surrogate_slope() const noexcept { return slope_; }

  double operator()(double z) const;
  // Surrogate for step, exact elsewhere.
  double derivative(double z) const;

  // Middle and width of the region where the derivative is informative.
  double center() const;
  double width() const;

private:
  TransferTag tag_ = TransferTag::sigmoid;
  double slope_ = 1.0;
  std::shared_ptr<const SttCurve> curve_;
  double unit_current_ = 1e-6;
};

// Builds the activation for a tag. `curve` is only read for stt_snn.
TransferFunction make_transfer(TransferTag tag, std::shared_ptr<const SttCurve> curve,
                               double unit_current = 1e-6, double step_slope = 1.0);

}  // namespace spinann
