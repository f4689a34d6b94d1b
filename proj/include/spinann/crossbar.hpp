#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "spinann/matrix.hpp"

namespace spinann {

// Programmable conductance window of one memristor. Levels are uniformly
// spaced in conductance over [g_min, g_max].
struct ConductanceRange {
  double g_min = 1.0 / 32e3;
  double g_max = 1.0 / 1e3;
  int levels = 32;
  double g_off = 0.0;

  void validate() const;

  double step() const noexcept { return (g_max - g_min) / (levels - 1); }
  double level(int k) const noexcept { return g_min + k * step(); }
  // Nearest level; anything below g_min is pruned to g_off.
  double quantize(double target) const;

  bool operator==(const ConductanceRange&) const = default;
};

// Signed weights stored as (g_plus, g_minus) pairs on separate input bars.
// Every bar (plus and minus side of each input) is topped up by dummy cells
// so that its total conductance g_TR is the same across the array.
class CrossbarArray {
public:
  CrossbarArray() = default;
  CrossbarArray(ConductanceRange range, Matrix g_plus, Matrix g_minus, Matrix dummy_plus,
                Matrix dummy_minus);

  std::size_t rows() const noexcept { return g_plus_.rows(); }
  std::size_t cols() const noexcept { return g_plus_.cols(); }
  std::size_t dummy_cols() const noexcept { return dummy_plus_.cols(); }

  const ConductanceRange& range() const noexcept { return range_; }
  const Matrix& g_plus() const noexcept { return g_plus_; }
  const Matrix& g_minus() const noexcept { return g_minus_; }
  const Matrix& dummy_plus() const noexcept { return dummy_plus_; }
  const Matrix& dummy_minus() const noexcept { return dummy_minus_; }
  std::span<const double> g_tr_plus() const noexcept { return g_tr_plus_; }
  std::span<const double> g_tr_minus() const noexcept { return g_tr_minus_; }

  bool operator==(const CrossbarArray&) const = default;

private:
  ConductanceRange range_;
  Matrix g_plus_, g_minus_, dummy_plus_, dummy_minus_;
  std::vector<double> g_tr_plus_, g_tr_minus_;
};

struct MappingReport {
  double scale = 0.0;          // siemens per unit weight
  std::size_t pruned = 0;      // nonzero weights that fell below g_min
  double max_abs_error = 0.0;  // in weight units, over all weights
  double g_tr = 0.0;           // equalized bar conductance
};

struct MappedCrossbar {
  CrossbarArray array;
  MappingReport report;
};

// quantize = false keeps conductances continuous (no pruning either); used
// for ideal-mode comparisons against the floating-point trainer.
MappedCrossbar map_weights(const Matrix& weights, const ConductanceRange& range,
                           bool quantize = true);

// Recovers weights from conductances at a known scale.
Matrix decode_weights(const CrossbarArray& array, double scale);

// Column currents; dummy columns are not returned.
std::vector<double> weighted_sum(const CrossbarArray& array, std::span<const double> i_in_plus,
                                 std::span<const double> i_in_minus);

// Multiplies every non-off cell (dummies included) by 1 + N(0, sigma) and
// clamps to [g_off, 1.25 g_max].
CrossbarArray inject_variation(const CrossbarArray& array, double sigma, std::uint64_t seed);

struct WriteParams {
  double write_current = 100e-6;      // A
  double reference_current = 100e-6;  // A, current at which ramp_rate applies
  double ramp_rate = 25e9;            // ohm/s resistance decrease at reference current
  double pulse_width = 1e-9;          // s
  double comparator_resolution = 50;  // ohm, DAC step
  double initial_resistance = 32e3;   // ohm, erased state
  int max_pulses = 100000;

  void validate() const;
};

struct WriteResult {
  double achieved_g;
  int pulses;
  double energy;  // J
};

// Constant-current write with a comparator on the source-line voltage: the
// resistance ramps down pulse by pulse until it crosses the DAC threshold.
WriteResult program_cell(double target_g, const WriteParams& params,
                         const ConductanceRange& range);

}  // namespace spinann
