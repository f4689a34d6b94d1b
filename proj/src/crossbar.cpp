#include "spinann/crossbar.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "spinann/errors.hpp"

namespace spinann {

void ConductanceRange::validate() const {
  if (!(g_off >= 0.0 && g_off < g_min && g_min < g_max)) {
    throw ConfigError("conductance range requires 0 <= g_off < g_min < g_max");
  }
  if (levels < 2) throw ConfigError("conductance range needs at least two levels");
}

double ConductanceRange::quantize(double target) const {
  if (target < g_min) return g_off;
  const double k = std::round((target - g_min) / step());
  return level(static_cast<int>(std::clamp(k, 0.0, static_cast<double>(levels - 1))));
}

namespace {

std::vector<double> bar_totals(const Matrix& cells, const Matrix& dummies) {
  std::vector<double> totals(cells.rows(), 0.0);
  for (std::size_t i = 0; i < cells.rows(); ++i) {
    double s = 0.0;
    for (double g : cells.row(i)) s += g;
    for (double g : dummies.row(i)) s += g;
    totals[i] = s;
  }
  return totals;
}

std::vector<double> row_sums(const Matrix& m, std::size_t extra_off_cells, double g_off) {
  std::vector<double> s(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (double g : m.row(i)) s[i] += g;
    s[i] += static_cast<double>(extra_off_cells) * g_off;
  }
  return s;
}

// Tops every bar up to a common g_TR with cells in [g_min, g_max]. Unused
// dummy positions hold g_off.
void equalize(const ConductanceRange& range, const Matrix& plus, const Matrix& minus,
              Matrix& dummy_plus, Matrix& dummy_minus, double& g_tr) {
  const std::size_t rows = plus.rows();
  const double usable = range.g_max - range.g_off;
  std::size_t n_dummy = 0;
  double bump = 0.0;
  for (int guard = 0; guard < 64; ++guard) {
    const auto sp = row_sums(plus, n_dummy, range.g_off);
    const auto sm = row_sums(minus, n_dummy, range.g_off);
    double target = bump;
    for (double s : sp) target = std::max(target, s + bump);
    for (double s : sm) target = std::max(target, s + bump);
    const double tol = 1e-12 * std::max(target, range.g_max);

    std::size_t needed = 0;
    bool too_small = false;
    auto plan = [&](double deficit) {
      if (deficit <= tol) return std::size_t{0};
      const auto k = static_cast<std::size_t>(std::ceil(deficit / usable - 1e-12));
      if (deficit / static_cast<double>(k) + range.g_off < range.g_min) too_small = true;
      return k;
    };
    for (std::size_t i = 0; i < rows; ++i) {
      needed = std::max(needed, plan(target - sp[i]));
      needed = std::max(needed, plan(target - sm[i]));
    }
    if (too_small) {
      // A dummy below g_min cannot be programmed; raise every bar instead.
      bump += range.g_min;
      continue;
    }
    if (needed > n_dummy) {
      n_dummy = needed;
      continue;
    }

    dummy_plus = Matrix(rows, n_dummy, range.g_off);
    dummy_minus = Matrix(rows, n_dummy, range.g_off);
    auto fill = [&](Matrix& d, std::size_t i, double deficit) {
      const std::size_t k = plan(deficit);
      for (std::size_t c = 0; c < k; ++c) {
        d(i, c) = deficit / static_cast<double>(k) + range.g_off;
      }
    };
    for (std::size_t i = 0; i < rows; ++i) {
      fill(dummy_plus, i, target - sp[i]);
      fill(dummy_minus, i, target - sm[i]);
    }
    g_tr = target;
    return;
  }
  throw Error("dummy column equalization did not converge");
}

}  // namespace

CrossbarArray::CrossbarArray(ConductanceRange range, Matrix g_plus, Matrix g_minus,
                             Matrix dummy_plus, Matrix dummy_minus)
    : range_(range),
      g_plus_(std::move(g_plus)),
      g_minus_(std::move(g_minus)),
      dummy_plus_(std::move(dummy_plus)),
      dummy_minus_(std::move(dummy_minus)) {
  if (g_minus_.rows() != g_plus_.rows() || g_minus_.cols() != g_plus_.cols()) {
    throw DimensionError("g_plus and g_minus must have identical shapes");
  }
  if (dummy_plus_.rows() != rows() || dummy_minus_.rows() != rows() ||
      dummy_plus_.cols() != dummy_minus_.cols()) {
    throw DimensionError("dummy columns must cover every bar");
  }
  g_tr_plus_ = bar_totals(g_plus_, dummy_plus_);
  g_tr_minus_ = bar_totals(g_minus_, dummy_minus_);
  for (std::size_t i = 0; i < rows(); ++i) {
    if (!(g_tr_plus_[i] >= 0.0) || !(g_tr_minus_[i] >= 0.0) || !std::isfinite(g_tr_plus_[i]) ||
        !std::isfinite(g_tr_minus_[i])) {
      throw DomainError("crossbar bar conductances must be finite and non-negative");
    }
  }
}

MappedCrossbar map_weights(const Matrix& weights, const ConductanceRange& range, bool quantize) {
  range.validate();
  if (weights.empty()) throw DimensionError("weight matrix is empty");
  double wmax = 0.0;
  for (double w : weights.data()) {
    if (!std::isfinite(w)) throw DomainError("weights must be finite");
    wmax = std::max(wmax, std::abs(w));
  }
  if (wmax == 0.0) throw DegenerateScaleError("all-zero weight matrix has no conductance scale");

  MappingReport report;
  report.scale = range.g_max / wmax;
  Matrix plus(weights.rows(), weights.cols(), range.g_off);
  Matrix minus(weights.rows(), weights.cols(), range.g_off);
  for (std::size_t i = 0; i < weights.rows(); ++i) {
    for (std::size_t j = 0; j < weights.cols(); ++j) {
      const double w = weights(i, j);
      if (w == 0.0) continue;
      const double target = report.scale * std::abs(w);
      const double g = quantize ? range.quantize(target) : target;
      if (quantize && g == range.g_off) ++report.pruned;
      (w > 0.0 ? plus : minus)(i, j) = g;
    }
  }
  Matrix dplus, dminus;
  equalize(range, plus, minus, dplus, dminus, report.g_tr);
  CrossbarArray array(range, std::move(plus), std::move(minus), std::move(dplus),
                      std::move(dminus));

  const Matrix decoded = decode_weights(array, report.scale);
  for (std::size_t k = 0; k < decoded.data().size(); ++k) {
    report.max_abs_error =
        std::max(report.max_abs_error, std::abs(decoded.data()[k] - weights.data()[k]));
  }
  return {std::move(array), report};
}

Matrix decode_weights(const CrossbarArray& array, double scale) {
  if (!(scale > 0.0)) throw DomainError("decode scale must be positive");
  Matrix w(array.rows(), array.cols());
  for (std::size_t i = 0; i < array.rows(); ++i) {
    for (std::size_t j = 0; j < array.cols(); ++j) {
      w(i, j) = (array.g_plus()(i, j) - array.g_minus()(i, j)) / scale;
    }
  }
  return w;
}

std::vector<double> weighted_sum(const CrossbarArray& array, std::span<const double> i_in_plus,
                                 std::span<const double> i_in_minus) {
  if (i_in_plus.size() != array.rows() || i_in_minus.size() != array.rows()) {
    throw DimensionError("input current vectors must have one entry per crossbar row (" +
                         std::to_string(array.rows()) + ")");
  }
  std::vector<double> out(array.cols(), 0.0);
  const auto gp = array.g_tr_plus();
  const auto gm = array.g_tr_minus();
  for (std::size_t i = 0; i < array.rows(); ++i) {
    // Bar voltages; a bar whose cells are all off floats and carries nothing.
    const double vp = gp[i] > 0.0 ? i_in_plus[i] / gp[i] : 0.0;
    const double vm = gm[i] > 0.0 ? i_in_minus[i] / gm[i] : 0.0;
    const auto rp = array.g_plus().row(i);
    const auto rm = array.g_minus().row(i);
    for (std::size_t j = 0; j < array.cols(); ++j) {
      out[j] += vp * rp[j] - vm * rm[j];
    }
  }
  return out;
}

CrossbarArray inject_variation(const CrossbarArray& array, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw DomainError("variation sigma must be non-negative");
  if (sigma == 0.0) return array;
  const auto& range = array.range();
  const double ceiling = 1.25 * range.g_max;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  auto perturb = [&](Matrix m) {
    for (double& g : m.data()) {
      if (g <= range.g_off) continue;
      g = std::clamp(g * (1.0 + noise(rng)), range.g_off, ceiling);
    }
    return m;
  };
  Matrix gp = perturb(array.g_plus());
  Matrix gm = perturb(array.g_minus());
  Matrix dp = perturb(array.dummy_plus());
  Matrix dm = perturb(array.dummy_minus());
  return CrossbarArray(range, std::move(gp), std::move(gm), std::move(dp), std::move(dm));
}

void WriteParams::validate() const {
  if (!(write_current > 0.0 && reference_current > 0.0 && ramp_rate > 0.0 &&
        pulse_width > 0.0 && comparator_resolution > 0.0 && initial_resistance > 0.0 &&
        max_pulses > 0)) {
    throw ConfigError("write parameters must all be positive");
  }
}

WriteResult program_cell(double target_g, const WriteParams& p, const ConductanceRange& range) {
  p.validate();
  if (!(target_g >= range.g_min && target_g <= range.g_max)) {
    throw DomainError("write target outside [g_min, g_max]");
  }
  const double threshold =
      std::round(1.0 / target_g / p.comparator_resolution) * p.comparator_resolution;
  const double step = p.ramp_rate * (p.write_current / p.reference_current) * p.pulse_width;
  double r = p.initial_resistance;
  WriteResult res{1.0 / r, 0, 0.0};
  while (r > threshold) {
    if (res.pulses >= p.max_pulses) {
      throw WriteFailureError("cell did not reach " + std::to_string(threshold) + " ohm within " +
                              std::to_string(p.max_pulses) + " pulses");
    }
    const double next = std::max(r - step, 0.0);
    // Resistance falls linearly during the pulse.
    res.energy += p.write_current * p.write_current * 0.5 * (r + next) * p.pulse_width;
    r = next;
    ++res.pulses;
    if (r == 0.0) throw WriteFailureError("write ramp collapsed the cell resistance");
  }
  res.achieved_g = 1.0 / r;
  return res;
}

}  // namespace spinann
