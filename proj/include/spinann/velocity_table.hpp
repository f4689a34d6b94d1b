#pragma once

#include <filesystem>
#include <vector>

namespace spinann {

struct VelocityAnchor {
  double j;  // current density, A/m^2
  double v;  // DW velocity, m/s
};

// Piecewise-linear DW velocity vs. lateral current density.
//
// The first anchor is the depinning point (j_th, 0). Below it the wall does
// not move; above the last anchor the velocity is held at the last value.
class VelocityTable {
public:
  explicit VelocityTable(std::vector<VelocityAnchor> anchors);

  // CSV with header `j_per_m2,v_m_per_s`; lines starting with '#' are skipped.
  static VelocityTable from_csv(const std::filesystem::path& path);

  double j_th() const noexcept { return anchors_.front().j; }
  double max_velocity() const noexcept { return anchors_.back().v; }
  const std::vector<VelocityAnchor>& anchors() const noexcept { return anchors_; }

  // |j| is the caller's job; negative densities are rejected.
  double velocity(double j) const;

  // Smallest density whose velocity reaches `v`. Throws DomainError when the
  // table never gets there.
  double density_for_velocity(double v) const;

  // Slope dv/dj on the segment containing j (right-continuous at anchors).
  double slope(double j) const;

private:
  std::vector<VelocityAnchor> anchors_;
};

}  // namespace spinann
