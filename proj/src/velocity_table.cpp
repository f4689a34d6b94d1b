#include "spinann/velocity_table.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "spinann/errors.hpp"

namespace spinann {

VelocityTable::VelocityTable(std::vector<VelocityAnchor> anchors) : anchors_(std::move(anchors)) {
  if (anchors_.size() < 2) {
    throw ConfigError("velocity table needs at least two anchors");
  }
  if (anchors_.front().v != 0.0) {
    throw ConfigError("first velocity anchor must be the depinning point (v = 0)");
  }
  if (!(anchors_.front().j > 0.0)) {
    throw ConfigError("depinning density must be positive");
  }
  for (std::size_t k = 1; k < anchors_.size(); ++k) {
    const auto& a = anchors_[k - 1];
    const auto& b = anchors_[k];
    if (!std::isfinite(b.j) || !std::isfinite(b.v)) {
      throw ConfigError("velocity table contains non-finite values");
    }
    if (!(b.j > a.j)) {
      throw ConfigError("velocity anchors must be strictly increasing in current density");
    }
    if (b.v < a.v) {
      throw ConfigError("velocity anchors must be nondecreasing in velocity");
    }
  }
  if (!(anchors_[1].v > 0.0)) {
    throw ConfigError("velocity must be positive just above the depinning density");
  }
}

VelocityTable VelocityTable::from_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open velocity table: " + path.string());
  }
  std::vector<VelocityAnchor> anchors;
  std::string line;
  bool header_seen = false;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != "j_per_m2,v_m_per_s") {
        throw ConfigError("velocity table header must be 'j_per_m2,v_m_per_s' in " + path.string());
      }
      header_seen = true;
      continue;
    }
    std::istringstream fields(line);
    std::string js, vs;
    if (!std::getline(fields, js, ',') || !std::getline(fields, vs)) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected two columns");
    }
    try {
      anchors.push_back({std::stod(js), std::stod(vs)});
    } catch (const std::exception&) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": bad number");
    }
  }
  if (!header_seen) {
    throw ConfigError("velocity table is empty: " + path.string());
  }
  return VelocityTable(std::move(anchors));
}

double VelocityTable::velocity(double j) const {
  if (j < 0.0 || std::isnan(j)) {
    throw DomainError("velocity lookup needs a non-negative current density");
  }
  if (j <= anchors_.front().j) return 0.0;
  if (j >= anchors_.back().j) return anchors_.back().v;
  auto hi = std::upper_bound(anchors_.begin(), anchors_.end(), j,
                             [](double value, const VelocityAnchor& a) { return value < a.j; });
  auto lo = hi - 1;
  if (j == lo->j) return lo->v;
  const double t = (j - lo->j) / (hi->j - lo->j);
  return lo->v + t * (hi->v - lo->v);
}

double VelocityTable::density_for_velocity(double v) const {
  if (v <= 0.0) return anchors_.front().j;
  for (std::size_t k = 1; k < anchors_.size(); ++k) {
    const auto& a = anchors_[k - 1];
    const auto& b = anchors_[k];
    if (b.v >= v) {
      if (b.v == a.v) return a.j;
      return a.j + (v - a.v) / (b.v - a.v) * (b.j - a.j);
    }
  }
  throw DomainError("velocity " + std::to_string(v) + " m/s is beyond the velocity table");
}

double VelocityTable::slope(double j) const {
  if (j < anchors_.front().j || j >= anchors_.back().j) return 0.0;
  auto hi = std::upper_bound(anchors_.begin(), anchors_.end(), j,
                             [](double value, const VelocityAnchor& a) { return value < a.j; });
  auto lo = hi - 1;
  return (hi->v - lo->v) / (hi->j - lo->j);
}

}  // namespace spinann
