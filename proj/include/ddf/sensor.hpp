#pragma once

#include <Eigen/Dense>

#include "ddf/error.hpp"

namespace ddf {

/// Binary detection outcome of one sensing step.
enum class Observation { kNoDetection, kDetection };

/// Binary visual detector: detection probability peaks at the sensor pose
/// and falls off as a truncated Gaussian bump, zero beyond `range`.
struct SensorModel {
  double range;
  double p_max;
  double sigma;

  void validate() const {
    if (!(range > 0.0)) throw ConfigError("SensorModel: range must be positive");
    if (!(p_max > 0.0) || p_max > 1.0) throw ConfigError("SensorModel: p_max outside (0,1]");
    if (!(sigma > 0.0)) throw ConfigError("SensorModel: sigma must be positive");
  }

  double detect_prob(const Eigen::Vector2d& target, const Eigen::Vector2d& pose) const {
    const double d2 = (target - pose).squaredNorm();
    if (d2 > range * range) return 0.0;
    return p_max * std::exp(-0.5 * d2 / (sigma * sigma));
  }

  double likelihood(Observation obs, const Eigen::Vector2d& target,
                    const Eigen::Vector2d& pose) const {
    const double p = detect_prob(target, pose);
    return obs == Observation::kDetection ? p : 1.0 - p;
  }
};

/// Axis-aligned rectangular search region.
struct RegionRect {
  double xlo, xhi, ylo, yhi;

  bool intersects_disc(const Eigen::Vector2d& c, double radius) const {
    const double dx = std::max({xlo - c.x(), 0.0, c.x() - xhi});
    const double dy = std::max({ylo - c.y(), 0.0, c.y() - yhi});
    return dx * dx + dy * dy <= radius * radius;
  }
};

}  // namespace ddf
