#pragma once

#include <cmath>
#include <string>

#include "dmcv/error.hpp"

namespace dmcv {

// Thermal-loss channel in shot-noise units: transmittance tau in (0, 1] and
// excess noise xi >= 0 referred to the channel input.
struct ChannelModel {
  double tau = 1.0;
  double xi = 0.0;

  void validate() const {
    if (!(tau > 0.0 && tau <= 1.0)) {
      throw Error(ErrorKind::NonPhysicalInput, "transmittance " + std::to_string(tau) + " not in (0, 1]");
    }
    if (!(xi >= 0.0) || !std::isfinite(xi)) {
      throw Error(ErrorKind::NonPhysicalInput, "excess noise must be finite and >= 0");
    }
  }

  // Complex noise variance E|y - sqrt(tau) x|^2 at the heterodyne output:
  // 1 (vacuum + detection) plus the excess-noise share tau * xi / 2.
  double noise_variance() const { return 1.0 + tau * xi / 2.0; }
};

}  // namespace dmcv
