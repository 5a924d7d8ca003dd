#pragma once

// Monte Carlo of the prepare-and-measure protocol: Alice samples constellation
// points, the channel scales by sqrt(tau) and adds circular Gaussian noise,
// Bob heterodynes, the rounds are split into test and key sets, the test set
// estimates the channel and the key set is decoded by MAP and by minimum
// distance. Reconciliation and privacy amplification are not simulated.

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dmcv/channel.hpp"
#include "dmcv/constellation.hpp"
#include "json.hpp"

namespace dmcv {

// What the receiver believes: y ~ gain * x + CN(0, noise_var).
struct ReceiverModel {
  double gain = 1.0;
  double noise_var = 1.0;

  static ReceiverModel from(const ChannelModel& ch) {
    ch.validate();
    return {std::sqrt(ch.tau), ch.noise_variance()};
  }
};

struct AbortThresholds {
  double tau_min = 0.0;
  double xi_max = 0.0;
};

struct ProtocolRun {
  Constellation constellation;
  ChannelModel channel;
  std::size_t rounds = 0;
  double test_fraction = 0.1;
  std::uint64_t seed = 0;
  std::optional<AbortThresholds> abort;

  void validate() const;
};

struct ParameterEstimate {
  double tau_hat = 0.0;
  double xi_hat = 0.0;
  double sigma2_hat = 0.0;
  bool xi_clamped = false;
  std::size_t n = 0;
};

struct EstimationResult {
  double tau_hat = 0.0;
  double xi_hat = 0.0;
  bool xi_clamped = false;
  std::size_t n_test = 0;
  std::size_t n_key = 0;
  double ser_map = 0.0;
  double ser_md = 0.0;
  // Standard error of the paired per-round difference (MAP error - MD error).
  double ser_diff_se = 0.0;
  bool aborted = false;
};

struct RoundRecord {
  std::complex<double> x;
  std::complex<double> y;
  bool test = false;
  // Decisions are only made on key rounds.
  std::optional<std::size_t> decision_map;
  std::optional<std::size_t> decision_md;
};

/// y_j = sqrt(tau) x_j + z_j with z_j ~ CN(0, 1 + tau xi / 2). Element j
/// depends only on (seed, j).
std::vector<std::complex<double>> simulate_channel(std::span<const std::complex<double>> x,
                                                   const ChannelModel& ch, std::uint64_t seed);

// Both estimators scan points in index order and keep the first best score,
// so ties go to the lowest index.
std::size_t map_estimate(std::complex<double> y, const Constellation& c, const ReceiverModel& rx);
std::size_t md_estimate(std::complex<double> y, const Constellation& c, const ReceiverModel& rx);
inline std::size_t map_estimate(std::complex<double> y, const Constellation& c, const ChannelModel& ch) {
  return map_estimate(y, c, ReceiverModel::from(ch));
}
inline std::size_t md_estimate(std::complex<double> y, const Constellation& c, const ChannelModel& ch) {
  return md_estimate(y, c, ReceiverModel::from(ch));
}

/// Moment estimates of (tau, xi) from paired test data.
ParameterEstimate estimate_params(std::span<const std::complex<double>> x_test,
                                  std::span<const std::complex<double>> y_test);

EstimationResult run_protocol(const ProtocolRun& run, std::vector<RoundRecord>* rounds = nullptr);

nlohmann::json to_json(const EstimationResult& r);

}  // namespace dmcv
