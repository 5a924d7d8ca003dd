#include "dmcv/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "dmcv/error.hpp"
#include "dmcv/rng.hpp"

namespace dmcv {

namespace {

constexpr std::uint64_t kNoiseStream = 0x4e4f4953;  // "NOIS"
constexpr std::uint64_t kSiftStream = 0x53494654;   // "SIFT"
constexpr std::uint64_t kRunSymbols = 1;
constexpr std::uint64_t kRunChannel = 2;
constexpr std::uint64_t kRunSifting = 3;
constexpr std::size_t kMinTestRounds = 30;

}  // namespace

void ProtocolRun::validate() const {
  if (rounds < 100) {
    throw Error(ErrorKind::NonPhysicalInput, "a protocol run needs at least 100 rounds");
  }
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(ErrorKind::NonPhysicalInput, "test fraction must lie in (0, 1)");
  }
  channel.validate();
}

std::vector<std::complex<double>> simulate_channel(std::span<const std::complex<double>> x,
                                                   const ChannelModel& ch, std::uint64_t seed) {
  ch.validate();
  const double gain = std::sqrt(ch.tau);
  const double quadrature_sd = std::sqrt(ch.noise_variance() / 2.0);
  std::vector<std::complex<double>> y(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    auto rng = stream_rng(seed, kNoiseStream, j);
    std::normal_distribution<double> normal(0.0, quadrature_sd);
    const double re = normal(rng);
    const double im = normal(rng);
    y[j] = gain * x[j] + std::complex<double>(re, im);
  }
  return y;
}

std::size_t md_estimate(std::complex<double> y, const Constellation& c, const ReceiverModel& rx) {
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double dist = std::norm(y - rx.gain * c.points()[k]);
    if (dist < best_dist) {
      best_dist = dist;
      best = k;
    }
  }
  return best;
}

std::size_t map_estimate(std::complex<double> y, const Constellation& c, const ReceiverModel& rx) {
  // Equal priors: the posterior ordering is the distance ordering; delegating
  // keeps the two decisions bit-identical.
  if (c.is_uniform()) return md_estimate(y, c, rx);
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double p = c.probs()[k];
    if (p <= 0.0) continue;
    const double score = std::log(p) - std::norm(y - rx.gain * c.points()[k]) / rx.noise_var;
    if (score > best_score) {
      best_score = score;
      best = k;
    }
  }
  return best;
}

ParameterEstimate estimate_params(std::span<const std::complex<double>> x_test,
                                  std::span<const std::complex<double>> y_test) {
  if (x_test.size() != y_test.size()) {
    throw Error(ErrorKind::DimensionMismatch, "test sequences differ in length");
  }
  const std::size_t n = x_test.size();
  if (n < kMinTestRounds) {
    throw Error(ErrorKind::InsufficientTestData,
                std::to_string(n) + " test rounds; at least " + std::to_string(kMinTestRounds) + " needed");
  }
  double cross = 0.0;
  double power = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    cross += (std::conj(x_test[j]) * y_test[j]).real();
    power += std::norm(x_test[j]);
  }
  if (!(power > 0.0)) {
    throw Error(ErrorKind::InsufficientTestData, "test symbols carry no energy");
  }
  const double t_hat = cross / power;
  double residual = 0.0;
  for (std::size_t j = 0; j < n; ++j) residual += std::norm(y_test[j] - t_hat * x_test[j]);

  ParameterEstimate est;
  est.n = n;
  est.tau_hat = t_hat * t_hat;
  est.sigma2_hat = residual / static_cast<double>(n);
  if (!(est.tau_hat > 0.0)) {
    throw Error(ErrorKind::InsufficientTestData, "no correlation between sent and received test data");
  }
  const double xi = 2.0 * (est.sigma2_hat - 1.0) / est.tau_hat;
  est.xi_clamped = xi < 0.0;
  est.xi_hat = est.xi_clamped ? 0.0 : xi;
  return est;
}

EstimationResult run_protocol(const ProtocolRun& run, std::vector<RoundRecord>* rounds) {
  run.validate();
  const auto& c = run.constellation;
  const std::size_t n = run.rounds;

  const auto idx = sample_indices(c, derive_seed(run.seed, kRunSymbols, 0), n);
  std::vector<std::complex<double>> x(n);
  for (std::size_t j = 0; j < n; ++j) x[j] = c.points()[idx[j]];
  const auto y = simulate_channel(x, run.channel, derive_seed(run.seed, kRunChannel, 0));

  // Sifting: independent Bernoulli(test_fraction) per round.
  const std::uint64_t sift_seed = derive_seed(run.seed, kRunSifting, 0);
  std::vector<bool> is_test(n);
  std::vector<std::complex<double>> x_test;
  std::vector<std::complex<double>> y_test;
  std::bernoulli_distribution coin(run.test_fraction);
  for (std::size_t j = 0; j < n; ++j) {
    auto rng = stream_rng(sift_seed, kSiftStream, j);
    is_test[j] = coin(rng);
    if (is_test[j]) {
      x_test.push_back(x[j]);
      y_test.push_back(y[j]);
    }
  }

  const auto est = estimate_params(x_test, y_test);
  const ReceiverModel rx{std::sqrt(est.tau_hat), 1.0 + est.tau_hat * est.xi_hat / 2.0};

  EstimationResult result;
  result.tau_hat = est.tau_hat;
  result.xi_hat = est.xi_hat;
  result.xi_clamped = est.xi_clamped;
  result.n_test = x_test.size();
  result.n_key = n - x_test.size();
  if (result.n_key == 0) {
    throw Error(ErrorKind::InsufficientTestData, "sifting left no key rounds");
  }

  if (rounds) {
    rounds->clear();
    rounds->reserve(n);
  }
  std::size_t err_map = 0;
  std::size_t err_md = 0;
  double diff_sum = 0.0;
  double diff_sq = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    RoundRecord rec{x[j], y[j], is_test[j], std::nullopt, std::nullopt};
    if (!is_test[j]) {
      const auto map = map_estimate(y[j], c, rx);
      const auto md = md_estimate(y[j], c, rx);
      const int e_map = map != idx[j];
      const int e_md = md != idx[j];
      err_map += e_map;
      err_md += e_md;
      const double diff = e_map - e_md;
      diff_sum += diff;
      diff_sq += diff * diff;
      rec.decision_map = map;
      rec.decision_md = md;
    }
    if (rounds) rounds->push_back(rec);
  }
  const double nk = static_cast<double>(result.n_key);
  result.ser_map = err_map / nk;
  result.ser_md = err_md / nk;
  const double mean_diff = diff_sum / nk;
  const double var_diff = result.n_key > 1 ? (diff_sq - nk * mean_diff * mean_diff) / (nk - 1.0) : 0.0;
  result.ser_diff_se = std::sqrt(std::max(var_diff, 0.0) / nk);

  if (run.abort) {
    result.aborted = result.tau_hat < run.abort->tau_min || result.xi_hat > run.abort->xi_max;
  }
  return result;
}

nlohmann::json to_json(const EstimationResult& r) {
  return {{"tau_hat", r.tau_hat},     {"xi_hat", r.xi_hat}, {"xi_clamped", r.xi_clamped},
          {"n_test", r.n_test},       {"n_key", r.n_key},   {"ser_map", r.ser_map},
          {"ser_md", r.ser_md},       {"ser_diff_se", r.ser_diff_se},
          {"aborted", r.aborted}};
}

}  // namespace dmcv
