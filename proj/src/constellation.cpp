#include "dmcv/constellation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include <boost/math/tools/roots.hpp>

#include "dmcv/error.hpp"
#include "dmcv/rng.hpp"

namespace dmcv {

namespace {

constexpr std::uint64_t kSymbolStream = 0x53594d42;  // "SYMB"

int order_from_size(std::size_t n) {
  const auto m = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
  if (m == 0 || m * m != n) {
    throw Error(ErrorKind::InvalidOrder, std::to_string(n) + " points do not form a square grid");
  }
  return static_cast<int>(m);
}

std::vector<double> energies(std::span<const std::complex<double>> points) {
  std::vector<double> e(points.size());
  std::transform(points.begin(), points.end(), e.begin(), [](auto x) { return std::norm(x); });
  return e;
}

// exp(-nu (e_k - e_min)), shifted so the largest weight is 1.
std::vector<double> mb_weights(const std::vector<double>& e, double nu) {
  const double emin = *std::min_element(e.begin(), e.end());
  std::vector<double> w(e.size());
  std::transform(e.begin(), e.end(), w.begin(), [&](double ek) { return std::exp(-nu * (ek - emin)); });
  return w;
}

double shaped_energy(const std::vector<double>& e, double nu) {
  const auto w = mb_weights(e, nu);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < e.size(); ++k) {
    num += w[k] * e[k];
    den += w[k];
  }
  return num / den;
}

void check_symmetric(const std::vector<std::complex<double>>& points, const std::vector<double>& probs) {
  const double scale = std::accumulate(points.begin(), points.end(), 1.0,
                                       [](double acc, auto x) { return std::max(acc, std::abs(x)); });
  const double tol = 1e-12 * scale;
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return points[a].real() < points[b].real(); });

  for (std::size_t k = 0; k < points.size(); ++k) {
    const auto target = -points[k];
    auto lo = std::lower_bound(order.begin(), order.end(), target.real() - tol,
                               [&](std::size_t idx, double v) { return points[idx].real() < v; });
    bool found = false;
    for (auto it = lo; it != order.end() && points[*it].real() <= target.real() + tol; ++it) {
      if (std::abs(points[*it] - target) <= tol && std::abs(probs[*it] - probs[k]) <= 1e-12) {
        found = true;
        break;
      }
    }
    if (!found) {
      throw Error(ErrorKind::NonPhysicalInput, "constellation is not symmetric under x -> -x");
    }
  }
}

}  // namespace

Constellation::Constellation(std::vector<std::complex<double>> points, std::vector<double> probs, int order,
                             std::string id)
    : points_(std::move(points)), probs_(std::move(probs)), order_(order), id_(std::move(id)) {
  if (order_ < 1 || points_.size() != static_cast<std::size_t>(order_) * static_cast<std::size_t>(order_)) {
    throw Error(ErrorKind::InvalidOrder, "constellation of order " + std::to_string(order_) + " needs " +
                                             std::to_string(order_ * order_) + " points, got " +
                                             std::to_string(points_.size()));
  }
  if (probs_.size() != points_.size()) {
    throw Error(ErrorKind::DimensionMismatch, "points and probs differ in length");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < probs_.size(); ++k) {
    if (!(probs_[k] >= 0.0) || !std::isfinite(probs_[k]) || !std::isfinite(points_[k].real()) ||
        !std::isfinite(points_[k].imag())) {
      throw Error(ErrorKind::NonPhysicalInput, "non-finite point or negative probability");
    }
    total += probs_[k];
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw Error(ErrorKind::NonPhysicalInput, "probabilities sum to " + std::to_string(total));
  }
  check_symmetric(points_, probs_);
}

bool Constellation::is_uniform() const {
  return std::all_of(probs_.begin(), probs_.end(), [&](double p) { return p == probs_.front(); });
}

std::vector<std::complex<double>> qam_grid(int m, double spacing) {
  if (m < 1) {
    throw Error(ErrorKind::InvalidOrder, "QAM side order must be >= 1");
  }
  if (!(spacing > 0.0) || !std::isfinite(spacing)) {
    throw Error(ErrorKind::NonPhysicalInput, "QAM spacing must be finite and > 0");
  }
  std::vector<std::complex<double>> points;
  points.reserve(static_cast<std::size_t>(m) * m);
  const double half = spacing / 2.0;
  for (int i = 0; i < m; ++i) {
    const double re = static_cast<double>(2 * i - m + 1) * half;
    for (int j = 0; j < m; ++j) {
      points.emplace_back(re, static_cast<double>(2 * j - m + 1) * half);
    }
  }
  return points;
}

Constellation mb_shaped(std::span<const std::complex<double>> points, double nu, std::string id) {
  if (!(nu >= 0.0) || !std::isfinite(nu)) {
    throw Error(ErrorKind::NonPhysicalInput, "shaping exponent must be finite and >= 0");
  }
  if (points.empty()) {
    throw Error(ErrorKind::InvalidOrder, "empty point set");
  }
  const int order = order_from_size(points.size());
  auto probs = mb_weights(energies(points), nu);
  const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  for (auto& p : probs) p /= total;
  return Constellation({points.begin(), points.end()}, std::move(probs), order, std::move(id));
}

NuSolution solve_nu_for_energy(std::span<const std::complex<double>> points, double target) {
  if (points.empty()) {
    throw Error(ErrorKind::InvalidOrder, "empty point set");
  }
  if (!std::isfinite(target)) {
    throw Error(ErrorKind::Unreachable, "target energy is not finite");
  }
  const auto e = energies(points);
  const auto [min_it, max_it] = std::minmax_element(e.begin(), e.end());
  const double emin = *min_it;
  const double emax = *max_it;
  const double uniform = std::accumulate(e.begin(), e.end(), 0.0) / static_cast<double>(e.size());

  if (emax - emin <= 1e-12 * std::max(1.0, emax)) {
    if (std::abs(target - emin) <= 1e-9) return {0.0, true};
    throw Error(ErrorKind::Unreachable, "all points have |x|^2 = " + std::to_string(emin) +
                                            "; target " + std::to_string(target) + " is unattainable");
  }
  if (std::abs(target - uniform) <= 1e-12 * std::max(1.0, uniform)) return {0.0, false};
  if (target <= emin || target > uniform) {
    throw Error(ErrorKind::Unreachable, "target " + std::to_string(target) + " outside (" +
                                            std::to_string(emin) + ", " + std::to_string(uniform) +
                                            "] reachable with nu >= 0");
  }

  auto residual = [&](double nu) { return shaped_energy(e, nu) - target; };
  double hi = 1.0 / (uniform - emin);
  int doublings = 0;
  while (residual(hi) > 0.0) {
    hi *= 2.0;
    if (++doublings > 2000) {
      throw Error(ErrorKind::Unreachable, "target too close to the minimum point energy");
    }
  }
  std::uintmax_t max_iter = 500;
  const auto [lo_nu, hi_nu] = boost::math::tools::toms748_solve(
      residual, 0.0, hi, residual(0.0), residual(hi), boost::math::tools::eps_tolerance<double>(50), max_iter);
  const double nu = (lo_nu + hi_nu) / 2.0;
  if (std::abs(residual(nu)) > 1e-9) {
    throw Error(ErrorKind::ConvergenceFailure, "shaping root-finder missed the target energy");
  }
  return {nu, false};
}

double default_spacing(int m, double mbar) {
  if (m == 2) return std::sqrt(2.0 * mbar);
  if (m < 2) return 1.0;
  return std::sqrt(std::numbers::pi * mbar / m);
}

Constellation shaped_qam(int m, double mbar, std::optional<double> spacing) {
  if (m < 1) {
    throw Error(ErrorKind::InvalidOrder, "QAM side order must be >= 1");
  }
  if (!(mbar >= 0.0) || !std::isfinite(mbar)) {
    throw Error(ErrorKind::NonPhysicalInput, "mean photon number must be finite and >= 0");
  }
  const std::string id = "qam" + std::to_string(m * m) + "-mb";
  if (m == 1) {
    if (mbar != 0.0) {
      throw Error(ErrorKind::Unreachable, "the single-point constellation {0} has mean photon number 0");
    }
    return Constellation({{0.0, 0.0}}, {1.0}, 1, id);
  }
  const auto points = qam_grid(m, spacing.value_or(default_spacing(m, mbar)));
  const auto nu = solve_nu_for_energy(points, mbar);
  return mb_shaped(points, nu.nu, id);
}

double mean_energy(const Constellation& c) {
  double e = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) e += c.probs()[k] * std::norm(c.points()[k]);
  return e;
}

std::complex<double> first_moment(const Constellation& c) {
  const auto& x = c.points();
  const auto& p = c.probs();
  const std::size_t n = c.size();
  // Row-major square grids put the mirror of point k at n-1-k; summing the
  // pairs first makes the moment of such grids exactly zero.
  bool mirrored = true;
  for (std::size_t k = 0; k < n && mirrored; ++k) mirrored = x[n - 1 - k] == -x[k];
  std::complex<double> mu{};
  if (mirrored) {
    for (std::size_t k = 0; k < n / 2; ++k) mu += p[k] * x[k] + p[n - 1 - k] * x[n - 1 - k];
    if (n % 2 == 1) mu += p[n / 2] * x[n / 2];
  } else {
    for (std::size_t k = 0; k < n; ++k) mu += p[k] * x[k];
  }
  return mu;
}

std::vector<std::size_t> sample_indices(const Constellation& c, std::uint64_t seed, std::size_t count) {
  std::vector<double> cdf(c.size());
  std::partial_sum(c.probs().begin(), c.probs().end(), cdf.begin());
  const double total = cdf.back();
  std::vector<std::size_t> out(count);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t j = 0; j < count; ++j) {
    auto rng = stream_rng(seed, kSymbolStream, j);
    const double u = unit(rng) * total;
    const auto idx = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    out[j] = std::min(idx, c.size() - 1);
  }
  return out;
}

std::vector<std::complex<double>> sample(const Constellation& c, std::uint64_t seed, std::size_t count) {
  const auto idx = sample_indices(c, seed, count);
  std::vector<std::complex<double>> out(count);
  std::transform(idx.begin(), idx.end(), out.begin(), [&](std::size_t k) { return c.points()[k]; });
  return out;
}

nlohmann::json to_json(const Constellation& c) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& x : c.points()) points.push_back({x.real(), x.imag()});
  nlohmann::json meta = {{"order", c.order()}, {"mean_energy", mean_energy(c)}};
  if (!c.id().empty()) meta["id"] = c.id();
  return {{"points", std::move(points)}, {"probs", c.probs()}, {"meta", std::move(meta)}};
}

Constellation constellation_from_json(const nlohmann::json& j) {
  for (const auto& [key, _] : j.items()) {
    if (key != "points" && key != "probs" && key != "meta") {
      throw Error(ErrorKind::NonPhysicalInput, "unknown constellation key '" + key + "'");
    }
  }
  std::vector<std::complex<double>> points;
  for (const auto& p : j.at("points")) {
    if (!p.is_array() || p.size() != 2) {
      throw Error(ErrorKind::NonPhysicalInput, "each point must be [re, im]");
    }
    points.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
  }
  auto probs = j.at("probs").get<std::vector<double>>();
  int order = points.empty() ? 0 : order_from_size(points.size());
  std::string id;
  if (j.contains("meta")) {
    const auto& meta = j.at("meta");
    if (meta.contains("order")) order = meta.at("order").get<int>();
    if (meta.contains("id")) id = meta.at("id").get<std::string>();
  }
  return Constellation(std::move(points), std::move(probs), order, std::move(id));
}

}  // namespace dmcv
