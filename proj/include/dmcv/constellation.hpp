#pragma once

// Square QAM constellations with uniform or Maxwell-Boltzmann priors.
//
// Points are coherent amplitudes in the heterodyne (Husimi) convention, so the
// mean photon number of the ensemble is sum_k p_k |x_k|^2. Grids are indexed
// row-major over (Re, Im) ascending: index i*m + j has real-part level i and
// imaginary-part level j.

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace dmcv {

class Constellation {
 public:
  // Checks: |points| = order^2, probabilities non-negative and summing to 1
  // (1e-12), and x -> -x symmetry with equal probabilities.
  Constellation(std::vector<std::complex<double>> points, std::vector<double> probs, int order,
                std::string id = {});

  const std::vector<std::complex<double>>& points() const { return points_; }
  const std::vector<double>& probs() const { return probs_; }
  int order() const { return order_; }
  std::size_t size() const { return points_.size(); }
  const std::string& id() const { return id_; }

  // True when every probability is bitwise identical.
  bool is_uniform() const;

 private:
  std::vector<std::complex<double>> points_;
  std::vector<double> probs_;
  int order_;
  std::string id_;
};

struct NuSolution {
  double nu = 0.0;
  // All points share one magnitude; only that energy is attainable and nu is
  // arbitrary (reported as 0).
  bool degenerate = false;
};

std::vector<std::complex<double>> qam_grid(int m, double spacing);

// p_k proportional to exp(-nu |x_k|^2).
Constellation mb_shaped(std::span<const std::complex<double>> points, double nu, std::string id = {});

// Root of E_nu[|X|^2] = target over nu >= 0. Attainable targets lie in
// (min |x|^2, mean |x|^2]; the upper end is nu = 0.
NuSolution solve_nu_for_energy(std::span<const std::complex<double>> points, double target);

// Grid spacing used when a sweep does not fix one: sqrt(2 mbar) for m = 2
// (all four points must sit on |x|^2 = mbar), sqrt(pi mbar / m) otherwise.
double default_spacing(int m, double mbar);

// MB-shaped square QAM of side m whose mean photon number is mbar.
// m = 1 is the single point {0} and needs mbar = 0.
Constellation shaped_qam(int m, double mbar, std::optional<double> spacing = std::nullopt);

double mean_energy(const Constellation& c);
std::complex<double> first_moment(const Constellation& c);

// i.i.d. point indices / points following the constellation law. Element j
// depends only on (seed, j).
std::vector<std::size_t> sample_indices(const Constellation& c, std::uint64_t seed, std::size_t count);
std::vector<std::complex<double>> sample(const Constellation& c, std::uint64_t seed, std::size_t count);

// {"points": [[re, im], ...], "probs": [...], "meta": {"order": m, "id": ...}}
nlohmann::json to_json(const Constellation& c);
Constellation constellation_from_json(const nlohmann::json& j);

}  // namespace dmcv
