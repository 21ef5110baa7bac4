#pragma once

#include "varopt/parameter_space.hpp"
#include "varopt/simulator.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace varopt {

struct MCConfig {
  Eigen::Index n_runs = 1000;
  double sigma_fraction = 0.10;  // per-parameter std as a fraction of |nominal|
  std::uint64_t seed = 0;
  /// Optional parameter correlation matrix (d x d, SPD). Independent when unset.
  std::optional<Eigen::MatrixXd> correlation;
  Eigen::Index histogram_bins = 20;
  bool keep_raw = false;  // retain draws and responses in the report
  std::size_t threads = 1;

  void validate() const;
};

struct Histogram {
  std::vector<double> edges;        // n_bins + 1
  std::vector<std::size_t> counts;  // n_bins
};

struct FomStats {
  std::string name;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1)
  double min = 0.0;
  double max = 0.0;
  Histogram histogram;
};

struct MCReport {
  std::vector<FomStats> foms;
  Eigen::VectorXd nominal;   // native units
  MCConfig config;
  Eigen::MatrixXd draws;      // n_runs x d native units, when keep_raw
  Eigen::MatrixXd responses;  // n_runs x foms, when keep_raw

  const FomStats& fom(const std::string& name) const;  // throws MissingFoM
};

/// Mean shifted by the first value, so identical inputs give that value exactly.
template <typename Derived>
double sample_mean(const Eigen::DenseBase<Derived>& values) {
  const auto v = values.derived().template cast<double>().array();
  const double shift = v(0);
  return shift + (v - shift).mean();
}

/// Two-pass sample standard deviation with the n - 1 denominator.
template <typename Derived>
double sample_std(const Eigen::DenseBase<Derived>& values) {
  if (values.size() < 2) return 0.0;
  const auto v = values.derived().template cast<double>().array();
  const double m = sample_mean(values);
  return std::sqrt((v - m).square().sum() / static_cast<double>(values.size() - 1));
}

/// Equal-width bins over [min, max]; the maximum goes to the last bin. When
/// every value is equal all counts land in the first bin.
Histogram histogram(const Eigen::Ref<const Eigen::VectorXd>& values, Eigen::Index n_bins);

/// Gaussian perturbations around `nominal` (std = sigma_fraction * |nominal_i|),
/// clamped to the space box. Draw order: run-major, one standard normal per
/// parameter in dimension order.
Eigen::MatrixXd draw_perturbations(const ParameterSpace& space, const Eigen::Ref<const Eigen::VectorXd>& nominal,
                                   const MCConfig& config);

/// Monte Carlo process-variation analysis of every FoM of `evaluator`.
MCReport monte_carlo(const Simulator& evaluator, const ParameterSpace& space,
                     const Eigen::Ref<const Eigen::VectorXd>& nominal, const MCConfig& config);

}  // namespace varopt
