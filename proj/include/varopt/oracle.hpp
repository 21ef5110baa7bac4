#pragma once

#include "varopt/parameter_space.hpp"
#include "varopt/simulator.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace varopt {

/// Product of two sines, sin(freq_a * u_a + phase_a) * sin(freq_b * u_b + phase_b).
struct RippleTerm {
  Eigen::Index a = 0;
  Eigen::Index b = 0;
  double freq_a = 1.0;
  double phase_a = 0.0;
  double freq_b = 1.0;
  double phase_b = 0.0;
};

/// One smooth analytic response over normalized inputs u:
///   value(u) = scale * (offset + linear . u + u' quadratic u + ripple_amplitude * sum ripple(u))
/// `quadratic` is symmetric. `offset` is chosen so value(nominal) == scale.
struct FomSurface {
  std::string name;
  std::string unit;
  double scale = 1.0;
  double offset = 0.0;
  Eigen::VectorXd linear;
  Eigen::MatrixXd quadratic;
  double ripple_amplitude = 0.0;
  std::vector<RippleTerm> ripple;

  double value(const Eigen::Ref<const Eigen::VectorXd>& u) const;
  /// Dimensionless part without scale and offset.
  double shape(const Eigen::Ref<const Eigen::VectorXd>& u) const;
};

/// Synthetic stand-in for a parameterized PLL netlist: 21 parameters
/// (7 lengths, 7 widths, 7 oxide thicknesses) and four FoMs calibrated to the
/// baseline power 2.48 mW, frequency 2.66 GHz, locking time 5.51 us and
/// jitter 16.80 ns at the nominal point. Entirely invented data.
class SyntheticPllOracle final : public Simulator {
 public:
  SyntheticPllOracle(ParameterSpace space, std::vector<FomSurface> surfaces, std::uint64_t generator_seed);

  std::string id() const override { return "synthetic-pll"; }
  const std::vector<std::string>& fom_names() const override { return names_; }
  Eigen::Index input_dim() const override { return space_.dim(); }

  /// Native-units input; throws OutOfBounds outside the box.
  Eigen::VectorXd evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const override;
  Eigen::MatrixXd evaluate_batch(const Eigen::Ref<const Eigen::MatrixXd>& x) const override;

  const ParameterSpace& space() const { return space_; }
  const std::vector<FomSurface>& surfaces() const { return surfaces_; }
  std::uint64_t generator_seed() const { return seed_; }

 private:
  ParameterSpace space_;
  std::vector<FomSurface> surfaces_;
  std::vector<std::string> names_;
  std::uint64_t seed_;
};

inline constexpr std::uint64_t kPllOracleSeed = 20150301;

/// Baseline FoM values the oracle is calibrated to, in SI units.
inline constexpr std::array<double, 4> kPllBaseline{2.48e-3, 2.66e9, 5.51e-6, 16.80e-9};
inline const std::array<std::string, 4> kPllFomNames{"power", "frequency", "locking_time", "jitter"};

/// Deterministic coefficient generator. Only the data-generation tool and
/// the regression test call this; everything else loads the shipped file.
SyntheticPllOracle generate_pll_oracle(std::uint64_t seed = kPllOracleSeed);

}  // namespace varopt
