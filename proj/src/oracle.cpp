#include "varopt/oracle.hpp"

#include "varopt/error.hpp"
#include "varopt/rng.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

namespace varopt {

double FomSurface::shape(const Eigen::Ref<const Eigen::VectorXd>& u) const {
  double ripple_sum = 0.0;
  for (const auto& r : ripple) {
    ripple_sum += std::sin(r.freq_a * u[r.a] + r.phase_a) * std::sin(r.freq_b * u[r.b] + r.phase_b);
  }
  return linear.dot(u) + u.dot(quadratic * u) + ripple_amplitude * ripple_sum;
}

double FomSurface::value(const Eigen::Ref<const Eigen::VectorXd>& u) const {
  return scale * (offset + shape(u));
}

SyntheticPllOracle::SyntheticPllOracle(ParameterSpace space, std::vector<FomSurface> surfaces,
                                       std::uint64_t generator_seed)
    : space_(std::move(space)), surfaces_(std::move(surfaces)), seed_(generator_seed) {
  const Eigen::Index d = space_.dim();
  for (const auto& s : surfaces_) {
    require(s.linear.size() == d && s.quadratic.rows() == d && s.quadratic.cols() == d,
            ErrorCode::DimensionMismatch, "FoM surface '" + s.name + "' does not match the space dimension");
    for (const auto& r : s.ripple) {
      require(r.a >= 0 && r.a < d && r.b >= 0 && r.b < d, ErrorCode::DimensionMismatch,
              "ripple term of '" + s.name + "' indexes outside the space");
    }
    names_.push_back(s.name);
  }
}

Eigen::VectorXd SyntheticPllOracle::evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const Eigen::VectorXd u = normalize(space_, x);
  Eigen::VectorXd out(static_cast<Eigen::Index>(surfaces_.size()));
  for (std::size_t k = 0; k < surfaces_.size(); ++k) out[static_cast<Eigen::Index>(k)] = surfaces_[k].value(u);
  return out;
}

Eigen::MatrixXd SyntheticPllOracle::evaluate_batch(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
  require(x.cols() == space_.dim() || x.rows() == 0, ErrorCode::DimensionMismatch, "batch has wrong column count");
  Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(surfaces_.size()));
  for (Eigen::Index r = 0; r < x.rows(); ++r) out.row(r) = evaluate(x.row(r).transpose()).transpose();
  return out;
}

namespace {

enum class Role { Length, Width, Oxide };

struct FomRecipe {
  const char* name;
  const char* unit;
  double drive_mix;  // weight on the shared drive-strength direction
  double noise_mix;  // weight on an independent random direction
  double cv;         // target std/mean under sigma = 10% of nominal
};

// Linear term sizes: under the 10%-of-nominal Monte Carlo each normalized
// input has std 1/6, so ||linear|| = 6 * cv before the quadratic part.
// Locking time and jitter load negatively on the drive direction, which puts
// them in conflict with power.
constexpr std::array<FomRecipe, 4> kRecipes{{
    {"power", "W", 1.0, 0.35, 0.08},
    {"frequency", "Hz", 0.8, 0.6, 0.06},
    {"locking_time", "s", -1.0, 0.45, 0.08},
    {"jitter", "s", -0.5, 0.8, 0.06},
}};

constexpr double kQuadraticShare = 0.01;  // var(quadratic) / var(linear) over the box
constexpr double kPairDensity = 0.4;      // chance an off-diagonal pair couples
constexpr double kMinPairFraction = 0.3;
constexpr double kRippleAmplitude = 0.004;
constexpr int kRippleTerms = 3;
constexpr double kBoxHalfWidth = 0.3;     // bounds are nominal * (1 -+ 0.3)

double round_sig(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*e", digits - 1, v);
  return std::strtod(buf, nullptr);
}

}  // namespace

SyntheticPllOracle generate_pll_oracle(std::uint64_t seed) {
  constexpr Eigen::Index d = 21;
  Rng rng(seed);

  // Parameters: p01..p07 lengths, p08..p14 widths, p15..p21 oxide thickness.
  std::vector<ParameterDef> params;
  std::vector<Role> roles;
  for (Eigen::Index i = 0; i < d; ++i) {
    const auto role = static_cast<Role>(i / 7);
    const double u = rng.uniform();
    double nominal = 0.0;
    switch (role) {
      case Role::Length: nominal = 0.18e-6 * (1.0 + 1.5 * u); break;
      case Role::Width: nominal = 0.5e-6 * std::exp(u * std::log(20.0)); break;
      case Role::Oxide: nominal = 4.0e-9 * (0.95 + 0.1 * u); break;
    }
    nominal = round_sig(nominal, 4);
    char name[8];
    std::snprintf(name, sizeof name, "p%02d", static_cast<int>(i + 1));
    params.push_back({name, nominal * (1.0 - kBoxHalfWidth), nominal * (1.0 + kBoxHalfWidth), nominal});
    roles.push_back(role);
  }
  ParameterSpace space(params);
  const Eigen::VectorXd u0 = normalize(space, space.nominal());

  // Shared drive-strength direction: wider devices drive harder, longer
  // channels and thicker oxide weaker.
  Eigen::VectorXd drive(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double sign = roles[static_cast<std::size_t>(i)] == Role::Width ? 1.0 : -1.0;
    drive[i] = sign * (0.5 + rng.uniform());
  }
  drive.normalize();

  const double var_t = 1.0 / 12.0;             // uniform on a unit interval
  const double fourth_t = 1.0 / 80.0;          // E[t^4] for t uniform on [-1/2, 1/2]

  std::vector<FomSurface> surfaces;
  for (std::size_t k = 0; k < kRecipes.size(); ++k) {
    const auto& recipe = kRecipes[k];
    FomSurface s;
    s.name = recipe.name;
    s.unit = recipe.unit;
    s.scale = kPllBaseline[k];

    Eigen::VectorXd noise(d);
    for (Eigen::Index i = 0; i < d; ++i) noise[i] = rng.normal();
    noise.normalize();
    Eigen::VectorXd a = recipe.drive_mix * drive + recipe.noise_mix * noise;
    a *= 6.0 * recipe.cv / a.norm();
    const double floor = 0.2 * a.norm() / std::sqrt(static_cast<double>(d));
    for (Eigen::Index i = 0; i < d; ++i) {
      if (std::abs(a[i]) < floor) a[i] = a[i] < 0.0 ? -floor : floor;
    }
    s.linear = a;

    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(d, d);
    int coupled = 0;
    for (Eigen::Index i = 0; i < d; ++i) {
      b(i, i) = rng.normal();
      for (Eigen::Index j = i + 1; j < d; ++j) {
        const double gate = rng.uniform();
        const double v = rng.normal();
        if (gate < kPairDensity) {
          b(i, j) = b(j, i) = 0.5 * v;
          ++coupled;
        }
      }
    }
    const int min_pairs = static_cast<int>(std::ceil(kMinPairFraction * d * (d - 1) / 2.0));
    for (Eigen::Index i = 0; i < d && coupled < min_pairs; ++i) {
      for (Eigen::Index j = i + 1; j < d && coupled < min_pairs; ++j) {
        if (b(i, j) == 0.0) {
          b(i, j) = b(j, i) = 0.25;
          ++coupled;
        }
      }
    }
    // Var(t' B t) for independent centered uniforms.
    double var_quad = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
      var_quad += b(i, i) * b(i, i) * (fourth_t - var_t * var_t);
      for (Eigen::Index j = 0; j < d; ++j) {
        if (i != j) var_quad += 2.0 * b(i, j) * b(i, j) * var_t * var_t;
      }
    }
    const double var_lin = a.squaredNorm() * var_t;
    s.quadratic = b * std::sqrt(kQuadraticShare * var_lin / var_quad);

    s.ripple_amplitude = kRippleAmplitude;
    for (int m = 0; m < kRippleTerms; ++m) {
      RippleTerm r;
      r.a = static_cast<Eigen::Index>(rng.below(d));
      r.b = static_cast<Eigen::Index>((static_cast<std::uint64_t>(r.a) + 1 + rng.below(d - 1)) % d);
      r.freq_a = 2.0 + 4.0 * rng.uniform();
      r.phase_a = 2.0 * std::numbers::pi * rng.uniform();
      r.freq_b = 2.0 + 4.0 * rng.uniform();
      r.phase_b = 2.0 * std::numbers::pi * rng.uniform();
      s.ripple.push_back(r);
    }

    s.offset = 1.0 - s.shape(u0);
    surfaces.push_back(std::move(s));
  }
  return SyntheticPllOracle(std::move(space), std::move(surfaces), seed);
}

}  // namespace varopt
