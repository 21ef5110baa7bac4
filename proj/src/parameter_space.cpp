#include "varopt/parameter_space.hpp"

#include "varopt/error.hpp"
#include "varopt/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <set>

namespace varopt {

namespace {

constexpr double kBoundTolerance = 1e-12;

double slack(double lower, double upper) {
  return kBoundTolerance * std::max({std::abs(lower), std::abs(upper), upper - lower});
}

std::uint64_t mix_double(std::uint64_t h, double v) {
  std::uint64_t bits = 0;
  std::memcpy(&bits, &v, sizeof bits);
  return splitmix64(h ^ bits);
}

}  // namespace

ParameterSpace::ParameterSpace(std::vector<ParameterDef> dims) : dims_(std::move(dims)) {
  require(!dims_.empty(), ErrorCode::InvalidSpace, "parameter space has no dimensions");
  std::set<std::string> seen;
  const auto d = static_cast<Eigen::Index>(dims_.size());
  lower_.resize(d);
  upper_.resize(d);
  nominal_.resize(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const auto& p = dims_[static_cast<std::size_t>(i)];
    require(!p.name.empty(), ErrorCode::InvalidSpace, "parameter " + std::to_string(i) + " has no name");
    require(seen.insert(p.name).second, ErrorCode::InvalidSpace, "duplicate parameter name '" + p.name + "'");
    require(std::isfinite(p.lower) && std::isfinite(p.upper) && std::isfinite(p.nominal),
            ErrorCode::InvalidSpace, "non-finite bound for '" + p.name + "'");
    require(p.lower < p.upper, ErrorCode::InvalidSpace, "lower >= upper for '" + p.name + "'");
    require(p.lower <= p.nominal && p.nominal <= p.upper, ErrorCode::InvalidSpace,
            "nominal outside bounds for '" + p.name + "'");
    lower_[i] = p.lower;
    upper_[i] = p.upper;
    nominal_[i] = p.nominal;
  }
}

std::optional<Eigen::Index> ParameterSpace::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    if (dims_[i].name == name) return static_cast<Eigen::Index>(i);
  }
  return std::nullopt;
}

std::vector<std::string> ParameterSpace::names() const {
  std::vector<std::string> out;
  out.reserve(dims_.size());
  for (const auto& p : dims_) out.push_back(p.name);
  return out;
}

bool ParameterSpace::contains(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != dim()) return false;
  for (Eigen::Index i = 0; i < dim(); ++i) {
    const double s = slack(lower_[i], upper_[i]);
    if (!(x[i] >= lower_[i] - s && x[i] <= upper_[i] + s)) return false;
  }
  return true;
}

Eigen::VectorXd ParameterSpace::clamp(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return x.cwiseMax(lower_).cwiseMin(upper_);
}

std::uint64_t ParameterSpace::hash() const {
  std::uint64_t h = fnv1a64("varopt-space");
  for (const auto& p : dims_) {
    h = splitmix64(h ^ fnv1a64(p.name));
    h = mix_double(h, p.lower);
    h = mix_double(h, p.upper);
    h = mix_double(h, p.nominal);
  }
  return h;
}

Eigen::VectorXd normalize(const ParameterSpace& space, const Eigen::Ref<const Eigen::VectorXd>& x) {
  require(x.size() == space.dim(), ErrorCode::DimensionMismatch,
          "expected " + std::to_string(space.dim()) + " values, got " + std::to_string(x.size()));
  Eigen::VectorXd u(space.dim());
  for (Eigen::Index i = 0; i < space.dim(); ++i) {
    const double lo = space.lower()[i];
    const double hi = space.upper()[i];
    const double s = slack(lo, hi);
    if (!(x[i] >= lo - s && x[i] <= hi + s)) {
      throw Error(ErrorCode::OutOfBounds,
                  "dimension " + std::to_string(i) + " ('" + space[i].name + "') value " + std::to_string(x[i]));
    }
    u[i] = std::clamp((x[i] - lo) / (hi - lo), 0.0, 1.0);
  }
  return u;
}

Eigen::VectorXd denormalize(const ParameterSpace& space, const Eigen::Ref<const Eigen::VectorXd>& u) {
  require(u.size() == space.dim(), ErrorCode::DimensionMismatch,
          "expected " + std::to_string(space.dim()) + " values, got " + std::to_string(u.size()));
  Eigen::VectorXd x(space.dim());
  for (Eigen::Index i = 0; i < space.dim(); ++i) {
    if (!(u[i] >= -kBoundTolerance && u[i] <= 1.0 + kBoundTolerance)) {
      throw Error(ErrorCode::OutOfUnitCube, "dimension " + std::to_string(i) + " value " + std::to_string(u[i]));
    }
    const double lo = space.lower()[i];
    const double hi = space.upper()[i];
    x[i] = std::clamp(lo + std::clamp(u[i], 0.0, 1.0) * (hi - lo), lo, hi);
  }
  return x;
}

Eigen::MatrixXd normalize_rows(const ParameterSpace& space, const Eigen::Ref<const Eigen::MatrixXd>& x) {
  Eigen::MatrixXd u(x.rows(), space.dim());
  require(x.cols() == space.dim(), ErrorCode::DimensionMismatch, "point matrix has wrong column count");
  for (Eigen::Index r = 0; r < x.rows(); ++r) u.row(r) = normalize(space, x.row(r).transpose()).transpose();
  return u;
}

Eigen::MatrixXd denormalize_rows(const ParameterSpace& space, const Eigen::Ref<const Eigen::MatrixXd>& u) {
  Eigen::MatrixXd x(u.rows(), space.dim());
  require(u.cols() == space.dim(), ErrorCode::DimensionMismatch, "point matrix has wrong column count");
  for (Eigen::Index r = 0; r < u.rows(); ++r) x.row(r) = denormalize(space, u.row(r).transpose()).transpose();
  return x;
}

std::string ParameterSpace::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
  return buf;
}

}  // namespace varopt
