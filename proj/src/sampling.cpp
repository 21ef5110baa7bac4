#include "varopt/sampling.hpp"

#include "varopt/error.hpp"
#include "varopt/rng.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace varopt {

bool SampleSet::has_response(const std::string& fom) const {
  return std::find(fom_names.begin(), fom_names.end(), fom) != fom_names.end();
}

Eigen::Index SampleSet::response_index(const std::string& fom) const {
  const auto it = std::find(fom_names.begin(), fom_names.end(), fom);
  require(it != fom_names.end(), ErrorCode::MissingResponses, "no response column '" + fom + "'");
  return static_cast<Eigen::Index>(it - fom_names.begin());
}

Eigen::VectorXd SampleSet::response(const std::string& fom) const {
  return responses.col(response_index(fom));
}

void SampleSet::set_response(const std::string& fom, const Eigen::Ref<const Eigen::VectorXd>& values) {
  require(values.size() == size(), ErrorCode::LengthMismatch,
          "response '" + fom + "' has " + std::to_string(values.size()) + " values for " +
              std::to_string(size()) + " samples");
  if (responses.rows() != size()) responses.resize(size(), 0);
  if (has_response(fom)) {
    responses.col(response_index(fom)) = values;
    return;
  }
  fom_names.push_back(fom);
  responses.conservativeResize(size(), responses.cols() + 1);
  responses.col(responses.cols() - 1) = values;
}

SampleSet SampleSet::subset(const std::vector<Eigen::Index>& rows) const {
  SampleSet out;
  out.fom_names = fom_names;
  out.seed = seed;
  out.space_id = space_id;
  out.inputs.resize(static_cast<Eigen::Index>(rows.size()), dim());
  out.responses.resize(static_cast<Eigen::Index>(rows.size()), responses.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto i = static_cast<Eigen::Index>(r);
    out.inputs.row(i) = inputs.row(rows[r]);
    if (responses.cols() > 0) out.responses.row(i) = responses.row(rows[r]);
  }
  return out;
}

void SampleSet::validate() const {
  require(size() >= 1, ErrorCode::ZeroSamples, "sample set is empty");
  require((inputs.array() >= 0.0).all() && (inputs.array() <= 1.0).all(), ErrorCode::OutOfUnitCube,
          "sample inputs outside [0,1]");
  require(static_cast<Eigen::Index>(fom_names.size()) == responses.cols(), ErrorCode::LengthMismatch,
          "response column names do not match response matrix");
  require(responses.cols() == 0 || responses.rows() == size(), ErrorCode::LengthMismatch,
          "response rows do not match sample count");
}

Eigen::MatrixXd lhs_unit(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  require(n >= 1, ErrorCode::ZeroSamples, "Latin hypercube needs at least one sample");
  require(d >= 1, ErrorCode::DimensionMismatch, "Latin hypercube needs at least one dimension");
  Rng rng(seed);

  std::vector<std::vector<Eigen::Index>> strata(static_cast<std::size_t>(d));
  for (auto& perm : strata) {
    perm.resize(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    rng.shuffle(std::span<Eigen::Index>(perm));
  }

  const double nd = static_cast<double>(n);
  Eigen::MatrixXd u(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const auto k = strata[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
      double v = (static_cast<double>(k) + rng.uniform()) / nd;
      // Rounding can push a value across its stratum edge; pull it back.
      while (std::floor(v * nd) > static_cast<double>(k)) v = std::nextafter(v, 0.0);
      while (std::floor(v * nd) < static_cast<double>(k)) v = std::nextafter(v, 1.0);
      u(i, j) = v;
    }
  }
  return u;
}

SampleSet lhs_sample(const ParameterSpace& space, Eigen::Index n, std::uint64_t seed) {
  SampleSet set;
  set.inputs = lhs_unit(n, space.dim(), seed);
  set.responses.resize(n, 0);
  set.seed = seed;
  set.space_id = space.hash_hex();
  return set;
}

}  // namespace varopt
