#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace varopt {

struct ParameterDef {
  std::string name;
  double lower = 0.0;
  double upper = 1.0;
  double nominal = 0.0;
};

/// Named, bounded design/process variables. Dimension order is the order of
/// construction and is preserved by every serialization. Immutable.
class ParameterSpace {
 public:
  explicit ParameterSpace(std::vector<ParameterDef> dims);

  Eigen::Index dim() const { return static_cast<Eigen::Index>(dims_.size()); }
  const std::vector<ParameterDef>& parameters() const { return dims_; }
  const ParameterDef& operator[](Eigen::Index i) const { return dims_[static_cast<std::size_t>(i)]; }

  const Eigen::VectorXd& lower() const { return lower_; }
  const Eigen::VectorXd& upper() const { return upper_; }
  const Eigen::VectorXd& nominal() const { return nominal_; }
  Eigen::VectorXd width() const { return upper_ - lower_; }

  std::optional<Eigen::Index> index_of(const std::string& name) const;
  std::vector<std::string> names() const;

  bool contains(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::VectorXd clamp(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// Stable content hash (names, bounds, nominals) used for provenance.
  std::uint64_t hash() const;
  std::string hash_hex() const;  // 16 lowercase hex digits

 private:
  std::vector<ParameterDef> dims_;
  Eigen::VectorXd lower_;
  Eigen::VectorXd upper_;
  Eigen::VectorXd nominal_;
};

/// Maps native units onto [0,1]^d. Throws DimensionMismatch or OutOfBounds
/// (bounds are checked with a 1e-12 relative tolerance, then clamped).
Eigen::VectorXd normalize(const ParameterSpace& space, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Inverse of normalize. Throws DimensionMismatch or OutOfUnitCube.
Eigen::VectorXd denormalize(const ParameterSpace& space, const Eigen::Ref<const Eigen::VectorXd>& u);

/// Row-wise versions for n x d point matrices.
Eigen::MatrixXd normalize_rows(const ParameterSpace& space, const Eigen::Ref<const Eigen::MatrixXd>& x);
Eigen::MatrixXd denormalize_rows(const ParameterSpace& space, const Eigen::Ref<const Eigen::MatrixXd>& u);

}  // namespace varopt
