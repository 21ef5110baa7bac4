#pragma once

#include "varopt/parameter_space.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace varopt {

/// n sample points in normalized coordinates plus optional response columns,
/// one per figure of merit, in native units.
struct SampleSet {
  Eigen::MatrixXd inputs;               // n x d, entries in [0,1]
  std::vector<std::string> fom_names;   // response column names
  Eigen::MatrixXd responses;            // n x fom_names.size()
  std::uint64_t seed = 0;
  std::string space_id;

  Eigen::Index size() const { return inputs.rows(); }
  Eigen::Index dim() const { return inputs.cols(); }
  bool has_response(const std::string& fom) const;
  Eigen::Index response_index(const std::string& fom) const;  // throws MissingResponses
  Eigen::VectorXd response(const std::string& fom) const;

  /// Adds or replaces a response column.
  void set_response(const std::string& fom, const Eigen::Ref<const Eigen::VectorXd>& values);

  /// Rows selected by index, preserving the given order.
  SampleSet subset(const std::vector<Eigen::Index>& rows) const;

  /// Checks the invariants (entries in [0,1], matching lengths, n >= 1).
  void validate() const;
};

/// Random Latin hypercube over [0,1]^d. Randomness is consumed as: one
/// Fisher-Yates permutation per column (column order), then one uniform
/// jitter per cell (row-major). Row i of column j lands in stratum perm_j[i].
SampleSet lhs_sample(const ParameterSpace& space, Eigen::Index n, std::uint64_t seed);

/// Same design for a bare dimension count.
Eigen::MatrixXd lhs_unit(Eigen::Index n, Eigen::Index d, std::uint64_t seed);

}  // namespace varopt
