#pragma once

#include "varopt/parameter_space.hpp"
#include "varopt/sampling.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace varopt {

/// CSV exchange format: a header row naming every parameter of the space
/// (in any order) followed by FoM columns, then one row per sample. Inputs
/// are written in native units with 17 significant digits and normalized on
/// load; FoM values are written as-is.
void write_samples_csv(std::ostream& out, const SampleSet& samples, const ParameterSpace& space);
void save_samples(const SampleSet& samples, const ParameterSpace& space, const std::string& path);

/// Columns are matched by name, so permuted headers load identically. When
/// `known_foms` is given, any other non-parameter column is UnknownColumn.
/// Errors: MalformedCSV (with line), NonNumericCell (line, column),
/// UnknownColumn, OutOfBounds.
SampleSet read_samples_csv(std::istream& in, const ParameterSpace& space,
                           const std::optional<std::vector<std::string>>& known_foms = std::nullopt);
SampleSet load_samples(const std::string& path, const ParameterSpace& space,
                       const std::optional<std::vector<std::string>>& known_foms = std::nullopt);

/// Response-only CSV (header of FoM names, one row per sample) as produced
/// by an external simulator run over an existing sample file.
std::pair<std::vector<std::string>, Eigen::MatrixXd> load_response_csv(const std::string& path);

}  // namespace varopt
