#pragma once

#include "varopt/ann.hpp"
#include "varopt/kriging.hpp"
#include "varopt/oracle.hpp"
#include "varopt/parameter_space.hpp"
#include "varopt/statistics.hpp"

#include <json.hpp>

#include <string>

namespace varopt {

using Json = nlohmann::ordered_json;

/// Major version written into every JSON file; readers reject other majors.
inline constexpr int kFormatVersion = 1;

Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& doc);
/// Throws UnsupportedVersion unless doc["format_version"] has our major.
void check_format_version(const Json& doc, const std::string& what);

Json vector_to_json(const Eigen::Ref<const Eigen::VectorXd>& v);
Eigen::VectorXd vector_from_json(const Json& j);
Json matrix_to_json(const Eigen::Ref<const Eigen::MatrixXd>& m);  // array of rows
Eigen::MatrixXd matrix_from_json(const Json& j);

/// {"parameters": [{"name", "lower", "upper", "nominal"}, ...]}; extra keys ignored.
Json space_to_json(const ParameterSpace& space);
ParameterSpace space_from_json(const Json& j);
ParameterSpace load_space(const std::string& path);

Json variogram_to_json(const Variogram& v);
Variogram variogram_from_json(const Json& j);

/// Inputs, responses and variogram. The factorization is not stored; loading
/// re-solves, which reproduces predictions up to floating-point reassociation.
Json kriging_to_json(const KrigingModel& model);
KrigingModel kriging_from_json(const Json& j);

Json network_to_json(const NeuralNet& net);
NeuralNet network_from_json(const Json& j);

Json histogram_to_json(const Histogram& h);
Json mc_report_to_json(const MCReport& report, const ParameterSpace& space);

Json oracle_to_json(const SyntheticPllOracle& oracle);
SyntheticPllOracle oracle_from_json(const Json& j);
SyntheticPllOracle load_oracle(const std::string& path);

}  // namespace varopt
