#include "varopt/simulator.hpp"

#include "varopt/error.hpp"

#include <algorithm>

namespace varopt {

Eigen::MatrixXd Simulator::evaluate_batch(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
  const auto k = static_cast<Eigen::Index>(fom_names().size());
  Eigen::MatrixXd out(x.rows(), k);
  for (Eigen::Index r = 0; r < x.rows(); ++r) out.row(r) = evaluate(x.row(r).transpose()).transpose();
  return out;
}

std::map<std::string, double> Simulator::evaluate_named(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const Eigen::VectorXd values = evaluate(x);
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < fom_names().size(); ++i) out[fom_names()[i]] = values[static_cast<Eigen::Index>(i)];
  return out;
}

Eigen::Index Simulator::fom_index(const std::string& fom) const {
  const auto& names = fom_names();
  const auto it = std::find(names.begin(), names.end(), fom);
  require(it != names.end(), ErrorCode::MissingFoM, "simulator '" + id() + "' has no FoM '" + fom + "'");
  return static_cast<Eigen::Index>(it - names.begin());
}

Eigen::VectorXd FunctionSimulator::evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  require(x.size() == input_dim_, ErrorCode::DimensionMismatch, "simulator '" + id_ + "' input has wrong dimension");
  Eigen::VectorXd out = fn_(x);
  require(out.size() == static_cast<Eigen::Index>(fom_names_.size()), ErrorCode::SimulatorFailure,
          "simulator '" + id_ + "' returned wrong number of FoMs");
  return out;
}

}  // namespace varopt
