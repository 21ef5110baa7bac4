#pragma once

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace varopt {

/// Anything that maps a native-units parameter vector to figures of merit:
/// the synthetic oracle, a metamodel bundle, or an external tool wrapper.
/// evaluate() must be deterministic, and values are ordered as fom_names().
class Simulator {
 public:
  virtual ~Simulator() = default;

  virtual std::string id() const = 0;
  virtual const std::vector<std::string>& fom_names() const = 0;
  virtual Eigen::Index input_dim() const = 0;
  virtual Eigen::VectorXd evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const = 0;

  /// One row of FoM values per row of `x`. The default loops over evaluate().
  virtual Eigen::MatrixXd evaluate_batch(const Eigen::Ref<const Eigen::MatrixXd>& x) const;

  /// False when concurrent calls are unsafe; callers then stay serial.
  virtual bool concurrent_safe() const { return true; }

  std::map<std::string, double> evaluate_named(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::Index fom_index(const std::string& fom) const;  // throws MissingFoM
};

/// Wraps plain callables; mostly for tests and analytic evaluators.
class FunctionSimulator final : public Simulator {
 public:
  using Fn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

  FunctionSimulator(std::string id, Eigen::Index input_dim, std::vector<std::string> fom_names, Fn fn)
      : id_(std::move(id)), input_dim_(input_dim), fom_names_(std::move(fom_names)), fn_(std::move(fn)) {}

  std::string id() const override { return id_; }
  const std::vector<std::string>& fom_names() const override { return fom_names_; }
  Eigen::Index input_dim() const override { return input_dim_; }
  Eigen::VectorXd evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const override;

 private:
  std::string id_;
  Eigen::Index input_dim_;
  std::vector<std::string> fom_names_;
  Fn fn_;
};

}  // namespace varopt
