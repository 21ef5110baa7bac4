#pragma once

#include "varopt/ann.hpp"
#include "varopt/kriging.hpp"
#include "varopt/parameter_space.hpp"
#include "varopt/sampling.hpp"
#include "varopt/simulator.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace varopt {

struct PipelineConfig {
  bool bootstrap = true;
  double holdout_fraction = 0.2;  // verification split, drawn before any bootstrapping
  Topology topology;
  TrainingConfig training;        // training.seed is overwritten per FoM
  KrigingConfig kriging;
  std::size_t threads = 1;

  void validate() const;
};

/// One trained network per FoM. The net maps normalized inputs to native units.
struct FomMetamodel {
  std::string fom;
  NeuralNet net;
  double verification_rmse = 0.0;
  double rmse_relative = 0.0;  // rmse / range of the raw holdout responses
  std::uint64_t training_seed = 0;
  std::string training_method;
  std::string stop_reason;
  Eigen::Index best_epoch = 0;
  double final_training_rmse = 0.0;
  std::vector<std::string> warnings;  // from the bootstrap folds
};

struct BundleProvenance {
  std::string space_hash;
  std::string simulator_id;
  Eigen::Index n_samples = 0;
  std::uint64_t seed = 0;
  bool bootstrap = true;
};

struct MetamodelBundle {
  ParameterSpace space;
  std::vector<FomMetamodel> models;
  BundleProvenance provenance;
  SampleSet samples;                       // raw simulator responses, all rows
  std::vector<Eigen::Index> holdout_rows;  // ascending
  std::vector<Eigen::Index> training_rows; // ascending

  std::vector<std::string> fom_names() const;
  const FomMetamodel& model(const std::string& fom) const;  // throws MissingFoM
};

/// The bundle as a simulator in native units. Inputs outside the box throw OutOfBounds.
class BundleEvaluator final : public Simulator {
 public:
  explicit BundleEvaluator(const MetamodelBundle& bundle);

  std::string id() const override { return "metamodel-bundle"; }
  const std::vector<std::string>& fom_names() const override { return names_; }
  Eigen::Index input_dim() const override { return space_.dim(); }
  Eigen::VectorXd evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const override;
  Eigen::MatrixXd evaluate_batch(const Eigen::Ref<const Eigen::MatrixXd>& x) const override;

 private:
  ParameterSpace space_;
  std::vector<std::string> names_;
  std::vector<NeuralNet> nets_;
};

/// Fills every simulator FoM column of `samples`. A throwing or non-finite
/// row raises SimulatorFailure quoting that row in native units.
void simulate(const Simulator& simulator, const ParameterSpace& space, SampleSet& samples, std::size_t threads = 1);

/// rmse and rmse / (max - min) of the holdout responses; 0/0 counts as 0.
std::pair<double, double> verify(const NeuralNet& net, const SampleSet& holdout, const std::string& fom);

/// Splits, optionally bootstraps, trains and verifies every response column of `samples`.
MetamodelBundle fit_metamodels(const ParameterSpace& space, const SampleSet& samples, const PipelineConfig& config,
                               std::uint64_t seed, const std::string& simulator_id = "external");

/// lhs_sample -> simulate -> fit_metamodels. Needs n_samples >= 10.
MetamodelBundle build_metamodels(const Simulator& simulator, const ParameterSpace& space, Eigen::Index n_samples,
                                 const PipelineConfig& config, std::uint64_t seed);

/// Directory layout: bundle.json, <fom>.model.json per FoM, samples.csv.
void save_bundle(const MetamodelBundle& bundle, const std::string& dir);
MetamodelBundle load_bundle(const std::string& dir);

}  // namespace varopt
