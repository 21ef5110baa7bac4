#pragma once

#include "varopt/json_io.hpp"
#include "varopt/kriging.hpp"
#include "varopt/pipeline.hpp"

#include <cstdint>
#include <string>

namespace varopt {

struct BenchConfig {
  Eigen::Index n_queries = 1000;
  Eigen::Index repetitions = 5;  // best wall time of this many runs is kept
  std::string fom;               // empty: first FoM of the bundle
  std::uint64_t seed = 0;
  KrigingConfig kriging;
};

struct BenchResult {
  std::string fom;
  Eigen::Index n_queries = 0;
  Eigen::Index n_training = 0;
  Eigen::Index dim = 0;
  double kriging_fit_seconds = 0.0;  // variogram fit + factorization, not part of the ratio
  double kriging_seconds = 0.0;
  double ann_seconds = 0.0;
  double ratio = 0.0;                // kriging_seconds / ann_seconds
  Variogram variogram;
  double mean_abs_difference = 0.0;  // between the two predictors on the queries
};

/// Batch prediction time of the FoM's network against ordinary kriging
/// fitted on every bundle sample, on one shared LHS query set.
BenchResult bench_predictions(const MetamodelBundle& bundle, const BenchConfig& config);

Json bench_to_json(const BenchResult& result, const BenchConfig& config, bool with_timings = true);

}  // namespace varopt
