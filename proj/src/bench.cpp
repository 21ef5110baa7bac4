#include "varopt/bench.hpp"

#include "varopt/error.hpp"
#include "varopt/rng.hpp"
#include "varopt/sampling.hpp"

#include <algorithm>
#include <chrono>
#include <limits>

namespace varopt {

namespace {

template <typename Fn>
double best_time(Eigen::Index repetitions, Fn&& fn) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index r = 0; r < repetitions; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

}  // namespace

BenchResult bench_predictions(const MetamodelBundle& bundle, const BenchConfig& config) {
  require(config.n_queries >= 1, ErrorCode::InvalidConfig, "bench needs at least one query");
  require(config.repetitions >= 1, ErrorCode::InvalidConfig, "bench needs at least one repetition");
  require(!bundle.models.empty(), ErrorCode::MissingFoM, "bundle has no models");
  const FomMetamodel& m = config.fom.empty() ? bundle.models.front() : bundle.model(config.fom);

  BenchResult out;
  out.fom = m.fom;
  out.n_queries = config.n_queries;
  out.n_training = bundle.samples.size();
  out.dim = bundle.space.dim();

  const Eigen::MatrixXd queries = lhs_unit(config.n_queries, out.dim, derive_seed(config.seed, "bench-queries"));
  const Eigen::VectorXd y = bundle.samples.response(m.fom);

  const auto t0 = std::chrono::steady_clock::now();
  const KrigingModel kriging = fit_kriging(bundle.samples.inputs, y, config.kriging);
  out.kriging_fit_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.variogram = kriging.variogram();

  Eigen::VectorXd kp, ap;
  out.kriging_seconds = best_time(config.repetitions, [&] { kp = kriging_predict_batch(kriging, queries); });
  out.ann_seconds = best_time(config.repetitions, [&] { ap = forward_batch(m.net, queries); });
  out.ratio = out.ann_seconds > 0.0 ? out.kriging_seconds / out.ann_seconds : std::numeric_limits<double>::infinity();
  out.mean_abs_difference = (kp - ap).cwiseAbs().mean();
  return out;
}

Json bench_to_json(const BenchResult& r, const BenchConfig& config, bool with_timings) {
  Json doc = {{"format_version", kFormatVersion},
              {"kind", "bench_result"},
              {"fom", r.fom},
              {"n_queries", r.n_queries},
              {"n_training", r.n_training},
              {"dim", r.dim},
              {"repetitions", config.repetitions},
              {"seed", config.seed},
              {"variogram", variogram_to_json(r.variogram)},
              {"mean_abs_difference", r.mean_abs_difference}};
  if (with_timings) {
    doc["timings"] = {{"kriging_fit_seconds", r.kriging_fit_seconds},
                      {"kriging_seconds", r.kriging_seconds},
                      {"ann_seconds", r.ann_seconds},
                      {"ratio", r.ratio}};
  }
  return doc;
}

}  // namespace varopt
