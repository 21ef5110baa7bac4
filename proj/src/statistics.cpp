#include "varopt/statistics.hpp"

#include "varopt/error.hpp"
#include "varopt/parallel.hpp"
#include "varopt/rng.hpp"

#include <algorithm>

namespace varopt {

void MCConfig::validate() const {
  require(n_runs >= 2, ErrorCode::InvalidConfig, "Monte Carlo needs n_runs >= 2");
  require(sigma_fraction >= 0.0 && std::isfinite(sigma_fraction), ErrorCode::InvalidConfig,
          "sigma_fraction must be finite and >= 0");
  require(histogram_bins >= 1, ErrorCode::InvalidConfig, "histogram_bins must be >= 1");
}

const FomStats& MCReport::fom(const std::string& name) const {
  for (const auto& f : foms) {
    if (f.name == name) return f;
  }
  throw Error(ErrorCode::MissingFoM, "report has no FoM '" + name + "'");
}

Histogram histogram(const Eigen::Ref<const Eigen::VectorXd>& values, Eigen::Index n_bins) {
  require(values.size() >= 1, ErrorCode::EmptyValues, "histogram of no values");
  require(n_bins >= 1, ErrorCode::InvalidConfig, "histogram needs n_bins >= 1");
  const double lo = values.minCoeff();
  const double hi = values.maxCoeff();
  const double span = hi - lo;
  Histogram h;
  h.edges.resize(static_cast<std::size_t>(n_bins + 1));
  for (Eigen::Index k = 0; k <= n_bins; ++k) {
    h.edges[static_cast<std::size_t>(k)] = lo + span * static_cast<double>(k) / static_cast<double>(n_bins);
  }
  h.edges.back() = hi;
  h.counts.assign(static_cast<std::size_t>(n_bins), 0);
  for (const double v : values) {
    Eigen::Index k = 0;
    if (span > 0.0) {
      k = static_cast<Eigen::Index>((v - lo) / span * static_cast<double>(n_bins));
      k = std::clamp<Eigen::Index>(k, 0, n_bins - 1);
    }
    ++h.counts[static_cast<std::size_t>(k)];
  }
  return h;
}

Eigen::MatrixXd draw_perturbations(const ParameterSpace& space, const Eigen::Ref<const Eigen::VectorXd>& nominal,
                                   const MCConfig& config) {
  config.validate();
  const Eigen::Index d = space.dim();
  require(nominal.size() == d, ErrorCode::DimensionMismatch, "nominal has wrong dimension");
  require(space.contains(nominal), ErrorCode::OutOfBounds, "nominal point lies outside the parameter space");

  std::optional<Eigen::MatrixXd> mixing;
  if (config.correlation) {
    const Eigen::MatrixXd& c = *config.correlation;
    require(c.rows() == d && c.cols() == d, ErrorCode::DimensionMismatch, "correlation matrix has wrong size");
    Eigen::LLT<Eigen::MatrixXd> llt(c);
    require(llt.info() == Eigen::Success, ErrorCode::InvalidConfig, "correlation matrix is not positive definite");
    mixing = llt.matrixL();
  }

  const Eigen::VectorXd sigma = config.sigma_fraction * nominal.cwiseAbs();
  Rng rng(derive_seed(config.seed, "mc-draws"));
  Eigen::MatrixXd draws(config.n_runs, d);
  Eigen::VectorXd z(d);
  for (Eigen::Index r = 0; r < config.n_runs; ++r) {
    for (Eigen::Index i = 0; i < d; ++i) z[i] = rng.normal();
    if (mixing) z = (*mixing) * z;
    draws.row(r) = space.clamp(nominal + sigma.cwiseProduct(z)).transpose();
  }
  return draws;
}

MCReport monte_carlo(const Simulator& evaluator, const ParameterSpace& space,
                     const Eigen::Ref<const Eigen::VectorXd>& nominal, const MCConfig& config) {
  require(evaluator.input_dim() == space.dim(), ErrorCode::DimensionMismatch,
          "evaluator and parameter space disagree on dimension");
  const Eigen::MatrixXd draws = draw_perturbations(space, nominal, config);
  const auto k = static_cast<Eigen::Index>(evaluator.fom_names().size());

  Eigen::MatrixXd responses(config.n_runs, k);
  const std::size_t threads = evaluator.concurrent_safe() ? config.threads : 1;
  constexpr Eigen::Index kChunk = 256;
  const auto chunks = static_cast<std::size_t>((config.n_runs + kChunk - 1) / kChunk);
  parallel_for(chunks, threads, [&](std::size_t c) {
    const Eigen::Index begin = static_cast<Eigen::Index>(c) * kChunk;
    const Eigen::Index rows = std::min(kChunk, config.n_runs - begin);
    responses.middleRows(begin, rows) = evaluator.evaluate_batch(draws.middleRows(begin, rows));
  });
  if (!responses.allFinite()) throw Error(ErrorCode::SimulatorFailure, "evaluator returned non-finite values");

  MCReport report;
  report.nominal = nominal;
  report.config = config;
  for (Eigen::Index j = 0; j < k; ++j) {
    FomStats s;
    s.name = evaluator.fom_names()[static_cast<std::size_t>(j)];
    const auto col = responses.col(j);
    s.mean = sample_mean(col);
    s.std = sample_std(col);
    s.min = col.minCoeff();
    s.max = col.maxCoeff();
    s.histogram = histogram(col, config.histogram_bins);
    report.foms.push_back(std::move(s));
  }
  if (config.keep_raw) {
    report.draws = draws;
    report.responses = std::move(responses);
  }
  return report;
}

}  // namespace varopt
