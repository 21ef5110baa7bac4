#include "varopt/kriging.hpp"

#include "varopt/error.hpp"
#include "varopt/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace varopt {

namespace {

constexpr double kJitter = 1e-10;
constexpr double kMinSeparation = 1e-10;
constexpr double kMinRcond = 1e-14;
constexpr double kFlatSill = 1e-12;
constexpr int kRangeGrid = 60;
constexpr int kGoldenIterations = 80;

struct LinearFit {
  double nugget = 0.0;
  double sill = 0.0;
  double sse = std::numeric_limits<double>::infinity();
};

double weighted_sse(std::span<const SemivariogramBin> bins, const Variogram& v) {
  double sse = 0.0;
  for (const auto& b : bins) {
    const double r = v.model(b.lag) - b.gamma;
    sse += static_cast<double>(b.pairs) * r * r;
  }
  return sse;
}

// Nugget and sill for a fixed range: two-variable weighted least squares
// with nugget >= 0, sill >= sill_floor, solved by enumerating active sets.
LinearFit fit_linear(std::span<const SemivariogramBin> bins, Variogram shape, double sill_floor) {
  double sw = 0, sf = 0, sff = 0, sg = 0, sfg = 0;
  for (const auto& b : bins) {
    const double w = static_cast<double>(b.pairs);
    const double f = shape.shape(b.lag);
    sw += w;
    sf += w * f;
    sff += w * f * f;
    sg += w * b.gamma;
    sfg += w * f * b.gamma;
  }

  LinearFit best;
  auto consider = [&](double nugget, double sill) {
    if (!(nugget >= 0.0) || !(sill >= sill_floor) || !std::isfinite(sill)) return;
    shape.nugget = nugget;
    shape.sill = sill;
    const double sse = weighted_sse(bins, shape);
    if (sse < best.sse) best = {nugget, sill, sse};
  };

  const double det = sw * sff - sf * sf;
  if (std::abs(det) > 1e-14 * sw * sff) {
    consider((sff * sg - sf * sfg) / det, (sw * sfg - sf * sg) / det);
  }
  if (sff > 0.0) consider(0.0, std::max(sfg / sff, sill_floor));
  consider(std::max((sg - sill_floor * sf) / sw, 0.0), sill_floor);
  return best;
}

double min_separation(const Eigen::MatrixXd& x) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < x.rows(); ++j) best = std::min(best, (x.row(i) - x.row(j)).norm());
  }
  return best;
}

}  // namespace

std::string to_string(VariogramKind kind) {
  switch (kind) {
    case VariogramKind::Gaussian: return "gaussian";
    case VariogramKind::Exponential: return "exponential";
    case VariogramKind::Spherical: return "spherical";
  }
  return "gaussian";
}

VariogramKind variogram_kind_from_string(const std::string& name) {
  if (name == "gaussian") return VariogramKind::Gaussian;
  if (name == "exponential") return VariogramKind::Exponential;
  if (name == "spherical") return VariogramKind::Spherical;
  throw Error(ErrorCode::InvalidConfig, "unknown variogram kind '" + name + "'");
}

double Variogram::shape(double h) const {
  const double t = h / range;
  switch (kind) {
    case VariogramKind::Gaussian: return 1.0 - std::exp(-t * t);
    case VariogramKind::Exponential: return 1.0 - std::exp(-t);
    case VariogramKind::Spherical: return t < 1.0 ? 1.5 * t - 0.5 * t * t * t : 1.0;
  }
  return 0.0;
}

std::vector<SemivariogramBin> empirical_semivariogram(const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                                                      const Eigen::Ref<const Eigen::VectorXd>& responses,
                                                      Eigen::Index n_bins) {
  const Eigen::Index n = inputs.rows();
  require(n >= 2, ErrorCode::TooFewPoints, "semivariogram needs at least two points");
  require(responses.size() == n, ErrorCode::LengthMismatch, "responses do not match inputs");
  require(n_bins >= 1, ErrorCode::InvalidConfig, "n_bins must be >= 1");

  const auto pair_count = static_cast<std::size_t>(n * (n - 1) / 2);
  std::vector<double> dist;
  std::vector<double> half_sq;
  dist.reserve(pair_count);
  half_sq.reserve(pair_count);
  double max_dist = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double h = (inputs.row(i) - inputs.row(j)).norm();
      const double dy = responses[i] - responses[j];
      dist.push_back(h);
      half_sq.push_back(0.5 * dy * dy);
      max_dist = std::max(max_dist, h);
    }
  }

  std::vector<double> lag_sum(static_cast<std::size_t>(n_bins), 0.0);
  std::vector<double> gamma_sum(static_cast<std::size_t>(n_bins), 0.0);
  std::vector<std::size_t> count(static_cast<std::size_t>(n_bins), 0);
  const double width = max_dist / static_cast<double>(n_bins);
  for (std::size_t p = 0; p < dist.size(); ++p) {
    Eigen::Index k = 0;
    if (width > 0.0) k = std::min<Eigen::Index>(static_cast<Eigen::Index>(dist[p] / width), n_bins - 1);
    const auto b = static_cast<std::size_t>(k);
    lag_sum[b] += dist[p];
    gamma_sum[b] += half_sq[p];
    ++count[b];
  }

  std::vector<SemivariogramBin> out;
  for (std::size_t b = 0; b < count.size(); ++b) {
    if (count[b] == 0) continue;
    const auto c = static_cast<double>(count[b]);
    out.push_back({lag_sum[b] / c, gamma_sum[b] / c, count[b]});
  }
  return out;
}

VariogramFit fit_variogram(std::span<const SemivariogramBin> empirical, VariogramKind kind,
                           std::optional<double> domain_diameter) {
  require(empirical.size() >= 3, ErrorCode::InsufficientBins,
          "variogram fit needs at least 3 nonempty bins, got " + std::to_string(empirical.size()));

  double max_lag = 0.0;
  double max_gamma = 0.0;
  for (const auto& b : empirical) {
    max_lag = std::max(max_lag, b.lag);
    max_gamma = std::max(max_gamma, b.gamma);
  }
  const double diameter = domain_diameter.value_or(max_lag);

  if (max_gamma <= 0.0 || max_lag <= 0.0) {
    VariogramFit flat;
    flat.variogram = {kind, 0.0, kFlatSill, diameter > 0.0 ? diameter : 1.0};
    flat.weighted_sse = weighted_sse(empirical, flat.variogram);
    flat.seed_sse = flat.weighted_sse;
    flat.degenerate = true;
    return flat;
  }

  const double sill_floor = 1e-12 * max_gamma;
  const double log_lo = std::log(1e-3 * max_lag);
  const double log_hi = std::log(10.0 * max_lag);
  const double step = (log_hi - log_lo) / (kRangeGrid - 1);

  auto evaluate = [&](double log_range) {
    Variogram v{kind, 0.0, 1.0, std::exp(log_range)};
    const LinearFit lin = fit_linear(empirical, v, sill_floor);
    v.nugget = lin.nugget;
    v.sill = lin.sill;
    return std::pair{v, lin.sse};
  };

  int best_index = 0;
  auto [best, best_sse] = evaluate(log_lo);
  for (int g = 1; g < kRangeGrid; ++g) {
    auto [v, sse] = evaluate(log_lo + g * step);
    if (sse < best_sse) {
      best = v;
      best_sse = sse;
      best_index = g;
    }
  }

  VariogramFit fit;
  fit.seed_sse = best_sse;

  // Golden-section refinement in log range around the best grid point.
  double a = log_lo + std::max(best_index - 1, 0) * step;
  double b = log_lo + std::min(best_index + 1, kRangeGrid - 1) * step;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - phi * (b - a);
  double d = a + phi * (b - a);
  auto fc = evaluate(c);
  auto fd = evaluate(d);
  for (int it = 0; it < kGoldenIterations && (b - a) > 1e-12; ++it) {
    if (fc.second < fd.second) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = evaluate(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = evaluate(d);
    }
    for (const auto* cand : {&fc, &fd}) {
      if (cand->second < best_sse) {
        best = cand->first;
        best_sse = cand->second;
      }
    }
  }

  fit.variogram = best;
  fit.weighted_sse = best_sse;
  return fit;
}

KrigingModel::KrigingModel(Eigen::MatrixXd inputs, Eigen::VectorXd responses, Variogram variogram)
    : inputs_(std::move(inputs)), responses_(std::move(responses)), variogram_(variogram) {
  const Eigen::Index n = inputs_.rows();
  require(n >= 1, ErrorCode::TooFewPoints, "kriging model needs training points");
  require(responses_.size() == n, ErrorCode::LengthMismatch, "responses do not match inputs");
  require(variogram_.sill > 0.0 && variogram_.range > 0.0 && variogram_.nugget >= 0.0, ErrorCode::InvalidConfig,
          "variogram needs sill > 0, range > 0, nugget >= 0");
  if (n >= 2 && min_separation(inputs_) < kMinSeparation) {
    throw Error(ErrorCode::SingularSystem, "duplicate or near-duplicate training points");
  }

  // Assembled in sill units; lambda is unchanged by the scaling, mu picks
  // up a factor of sill (restored in kriging_weights).
  const double inv_sill = 1.0 / variogram_.sill;
  gamma_.resize(n + 1, n + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    gamma_(i, i) = kJitter;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double g = inv_sill * variogram_((inputs_.row(i) - inputs_.row(j)).norm());
      gamma_(i, j) = g;
      gamma_(j, i) = g;
    }
    gamma_(i, n) = 1.0;
    gamma_(n, i) = 1.0;
  }
  gamma_(n, n) = 0.0;

  lu_.compute(gamma_);
  const double rcond = lu_.rcond();
  if (!(rcond > kMinRcond)) {
    throw Error(ErrorCode::SingularSystem, "kriging system is singular (rcond " + std::to_string(rcond) + ")");
  }
}

double KrigingModel::jitter() const { return kJitter; }

// Refinement with the jittered LU as the approximate inverse. Each sweep
// shrinks the jitter's effect by about jitter * cond; a sweep is kept per
// column only if it lowers the unjittered residual, so on systems too
// ill-conditioned for that the jittered solution stands.
Eigen::MatrixXd KrigingModel::solve(const Eigen::Ref<const Eigen::MatrixXd>& rhs) const {
  const Eigen::Index n = size();
  const auto residual_of = [&](const Eigen::MatrixXd& sol) {
    Eigen::MatrixXd r = rhs - gamma_ * sol;
    r.topRows(n) += kJitter * sol.topRows(n);
    return r;
  };
  Eigen::MatrixXd sol = lu_.solve(rhs);
  Eigen::MatrixXd res = residual_of(sol);
  for (int sweep = 0; sweep < 2; ++sweep) {
    const Eigen::MatrixXd trial = sol + lu_.solve(res);
    const Eigen::MatrixXd trial_res = residual_of(trial);
    for (Eigen::Index c = 0; c < sol.cols(); ++c) {
      if (trial_res.col(c).squaredNorm() < res.col(c).squaredNorm()) {
        sol.col(c) = trial.col(c);
        res.col(c) = trial_res.col(c);
      }
    }
  }
  return sol;
}

Eigen::VectorXd KrigingModel::rhs(const Eigen::Ref<const Eigen::VectorXd>& query) const {
  require(query.size() == dim(), ErrorCode::DimensionMismatch, "query has wrong dimension");
  const Eigen::Index n = size();
  Eigen::VectorXd r(n + 1);
  const double inv_sill = 1.0 / variogram_.sill;
  for (Eigen::Index i = 0; i < n; ++i) r[i] = inv_sill * variogram_((inputs_.row(i) - query.transpose()).norm());
  r[n] = 1.0;
  return r;
}

KrigingWeights kriging_weights(const KrigingModel& model, const Eigen::Ref<const Eigen::VectorXd>& query) {
  const Eigen::VectorXd sol = model.solve(model.rhs(query));
  return {sol.head(model.size()), sol[model.size()] * model.variogram().sill};
}

double kriging_predict(const KrigingModel& model, const Eigen::Ref<const Eigen::VectorXd>& query) {
  return kriging_weights(model, query).lambda.dot(model.responses());
}

Eigen::VectorXd kriging_predict_batch(const KrigingModel& model, const Eigen::Ref<const Eigen::MatrixXd>& queries) {
  require(queries.cols() == model.dim(), ErrorCode::DimensionMismatch, "queries have wrong dimension");
  const Eigen::Index n = model.size();
  const Eigen::Index m = queries.rows();
  if (m == 0) return Eigen::VectorXd(0);
  Eigen::MatrixXd rhs(n + 1, m);
  for (Eigen::Index q = 0; q < m; ++q) rhs.col(q) = model.rhs(queries.row(q).transpose());
  const Eigen::MatrixXd sol = model.solve(rhs);
  return sol.topRows(n).transpose() * model.responses();
}

KrigingModel fit_kriging(const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                         const Eigen::Ref<const Eigen::VectorXd>& responses, const KrigingConfig& config) {
  const auto bins = empirical_semivariogram(inputs, responses, config.n_bins);
  const double diameter = std::sqrt(static_cast<double>(inputs.cols()));
  Variogram v;
  if (bins.size() >= 3) {
    v = fit_variogram(bins, config.kind, diameter).variogram;
  } else {
    double mean_gamma = 0.0;
    for (const auto& b : bins) mean_gamma += b.gamma / static_cast<double>(bins.size());
    v = {config.kind, 0.0, mean_gamma > 0.0 ? mean_gamma : kFlatSill, diameter};
  }
  return KrigingModel(inputs, responses, v);
}

BootstrapResult bootstrap_resample(const SampleSet& samples, const std::string& fom, const KrigingConfig& config,
                                   std::size_t threads) {
  const Eigen::Index n = samples.size();
  require(n >= 4, ErrorCode::TooFewPoints, "bootstrap needs at least 4 samples, got " + std::to_string(n));
  const Eigen::VectorXd y = samples.response(fom);
  const Eigen::Index d = samples.dim();

  Eigen::VectorXd boot(n);
  std::vector<Variogram> variograms(static_cast<std::size_t>(n));
  std::vector<char> failed(static_cast<std::size_t>(n), 0);
  std::vector<std::string> messages(static_cast<std::size_t>(n));

  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t fold) {
    const auto out = static_cast<Eigen::Index>(fold);
    Eigen::MatrixXd x(n - 1, d);
    Eigen::VectorXd r(n - 1);
    for (Eigen::Index i = 0, k = 0; i < n; ++i) {
      if (i == out) continue;
      x.row(k) = samples.inputs.row(i);
      r[k] = y[i];
      ++k;
    }
    try {
      const KrigingModel model = fit_kriging(x, r, config);
      variograms[fold] = model.variogram();
      boot[out] = kriging_predict(model, samples.inputs.row(out).transpose());
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingularSystem) throw;
      boot[out] = y[out];
      failed[fold] = 1;
      messages[fold] = "fold " + std::to_string(fold) + ": " + e.what() + "; kept original response";
    }
  });

  BootstrapResult result;
  result.samples = samples;
  result.samples.set_response(fom, boot);
  result.fold_variograms = std::move(variograms);
  for (std::size_t f = 0; f < failed.size(); ++f) {
    if (failed[f]) {
      result.failed_folds.push_back(static_cast<Eigen::Index>(f));
      result.warnings.push_back(messages[f]);
    }
  }
  return result;
}

}  // namespace varopt
