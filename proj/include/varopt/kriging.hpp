#pragma once

#include "varopt/sampling.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace varopt {

enum class VariogramKind { Gaussian, Exponential, Spherical };

std::string to_string(VariogramKind kind);
VariogramKind variogram_kind_from_string(const std::string& name);

/// Isotropic semivariogram model over normalized Euclidean distance.
struct Variogram {
  VariogramKind kind = VariogramKind::Gaussian;
  double nugget = 0.0;
  double sill = 1.0;
  double range = 1.0;

  /// Unit-sill shape, 0 at h = 0 and rising to 1.
  double shape(double h) const;

  /// Continuous model nugget + sill * shape(h); used when fitting.
  double model(double h) const { return nugget + sill * shape(h); }

  /// Value entering the kriging system: 0 at zero separation, model(h)
  /// otherwise. Keeping the diagonal at 0 makes training points interpolate
  /// exactly even with a nonzero nugget.
  double operator()(double h) const { return h > 0.0 ? model(h) : 0.0; }
};

struct SemivariogramBin {
  double lag = 0.0;        // mean pair distance in the bin
  double gamma = 0.0;      // half mean squared response difference
  std::size_t pairs = 0;
};

/// Classical estimator over all point pairs. Bins split [0, max distance]
/// into n_bins equal widths (the maximum lands in the last bin); empty bins
/// are dropped. Throws TooFewPoints when fewer than two points are given.
std::vector<SemivariogramBin> empirical_semivariogram(const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                                                      const Eigen::Ref<const Eigen::VectorXd>& responses,
                                                      Eigen::Index n_bins);

struct VariogramFit {
  Variogram variogram;
  double weighted_sse = 0.0;  // pair-count weighted squared error of the fit
  double seed_sse = 0.0;      // same error at the best coarse-grid point
  bool degenerate = false;    // all empirical values were zero
};

/// Pair-count weighted least squares over (nugget, sill, range). For a fixed
/// range the model is linear in nugget and sill, so those are solved exactly
/// under nugget >= 0, sill > 0; the range is searched on a log grid over
/// [1e-3, 10] x max lag and then refined by golden section.
/// Needs at least three bins (InsufficientBins). All-zero bins return the
/// flat variogram (nugget 0, tiny sill, range = domain_diameter) flagged
/// degenerate; domain_diameter defaults to the largest lag.
VariogramFit fit_variogram(std::span<const SemivariogramBin> empirical, VariogramKind kind,
                           std::optional<double> domain_diameter = std::nullopt);

/// Ordinary kriging predictor on one response column. The augmented system
///   [ G  1 ] [lambda]   [g0]
///   [ 1' 0 ] [  mu  ] = [ 1]
/// is assembled and LU-factorized once at construction; each query solves
/// for its own right-hand side. A 1e-10 * sill jitter on the diagonal of G
/// is there only for conditioning: solves refine the LU result against the
/// unjittered system, so training points still interpolate exactly. Training points must be pairwise
/// distinct (separation >= 1e-10), else SingularSystem. Immutable after construction.
class KrigingModel {
 public:
  KrigingModel(Eigen::MatrixXd inputs, Eigen::VectorXd responses, Variogram variogram);

  const Eigen::MatrixXd& inputs() const { return inputs_; }
  const Eigen::VectorXd& responses() const { return responses_; }
  const Variogram& variogram() const { return variogram_; }
  Eigen::Index size() const { return inputs_.rows(); }
  Eigen::Index dim() const { return inputs_.cols(); }

  /// The augmented (n+1) x (n+1) matrix in sill units (variogram block
  /// divided by sill), jitter included.
  const Eigen::MatrixXd& gamma_matrix() const { return gamma_; }
  double jitter() const;  // diagonal jitter, sill units

  /// Right-hand side (gamma(e_1, q), ..., gamma(e_n, q), 1), sill units.
  Eigen::VectorXd rhs(const Eigen::Ref<const Eigen::VectorXd>& query) const;

  /// Solution of the unjittered system, one column per right-hand side.
  Eigen::MatrixXd solve(const Eigen::Ref<const Eigen::MatrixXd>& rhs) const;

 private:
  Eigen::MatrixXd inputs_;
  Eigen::VectorXd responses_;
  Variogram variogram_;
  Eigen::MatrixXd gamma_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

struct KrigingWeights {
  Eigen::VectorXd lambda;
  double mu = 0.0;  // Lagrange multiplier of the unbiasedness constraint
};

KrigingWeights kriging_weights(const KrigingModel& model, const Eigen::Ref<const Eigen::VectorXd>& query);

double kriging_predict(const KrigingModel& model, const Eigen::Ref<const Eigen::VectorXd>& query);

/// One prediction per row of `queries`, still one weight solve per query.
Eigen::VectorXd kriging_predict_batch(const KrigingModel& model, const Eigen::Ref<const Eigen::MatrixXd>& queries);

struct KrigingConfig {
  VariogramKind kind = VariogramKind::Gaussian;
  Eigen::Index n_bins = 20;
};

/// Estimate, fit and factorize in one step. Falls back to a smooth default
/// variogram (nugget 0, sill = mean empirical value, range = sqrt(d)) when the
/// points give fewer than three nonempty bins.
KrigingModel fit_kriging(const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                         const Eigen::Ref<const Eigen::VectorXd>& responses, const KrigingConfig& config = {});

struct BootstrapResult {
  SampleSet samples;                     // inputs untouched, `fom` column replaced
  std::vector<Variogram> fold_variograms;
  std::vector<Eigen::Index> failed_folds;  // kept their original response
  std::vector<std::string> warnings;
};

/// Leave-one-out kriging relabeling: response i becomes the prediction at
/// inputs[i] from a model refit on the other n-1 rows. Folds run in row
/// order (possibly concurrently, results stored per fold). Needs n >= 4.
BootstrapResult bootstrap_resample(const SampleSet& samples, const std::string& fom,
                                   const KrigingConfig& config = {}, std::size_t threads = 1);

}  // namespace varopt
