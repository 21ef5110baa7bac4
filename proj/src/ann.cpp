#include "varopt/ann.hpp"

#include "varopt/rng.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace varopt {

namespace {

constexpr double kPerfectFit = 1e-12;  // standardized RMSE treated as exact

double sse_of(const NeuralNet& net, const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  return (forward_batch(net, x) - y).squaredNorm();
}

// Gradient of 0.5 * ||out - y||^2 without forming the Jacobian.
Eigen::VectorXd sse_gradient(const NeuralNet& net, const Eigen::MatrixXd& x, const Eigen::VectorXd& residual) {
  const Eigen::Index h = net.hidden_units();
  const Eigen::Index d = net.input_dim();
  const Eigen::MatrixXd act =
      (net.slope * ((x * net.weights_hidden.transpose()).rowwise() + net.bias_hidden.transpose()).array())
          .tanh()
          .matrix();
  const Eigen::MatrixXd dpre =
      ((1.0 - act.array().square()).rowwise() * (net.slope * net.weights_out.transpose().array())).matrix();
  const Eigen::MatrixXd weighted = dpre.array().colwise() * residual.array();
  Eigen::VectorXd g(net.parameter_count());
  const Eigen::MatrixXd gw = weighted.transpose() * x;  // h x d
  for (Eigen::Index j = 0; j < h; ++j) g.segment(j * d, d) = gw.row(j).transpose();
  g.segment(h * d, h) = weighted.colwise().sum().transpose();
  g.segment(h * d + h, h) = act.transpose() * residual;
  g[g.size() - 1] = residual.sum();
  return g;
}

struct Split {
  std::vector<Eigen::Index> train;
  std::vector<Eigen::Index> holdout;
};

Split split_rows(Eigen::Index n, double fraction, std::uint64_t seed) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Rng rng(derive_seed(seed, "ann-holdout"));
  rng.shuffle(std::span<Eigen::Index>(order));
  auto n_hold = static_cast<Eigen::Index>(std::floor(fraction * static_cast<double>(n) + 0.5));
  n_hold = std::clamp<Eigen::Index>(n_hold, 0, n - 1);
  Split s;
  s.holdout.assign(order.begin(), order.begin() + n_hold);
  s.train.assign(order.begin() + n_hold, order.end());
  std::sort(s.holdout.begin(), s.holdout.end());
  std::sort(s.train.begin(), s.train.end());
  return s;
}

Eigen::MatrixXd take_rows(const Eigen::Ref<const Eigen::MatrixXd>& m, const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  return out;
}

Eigen::VectorXd take(const Eigen::Ref<const Eigen::VectorXd>& v, const std::vector<Eigen::Index>& rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[rows[i]];
  return out;
}

// Damped Gauss-Newton step. Uses the sample-space form when the net has
// more parameters than rows; both forms give the same step.
Eigen::VectorXd lm_step(const Eigen::MatrixXd& jac, const Eigen::VectorXd& residual, double damping) {
  const Eigen::Index n = jac.rows();
  const Eigen::Index p = jac.cols();
  if (p <= n) {
    Eigen::MatrixXd normal = jac.transpose() * jac;
    normal.diagonal().array() += damping;
    return -normal.ldlt().solve(jac.transpose() * residual);
  }
  Eigen::MatrixXd gram = jac * jac.transpose();
  gram.diagonal().array() += damping;
  return -jac.transpose() * gram.ldlt().solve(residual);
}

}  // namespace

std::string to_string(TrainingMethod method) {
  return method == TrainingMethod::LevenbergMarquardt ? "levenberg-marquardt" : "gradient-descent";
}

void TrainingConfig::validate() const {
  require(max_epochs >= 1, ErrorCode::InvalidConfig, "max_epochs must be >= 1");
  require(damping_init > 0.0, ErrorCode::InvalidConfig, "damping_init must be > 0");
  require(damping_up > 1.0, ErrorCode::InvalidConfig, "damping_up must be > 1");
  require(damping_down > 0.0 && damping_down < 1.0, ErrorCode::InvalidConfig, "damping_down must be in (0,1)");
  require(holdout_fraction >= 0.0 && holdout_fraction < 1.0, ErrorCode::InvalidConfig,
          "holdout_fraction must be in [0,1)");
  require(patience >= 1, ErrorCode::InvalidConfig, "patience must be >= 1");
}

NeuralNet init_network(Eigen::Index input_dim, const Topology& topology, std::uint64_t seed) {
  const Eigen::Index h = topology.hidden_units > 0 ? topology.hidden_units : 2 * input_dim + 1;
  require(input_dim >= 1, ErrorCode::DimensionMismatch, "network needs at least one input");
  require(topology.slope > 0.0, ErrorCode::InvalidConfig, "tanh slope must be > 0");
  NeuralNet net = NeuralNet::zeros(input_dim, h, topology.slope);
  Rng rng(derive_seed(seed, "ann-init"));
  const double hidden_scale = 1.0 / std::sqrt(static_cast<double>(input_dim));
  const double out_scale = 1.0 / std::sqrt(static_cast<double>(h));
  for (Eigen::Index j = 0; j < h; ++j) {
    for (Eigen::Index i = 0; i < input_dim; ++i) net.weights_hidden(j, i) = hidden_scale * (2.0 * rng.uniform() - 1.0);
  }
  for (Eigen::Index j = 0; j < h; ++j) net.bias_hidden[j] = hidden_scale * (2.0 * rng.uniform() - 1.0);
  for (Eigen::Index j = 0; j < h; ++j) net.weights_out[j] = out_scale * (2.0 * rng.uniform() - 1.0);
  net.bias_out = 0.0;
  return net;
}

TrainingResult train(const Eigen::Ref<const Eigen::MatrixXd>& inputs, const Eigen::Ref<const Eigen::VectorXd>& targets,
                     const Topology& topology, const TrainingConfig& config) {
  config.validate();
  const Eigen::Index n = inputs.rows();
  const Eigen::Index d = inputs.cols();
  require(targets.size() == n, ErrorCode::LengthMismatch, "targets do not match inputs");
  const Eigen::Index hidden = topology.hidden_units > 0 ? topology.hidden_units : 2 * d + 1;
  require(n >= 2 && n >= hidden, ErrorCode::TooFewSamples,
          std::to_string(n) + " samples for " + std::to_string(hidden) + " hidden units");
  require(inputs.allFinite() && targets.allFinite(), ErrorCode::NonFiniteLoss, "training data is not finite");

  // Train on inputs mapped to [-1, 1]; folded back into the first layer at the end.
  const Eigen::MatrixXd centered = (2.0 * inputs.array() - 1.0).matrix();
  const Split split = split_rows(n, config.holdout_fraction, config.seed);
  const Eigen::MatrixXd x_train = take_rows(centered, split.train);
  const Eigen::MatrixXd x_hold = take_rows(centered, split.holdout);
  const Eigen::VectorXd y_train_raw = take(targets, split.train);
  const Eigen::VectorXd y_hold_raw = take(targets, split.holdout);

  const double mean = y_train_raw.mean();
  double scale = std::sqrt((y_train_raw.array() - mean).square().mean());
  if (!(scale > 0.0)) scale = 1.0;
  const Eigen::VectorXd y_train = (y_train_raw.array() - mean) / scale;
  const Eigen::VectorXd y_hold = (y_hold_raw.array() - mean) / scale;
  const bool has_holdout = !split.holdout.empty();

  NeuralNet net = init_network(d, {hidden, topology.slope}, config.seed);
  const auto rows = static_cast<double>(x_train.rows());
  auto holdout_error = [&](const NeuralNet& candidate) {
    return has_holdout ? rmse(forward_batch(candidate, x_hold), y_hold)
                       : std::sqrt(sse_of(candidate, x_train, y_train) / rows);
  };

  double sse = sse_of(net, x_train, y_train);
  require(std::isfinite(sse), ErrorCode::NonFiniteLoss, "initial training error is not finite");

  TrainingResult result;
  result.method = static_cast<double>(net.parameter_count()) * rows > config.gradient_descent_threshold
                      ? TrainingMethod::GradientDescent
                      : TrainingMethod::LevenbergMarquardt;
  NeuralNet best = net;
  double best_holdout = holdout_error(net);
  result.best_epoch = -1;
  Eigen::Index stale = 0;
  double damping = config.damping_init;
  double learning_rate = 1e-2;
  result.stop_reason = "max_epochs";

  for (Eigen::Index epoch = 0; epoch < config.max_epochs; ++epoch) {
    const Eigen::VectorXd params = net.parameters();
    const Eigen::VectorXd residual = forward_batch(net, x_train) - y_train;
    bool accepted = false;

    if (result.method == TrainingMethod::LevenbergMarquardt) {
      const Eigen::MatrixXd jac = jacobian(net, x_train);
      while (damping <= config.damping_max) {
        NeuralNet trial = net;
        trial.set_parameters(params + lm_step(jac, residual, damping));
        const double trial_sse = sse_of(trial, x_train, y_train);
        if (std::isfinite(trial_sse) && trial_sse < sse) {
          net = std::move(trial);
          sse = trial_sse;
          damping = std::max(damping * config.damping_down, 1e-12);
          accepted = true;
          break;
        }
        damping *= config.damping_up;
      }
    } else {
      const Eigen::VectorXd grad = sse_gradient(net, x_train, residual);
      while (learning_rate > 1e-12) {
        NeuralNet trial = net;
        trial.set_parameters(params - learning_rate * grad);
        const double trial_sse = sse_of(trial, x_train, y_train);
        if (std::isfinite(trial_sse) && trial_sse < sse) {
          net = std::move(trial);
          sse = trial_sse;
          learning_rate *= 1.1;
          accepted = true;
          break;
        }
        learning_rate *= 0.5;
      }
    }

    if (!accepted) {
      result.stop_reason = "no_descent_step";
      break;
    }
    require(net.finite(), ErrorCode::NonFiniteLoss, "weights diverged at epoch " + std::to_string(epoch));

    const double hold = holdout_error(net);
    result.training_rmse.push_back(scale * std::sqrt(sse / rows));
    result.holdout_rmse.push_back(scale * hold);
    if (hold < best_holdout) {
      best_holdout = hold;
      best = net;
      result.best_epoch = static_cast<Eigen::Index>(result.training_rmse.size()) - 1;
      stale = 0;
    } else {
      ++stale;
    }

    if (config.target_rmse > 0.0 && scale * best_holdout < config.target_rmse) {
      result.stop_reason = "target_rmse";
      break;
    }
    if (stale >= config.patience) {
      result.stop_reason = "patience";
      break;
    }
    if (std::sqrt(sse / rows) < kPerfectFit) {
      result.stop_reason = "exact_fit";
      break;
    }
  }

  best.bias_hidden -= best.weights_hidden.rowwise().sum();
  best.weights_hidden *= 2.0;
  best.weights_out *= scale;
  best.bias_out = best.bias_out * scale + mean;
  result.net = std::move(best);
  result.best_holdout_rmse = scale * best_holdout;
  return result;
}

}  // namespace varopt
