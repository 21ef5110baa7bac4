#pragma once

#include "varopt/error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace varopt {

/// One-hidden-layer perceptron: tanh hidden units, linear output.
///
///   out(x) = bias_out + sum_j weights_out[j] * tanh(slope * (W_j . x + bias_hidden[j]))
///
/// Flat parameter order (used by the Jacobian and the trainer): weights_hidden
/// row-major, bias_hidden, weights_out, bias_out. `slope` is fixed.
template <typename Scalar>
struct Mlp {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Matrix weights_hidden;  // hidden x input
  Vector bias_hidden;     // hidden
  Vector weights_out;     // hidden
  Scalar bias_out = Scalar(0);
  Scalar slope = Scalar(1);

  static Mlp zeros(Eigen::Index input_dim, Eigen::Index hidden_units, Scalar slope = Scalar(1)) {
    Mlp net;
    net.weights_hidden = Matrix::Zero(hidden_units, input_dim);
    net.bias_hidden = Vector::Zero(hidden_units);
    net.weights_out = Vector::Zero(hidden_units);
    net.slope = slope;
    return net;
  }

  Eigen::Index input_dim() const { return weights_hidden.cols(); }
  Eigen::Index hidden_units() const { return weights_hidden.rows(); }
  Eigen::Index parameter_count() const { return hidden_units() * (input_dim() + 2) + 1; }

  Vector parameters() const {
    const Eigen::Index h = hidden_units();
    const Eigen::Index d = input_dim();
    Vector p(parameter_count());
    for (Eigen::Index j = 0; j < h; ++j) p.segment(j * d, d) = weights_hidden.row(j).transpose();
    p.segment(h * d, h) = bias_hidden;
    p.segment(h * d + h, h) = weights_out;
    p[p.size() - 1] = bias_out;
    return p;
  }

  void set_parameters(const Vector& p) {
    const Eigen::Index h = hidden_units();
    const Eigen::Index d = input_dim();
    require(p.size() == parameter_count(), ErrorCode::DimensionMismatch, "parameter vector has wrong length");
    for (Eigen::Index j = 0; j < h; ++j) weights_hidden.row(j) = p.segment(j * d, d).transpose();
    bias_hidden = p.segment(h * d, h);
    weights_out = p.segment(h * d + h, h);
    bias_out = p[p.size() - 1];
  }

  bool finite() const {
    return weights_hidden.allFinite() && bias_hidden.allFinite() && weights_out.allFinite() &&
           std::isfinite(bias_out) && std::isfinite(slope);
  }
};

using NeuralNet = Mlp<double>;

template <typename Scalar, typename Derived>
Scalar forward(const Mlp<Scalar>& net, const Eigen::MatrixBase<Derived>& x) {
  require(x.size() == net.input_dim(), ErrorCode::DimensionMismatch,
          "input has " + std::to_string(x.size()) + " entries, network expects " + std::to_string(net.input_dim()));
  const auto pre = (net.weights_hidden * x.derived().template cast<Scalar>() + net.bias_hidden).eval();
  Scalar out = net.bias_out;
  for (Eigen::Index j = 0; j < net.hidden_units(); ++j) out += net.weights_out[j] * std::tanh(net.slope * pre[j]);
  return out;
}

/// Rows of `inputs` are points; returns one output per row.
template <typename Scalar, typename Derived>
typename Mlp<Scalar>::Vector forward_batch(const Mlp<Scalar>& net, const Eigen::MatrixBase<Derived>& inputs) {
  using Vector = typename Mlp<Scalar>::Vector;
  require(inputs.cols() == net.input_dim() || inputs.rows() == 0, ErrorCode::DimensionMismatch,
          "batch has " + std::to_string(inputs.cols()) + " columns, network expects " +
              std::to_string(net.input_dim()));
  if (inputs.rows() == 0) return Vector(0);
  typename Mlp<Scalar>::Matrix act =
      (inputs.derived().template cast<Scalar>() * net.weights_hidden.transpose()).rowwise() +
      net.bias_hidden.transpose();
  act = (net.slope * act.array()).tanh().matrix();
  return (act * net.weights_out).array() + net.bias_out;
}

/// d out / d parameters for every row of `inputs` (rows x parameter_count).
template <typename Scalar, typename Derived>
typename Mlp<Scalar>::Matrix jacobian(const Mlp<Scalar>& net, const Eigen::MatrixBase<Derived>& inputs) {
  using Matrix = typename Mlp<Scalar>::Matrix;
  const Eigen::Index m = inputs.rows();
  const Eigen::Index h = net.hidden_units();
  const Eigen::Index d = net.input_dim();
  require(inputs.cols() == d, ErrorCode::DimensionMismatch, "batch has wrong column count");
  const Matrix x = inputs.derived().template cast<Scalar>();
  const Matrix act = ((x * net.weights_hidden.transpose()).rowwise() + net.bias_hidden.transpose())
                         .unaryExpr([&](Scalar v) { return std::tanh(net.slope * v); });
  Matrix jac(m, net.parameter_count());
  for (Eigen::Index r = 0; r < m; ++r) {
    for (Eigen::Index j = 0; j < h; ++j) {
      const Scalar a = act(r, j);
      const Scalar dpre = net.weights_out[j] * net.slope * (Scalar(1) - a * a);
      jac.block(r, j * d, 1, d) = dpre * x.row(r);
      jac(r, h * d + j) = dpre;
      jac(r, h * d + h + j) = a;
    }
    jac(r, h * (d + 2)) = Scalar(1);
  }
  return jac;
}

/// Upper bound on |out(x) - out(x')| / ||x - x'||.
template <typename Scalar>
Scalar lipschitz_bound(const Mlp<Scalar>& net) {
  Scalar bound = Scalar(0);
  for (Eigen::Index j = 0; j < net.hidden_units(); ++j) {
    bound += std::abs(net.weights_out[j]) * std::abs(net.slope) * net.weights_hidden.row(j).norm();
  }
  return bound;
}

/// Root mean square error between two equal-length vectors.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar rmse(const Eigen::MatrixBase<DerivedA>& predicted, const Eigen::MatrixBase<DerivedB>& actual) {
  require(predicted.size() == actual.size(), ErrorCode::LengthMismatch,
          "rmse of vectors with lengths " + std::to_string(predicted.size()) + " and " +
              std::to_string(actual.size()));
  require(predicted.size() >= 1, ErrorCode::EmptyValues, "rmse of empty vectors");
  return std::sqrt((actual - predicted).squaredNorm() / static_cast<typename DerivedA::Scalar>(predicted.size()));
}

struct Topology {
  Eigen::Index hidden_units = 0;  // 0 selects 2 * input_dim + 1
  double slope = 1.0;
};

struct TrainingConfig {
  Eigen::Index max_epochs = 200;
  double damping_init = 1e-3;
  double damping_up = 10.0;
  double damping_down = 0.1;
  double damping_max = 1e10;
  double target_rmse = 0.0;        // native units; 0 disables
  double holdout_fraction = 0.2;   // early-stopping split inside the training data
  Eigen::Index patience = 20;      // epochs without holdout improvement
  std::uint64_t seed = 0;
  double gradient_descent_threshold = 1e7;  // parameters * samples above which LM is skipped

  void validate() const;
};

enum class TrainingMethod { LevenbergMarquardt, GradientDescent };

struct TrainingResult {
  NeuralNet net;                     // best-holdout snapshot, native output units
  std::vector<double> training_rmse; // one entry per accepted epoch, native units
  std::vector<double> holdout_rmse;  // aligned with training_rmse
  Eigen::Index best_epoch = 0;       // index into the histories, -1 = initial weights
  double best_holdout_rmse = 0.0;
  TrainingMethod method = TrainingMethod::LevenbergMarquardt;
  std::string stop_reason;
};

/// Weight init: uniform in +-1/sqrt(fan_in) from the seeded stream.
NeuralNet init_network(Eigen::Index input_dim, const Topology& topology, std::uint64_t seed);

/// Damped Gauss-Newton (Levenberg-Marquardt) on the output residuals with a
/// seeded early-stopping split. Targets are standardized internally and the
/// scaling is folded back into the output layer. Only steps that lower the
/// training error are accepted. Throws TooFewSamples when n < hidden units
/// and NonFiniteLoss when the error cannot be evaluated.
TrainingResult train(const Eigen::Ref<const Eigen::MatrixXd>& inputs, const Eigen::Ref<const Eigen::VectorXd>& targets,
                     const Topology& topology, const TrainingConfig& config);

std::string to_string(TrainingMethod method);

}  // namespace varopt
