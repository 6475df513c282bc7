/**
 * @file ctr_net.hpp
 * @brief MLP prediction head with hand-written backpropagation.
 *
 * Hidden layers use the rectifier; the single output unit goes through a
 * sigmoid and is scored with binary cross entropy.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "egin/common.hpp"
#include "egin/multi_interest.hpp"

namespace egin {

struct MlpParams {
  std::vector<Eigen::MatrixXd> weights;  // layer l: out x in
  std::vector<Eigen::VectorXd> biases;

  /// Layer sizes input -> hidden... -> 1, uniform(+-1/sqrt(fan_in)) weights,
  /// zero biases.
  static MlpParams init(std::size_t input_dim, const std::vector<std::size_t>& hidden, std::uint64_t seed);
  static MlpParams zeros_like(const MlpParams& shape);

  std::size_t input_dim() const { return static_cast<std::size_t>(weights.front().cols()); }
  std::size_t layers() const { return weights.size(); }
  void set_zero();
  /// this += scale * other
  void add_scaled(const MlpParams& other, double scale);
  bool all_finite() const;

  bool operator==(const MlpParams& other) const;
};

/// Per-layer inputs and pre-activations kept for the backward pass.
struct MlpCache {
  std::vector<Eigen::VectorXd> inputs;  // input to layer l
  std::vector<Eigen::VectorXd> pre;     // pre-activation of layer l
  double logit = 0.0;
  double pctr = 0.5;
};

/// Sigmoid output, clamped into [1e-15, 1 - 1e-15] so the loss stays finite.
double mlp_forward(const MlpParams& params, const Eigen::VectorXd& input, MlpCache* cache = nullptr);

/// Accumulates scale * dL/dparams into grads given dL/dlogit, and returns
/// dL/dinput (unscaled).
Eigen::VectorXd mlp_backward(const MlpParams& params, const MlpCache& cache, double dloss_dlogit,
                             double scale, MlpParams& grads);

/// concat(f_i2i, f_q2q, f_q2i, f_o)
Eigen::VectorXd assemble_input(const InterestFeatures& features, const std::vector<double>& other);

/// pctr = sigmoid(MLP(concat(f_i2i, f_q2q, f_q2i, f_o)))
double forward(const InterestFeatures& features, const std::vector<double>& other, const MlpParams& params);

struct CtrLoss {
  double loss;
  double dloss_dpctr;
};

/// Binary cross entropy; throws NumericError when pctr is outside (0, 1).
CtrLoss ctr_loss(double pctr, int label);

/// Gradients of one sample's L_CTR.
struct CtrGradients {
  MlpParams mlp;
  GradientBuffer bins;
  GradientBuffer positions;

  CtrGradients(const MlpParams& shape, std::size_t dim);
  void clear();
};

/// Runs forward + backward for one sample and adds scale * dL_CTR into
/// grads: the MLP parameters, and through the concatenated input, the bin and
/// position rows used by the three features. Returns the sample loss.
double ctr_backward(const InterestFeatures& features, const std::vector<double>& other, int label,
                    const MlpParams& params, const FeatureTables& tables, double scale,
                    CtrGradients& grads, bool train_positions = true);

/// Dense optimizer over every MLP parameter.
class MlpOptimizer {
 public:
  MlpOptimizer(OptimizerKind kind, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  void apply(MlpParams& params, const MlpParams& grads);

 private:
  OptimizerKind kind_;
  double lr_;
  double beta1_;
  double beta2_;
  double eps_;
  std::uint64_t step_ = 0;
  MlpParams m_;
  MlpParams v_;
};

/// Text layout: "mlp <layers>" then per layer "layer <rows> <cols>", rows*cols
/// weights in row-major order, then <rows> biases, one value per line.
void write_mlp(std::ostream& out, const MlpParams& params);
MlpParams read_mlp(std::istream& in);

}  // namespace egin
