#pragma once

// Small fixed-topology multilayer perceptrons with hand-written reverse-mode
// gradients. Batches are row-major matrices: one row per sample.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "skilldisc/env.hpp"

namespace skilldisc::nn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class Activation { tanh, relu, identity };

struct LayerSpec {
  int input_size = 1;
  int output_size = 1;
  Activation activation = Activation::identity;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

using NetworkSpec = std::vector<LayerSpec>;

/// Throws ContractError on empty specs, non-positive sizes or size mismatch
/// between consecutive layers.
void validate(std::span<const LayerSpec> specs);

// Kernel summation order depends on buffer alignment; aligned storage keeps
// results bit-identical across runs.
using Values = std::vector<double, Eigen::aligned_allocator<double>>;

struct ParameterArray {
  std::string name;
  std::vector<std::size_t> shape;
  Values values;

  friend bool operator==(const ParameterArray&, const ParameterArray&) = default;
};

/// Named parameter arrays. Layer l owns "layer<l>.weight" with shape
/// (input_size x output_size), stored row-major, and "layer<l>.bias".
class ParameterSet {
 public:
  ParameterSet() = default;

  /// Throws ContractError on a duplicate name or a size/shape disagreement.
  void add(std::string name, std::vector<std::size_t> shape, Values values);

  std::span<const ParameterArray> arrays() const { return arrays_; }
  std::span<ParameterArray> arrays() { return arrays_; }
  std::size_t size() const { return arrays_.size(); }

  const ParameterArray& at(std::string_view name) const;
  ParameterArray& at(std::string_view name);

  std::size_t scalar_count() const;
  bool all_finite() const;

  /// Same names and shapes in the same order.
  bool same_layout(const ParameterSet& other) const;

  /// Zero-valued set with this set's layout.
  ParameterSet zeros_like() const;

  friend bool operator==(const ParameterSet&, const ParameterSet&) = default;

 private:
  std::vector<ParameterArray> arrays_;
};

/// Weights uniform in +-1/sqrt(input_size), biases zero.
ParameterSet mlp_init(std::span<const LayerSpec> specs, Rng& rng);

/// Throws ContractError when `params` does not have the layout `specs` implies.
void check_layout(const ParameterSet& params, std::span<const LayerSpec> specs);

/// Cached activations of one forward pass. activations[0] is the input,
/// activations[l + 1] the post-activation output of layer l.
struct Tape {
  NetworkSpec specs;
  std::vector<Matrix> activations;
};

struct ForwardResult {
  Matrix output;
  Tape tape;
};

ForwardResult forward(const ParameterSet& params, std::span<const LayerSpec> specs,
                      const Matrix& input);

/// Tape-free evaluation for inference.
Matrix evaluate(const ParameterSet& params, std::span<const LayerSpec> specs, const Matrix& input);

Vector evaluate(const ParameterSet& params, std::span<const LayerSpec> specs, const Vector& input);

struct Gradients {
  ParameterSet params;
  Matrix input;
};

/// Reverse pass for the scalar objective sum_ij output_gradient(i, j) * output(i, j).
/// Throws ContractError when the tape came from different specs or the
/// gradient has the wrong shape.
Gradients backward(const ParameterSet& params, std::span<const LayerSpec> specs, const Tape& tape,
                   const Matrix& output_gradient);

struct AdamState {
  std::vector<Values> first_moment;
  std::vector<Values> second_moment;
  long long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

AdamState make_adam_state(const ParameterSet& params);

/// Bias-corrected Adam update in place. Throws NumericalError on non-finite
/// gradients (params and state are left untouched in that case).
void adam_step(ParameterSet& params, const ParameterSet& grads, AdamState& opt,
               double learning_rate);

/// target <- tau * online + (1 - tau) * target.
void polyak_update(ParameterSet& target, const ParameterSet& online, double tau);

/// Max-subtracted log-probabilities.
Vector log_softmax(const Vector& logits);
Matrix log_softmax_rows(const Matrix& logits);

}  // namespace skilldisc::nn
