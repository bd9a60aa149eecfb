#include "skilldisc/nn.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "skilldisc/errors.hpp"

namespace skilldisc::nn {
namespace {

using ConstMatrixMap = Eigen::Map<const Matrix>;
using ConstRowMap = Eigen::Map<const Eigen::RowVectorXd>;

std::string weight_name(std::size_t layer) { return "layer" + std::to_string(layer) + ".weight"; }
std::string bias_name(std::size_t layer) { return "layer" + std::to_string(layer) + ".bias"; }

std::size_t product(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

void apply_activation(Matrix& z, Activation activation) {
  switch (activation) {
    case Activation::tanh: z = z.array().tanh(); break;
    case Activation::relu: z = z.array().max(0.0); break;
    case Activation::identity: break;
  }
}

// Turns d(objective)/d(output) into d(objective)/d(pre-activation), given the
// post-activation output of the layer.
void apply_activation_grad(Matrix& grad, const Matrix& output, Activation activation) {
  switch (activation) {
    case Activation::tanh: grad.array() *= 1.0 - output.array().square(); break;
    case Activation::relu: grad.array() *= (output.array() > 0.0).cast<double>(); break;
    case Activation::identity: break;
  }
}

Matrix affine(const ParameterSet& params, std::size_t layer, const LayerSpec& spec,
              const Matrix& input) {
  const auto& w = params.arrays()[2 * layer].values;
  const auto& b = params.arrays()[2 * layer + 1].values;
  const ConstMatrixMap weight(w.data(), spec.input_size, spec.output_size);
  const ConstRowMap bias(b.data(), spec.output_size);
  Matrix z = input * weight;
  z.rowwise() += bias;
  return z;
}

}  // namespace

void validate(std::span<const LayerSpec> specs) {
  if (specs.empty()) throw ContractError("network needs at least one layer");
  for (std::size_t l = 0; l < specs.size(); ++l) {
    if (specs[l].input_size < 1 || specs[l].output_size < 1) {
      throw ContractError("layer " + std::to_string(l) + " has a non-positive size");
    }
    if (l > 0 && specs[l - 1].output_size != specs[l].input_size) {
      throw ContractError("layer " + std::to_string(l) + " input size " +
                          std::to_string(specs[l].input_size) + " does not match previous output " +
                          std::to_string(specs[l - 1].output_size));
    }
  }
}

void ParameterSet::add(std::string name, std::vector<std::size_t> shape,
                       Values values) {
  if (std::any_of(arrays_.begin(), arrays_.end(),
                  [&](const ParameterArray& a) { return a.name == name; })) {
    throw ContractError("duplicate parameter name '" + name + "'");
  }
  if (product(shape) != values.size()) {
    throw ContractError("parameter '" + name + "' shape does not match its value count");
  }
  arrays_.push_back({std::move(name), std::move(shape), std::move(values)});
}

const ParameterArray& ParameterSet::at(std::string_view name) const {
  for (const auto& a : arrays_) {
    if (a.name == name) return a;
  }
  throw ContractError("no parameter named '" + std::string(name) + "'");
}

ParameterArray& ParameterSet::at(std::string_view name) {
  return const_cast<ParameterArray&>(std::as_const(*this).at(name));
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& a : arrays_) n += a.values.size();
  return n;
}

bool ParameterSet::all_finite() const {
  return std::all_of(arrays_.begin(), arrays_.end(), [](const ParameterArray& a) {
    return std::all_of(a.values.begin(), a.values.end(), [](double x) { return std::isfinite(x); });
  });
}

bool ParameterSet::same_layout(const ParameterSet& other) const {
  return std::equal(arrays_.begin(), arrays_.end(), other.arrays_.begin(), other.arrays_.end(),
                    [](const ParameterArray& a, const ParameterArray& b) {
                      return a.name == b.name && a.shape == b.shape;
                    });
}

ParameterSet ParameterSet::zeros_like() const {
  ParameterSet out;
  for (const auto& a : arrays_) out.add(a.name, a.shape, Values(a.values.size(), 0.0));
  return out;
}

ParameterSet mlp_init(std::span<const LayerSpec> specs, Rng& rng) {
  validate(specs);
  ParameterSet params;
  for (std::size_t l = 0; l < specs.size(); ++l) {
    const auto in = static_cast<std::size_t>(specs[l].input_size);
    const auto out = static_cast<std::size_t>(specs[l].output_size);
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    std::uniform_real_distribution<double> uniform(-bound, bound);
    Values weights(in * out);
    for (auto& w : weights) w = uniform(rng);
    params.add(weight_name(l), {in, out}, std::move(weights));
    params.add(bias_name(l), {out}, Values(out, 0.0));
  }
  return params;
}

void check_layout(const ParameterSet& params, std::span<const LayerSpec> specs) {
  validate(specs);
  if (params.size() != 2 * specs.size()) {
    throw ContractError("parameter set has " + std::to_string(params.size()) +
                        " arrays, network needs " + std::to_string(2 * specs.size()));
  }
  for (std::size_t l = 0; l < specs.size(); ++l) {
    const auto in = static_cast<std::size_t>(specs[l].input_size);
    const auto out = static_cast<std::size_t>(specs[l].output_size);
    const auto& w = params.arrays()[2 * l];
    const auto& b = params.arrays()[2 * l + 1];
    if (w.name != weight_name(l) || w.shape != std::vector<std::size_t>{in, out} ||
        b.name != bias_name(l) || b.shape != std::vector<std::size_t>{out}) {
      throw ContractError("parameter layout does not match layer " + std::to_string(l));
    }
  }
}

namespace {

void check_input(std::span<const LayerSpec> specs, const Matrix& input) {
  if (input.cols() != specs.front().input_size) {
    throw ContractError("input width " + std::to_string(input.cols()) + " does not match network input " +
                        std::to_string(specs.front().input_size));
  }
}

}  // namespace

ForwardResult forward(const ParameterSet& params, std::span<const LayerSpec> specs,
                      const Matrix& input) {
  check_layout(params, specs);
  check_input(specs, input);
  ForwardResult result;
  result.tape.specs.assign(specs.begin(), specs.end());
  result.tape.activations.reserve(specs.size() + 1);
  result.tape.activations.push_back(input);
  for (std::size_t l = 0; l < specs.size(); ++l) {
    Matrix z = affine(params, l, specs[l], result.tape.activations.back());
    apply_activation(z, specs[l].activation);
    result.tape.activations.push_back(std::move(z));
  }
  result.output = result.tape.activations.back();
  return result;
}

Matrix evaluate(const ParameterSet& params, std::span<const LayerSpec> specs, const Matrix& input) {
  check_layout(params, specs);
  check_input(specs, input);
  Matrix x = input;
  for (std::size_t l = 0; l < specs.size(); ++l) {
    x = affine(params, l, specs[l], x);
    apply_activation(x, specs[l].activation);
  }
  return x;
}

Vector evaluate(const ParameterSet& params, std::span<const LayerSpec> specs, const Vector& input) {
  const Matrix row = input.transpose();
  return evaluate(params, specs, row).row(0).transpose();
}

Gradients backward(const ParameterSet& params, std::span<const LayerSpec> specs, const Tape& tape,
                   const Matrix& output_gradient) {
  check_layout(params, specs);
  if (!std::equal(specs.begin(), specs.end(), tape.specs.begin(), tape.specs.end()) ||
      tape.activations.size() != specs.size() + 1) {
    throw ContractError("tape was recorded for a different network");
  }
  const Matrix& output = tape.activations.back();
  if (output_gradient.rows() != output.rows() || output_gradient.cols() != output.cols()) {
    throw ContractError("output gradient shape does not match the recorded output");
  }

  Gradients grads{params.zeros_like(), Matrix()};
  Matrix delta = output_gradient;
  for (std::size_t l = specs.size(); l-- > 0;) {
    const auto& spec = specs[l];
    apply_activation_grad(delta, tape.activations[l + 1], spec.activation);
    const Matrix& layer_input = tape.activations[l];

    auto& gw = grads.params.arrays()[2 * l].values;
    auto& gb = grads.params.arrays()[2 * l + 1].values;
    Eigen::Map<Matrix>(gw.data(), spec.input_size, spec.output_size).noalias() =
        layer_input.transpose() * delta;
    Eigen::Map<Eigen::RowVectorXd>(gb.data(), spec.output_size) = delta.colwise().sum();

    const auto& w = params.arrays()[2 * l].values;
    const ConstMatrixMap weight(w.data(), spec.input_size, spec.output_size);
    Matrix upstream = delta * weight.transpose();
    delta = std::move(upstream);
  }
  grads.input = std::move(delta);
  return grads;
}

AdamState make_adam_state(const ParameterSet& params) {
  AdamState opt;
  for (const auto& a : params.arrays()) {
    opt.first_moment.emplace_back(a.values.size(), 0.0);
    opt.second_moment.emplace_back(a.values.size(), 0.0);
  }
  return opt;
}

void adam_step(ParameterSet& params, const ParameterSet& grads, AdamState& opt,
               double learning_rate) {
  if (!params.same_layout(grads) || opt.first_moment.size() != params.size() ||
      opt.second_moment.size() != params.size()) {
    throw ContractError("adam_step: parameter, gradient and optimizer layouts disagree");
  }
  for (const auto& g : grads.arrays()) {
    for (double x : g.values) {
      if (!std::isfinite(x)) throw NumericalError("adam_step: non-finite gradient in '" + g.name + "'");
    }
  }
  opt.step += 1;
  const double t = static_cast<double>(opt.step);
  const double correction1 = 1.0 - std::pow(opt.beta1, t);
  const double correction2 = 1.0 - std::pow(opt.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = params.arrays()[k].values;
    const auto& g = grads.arrays()[k].values;
    auto& m = opt.first_moment[k];
    auto& v = opt.second_moment[k];
    if (m.size() != p.size() || v.size() != p.size()) {
      throw ContractError("adam_step: moment shape mismatch for '" + params.arrays()[k].name + "'");
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = opt.beta1 * m[i] + (1.0 - opt.beta1) * g[i];
      v[i] = opt.beta2 * v[i] + (1.0 - opt.beta2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      p[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + opt.epsilon);
    }
  }
}

void polyak_update(ParameterSet& target, const ParameterSet& online, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw ContractError("polyak_update: tau must lie in [0, 1]");
  if (!target.same_layout(online)) throw ContractError("polyak_update: layouts differ");
  if (tau == 0.0) return;
  for (std::size_t k = 0; k < target.size(); ++k) {
    auto& t = target.arrays()[k].values;
    const auto& o = online.arrays()[k].values;
    if (tau == 1.0) {
      t = o;
      continue;
    }
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = tau * o[i] + (1.0 - tau) * t[i];
  }
}

Vector log_softmax(const Vector& logits) {
  const double m = logits.maxCoeff();
  const double log_sum = std::log((logits.array() - m).exp().sum());
  return (logits.array() - m - log_sum).matrix();
}

Matrix log_softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double m = logits.row(r).maxCoeff();
    const double log_sum = std::log((logits.row(r).array() - m).exp().sum());
    out.row(r) = logits.row(r).array() - m - log_sum;
  }
  return out;
}

}  // namespace skilldisc::nn
