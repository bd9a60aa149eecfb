#pragma once

// Test-only reference computations. These deliberately avoid the library's
// code paths (no Eigen, no shared helpers) so they can check them.

#include <cmath>
#include <vector>

#include "skilldisc/env.hpp"
#include "skilldisc/nn.hpp"

namespace skilldisc::oracle {

// Enumerates all 16 binary 4-vectors and applies the closeness test literally.
inline bool pattern_match_brute_force(const ResourceVector& x, const EnvConfig& cfg) {
  double lo = x[0];
  double hi = x[0];
  for (int i = 1; i < 4; ++i) {
    lo = std::min(lo, x[i]);
    hi = std::max(hi, x[i]);
  }
  if (hi - lo < cfg.degenerate_eps) return true;
  for (int code = 0; code < 16; ++code) {
    bool close = true;
    for (int i = 0; i < 4; ++i) {
      const double b = (code >> (3 - i)) & 1;
      const double n = (x[i] - lo) / (hi - lo);
      if (std::abs(n - b) > cfg.abs_tol + cfg.rel_tol * std::abs(b)) close = false;
    }
    if (close) return true;
  }
  return false;
}

// Straight-line MLP evaluation over plain loops.
inline std::vector<double> mlp_reference(const nn::ParameterSet& params, const nn::NetworkSpec& specs,
                                         std::vector<double> x) {
  for (std::size_t l = 0; l < specs.size(); ++l) {
    const auto& w = params.arrays()[2 * l].values;
    const auto& b = params.arrays()[2 * l + 1].values;
    const int in = specs[l].input_size;
    const int out = specs[l].output_size;
    std::vector<double> y(static_cast<std::size_t>(out));
    for (int j = 0; j < out; ++j) {
      double acc = b[static_cast<std::size_t>(j)];
      for (int i = 0; i < in; ++i) acc += x[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(i * out + j)];
      switch (specs[l].activation) {
        case nn::Activation::tanh: acc = std::tanh(acc); break;
        case nn::Activation::relu: acc = acc > 0.0 ? acc : 0.0; break;
        case nn::Activation::identity: break;
      }
      y[static_cast<std::size_t>(j)] = acc;
    }
    x = std::move(y);
  }
  return x;
}

}  // namespace skilldisc::oracle

namespace skilldisc::oracle {

struct GradientCheck {
  std::size_t entries = 0;
  std::size_t matching = 0;
};

// Compares backward() against central differences of the objective
// sum_ij weights(i, j) * output(i, j).
inline GradientCheck finite_difference_check(const nn::ParameterSet& params, const nn::NetworkSpec& specs,
                                             const nn::Matrix& input, const nn::Matrix& weights,
                                             double h = 1e-5, double rel_tol = 1e-4,
                                             double abs_floor = 1e-8) {
  const auto objective = [&](const nn::ParameterSet& p) {
    const nn::Matrix out = nn::evaluate(p, specs, input);
    double f = 0.0;
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
      for (Eigen::Index c = 0; c < out.cols(); ++c) f += weights(r, c) * out(r, c);
    }
    return f;
  };
  const auto fwd = nn::forward(params, specs, input);
  const auto grads = nn::backward(params, specs, fwd.tape, weights);

  GradientCheck result;
  nn::ParameterSet probe = params;
  for (std::size_t k = 0; k < probe.size(); ++k) {
    auto& values = probe.arrays()[k].values;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + h;
      const double up = objective(probe);
      values[i] = saved - h;
      const double down = objective(probe);
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = grads.params.arrays()[k].values[i];
      const double scale = std::max(std::abs(numeric), std::abs(analytic));
      const bool ok = scale < abs_floor ? std::abs(numeric - analytic) <= abs_floor
                                        : std::abs(numeric - analytic) <= rel_tol * scale;
      ++result.entries;
      if (ok) ++result.matching;
    }
  }
  return result;
}

// Random network with 1..3 layers of width <= 16 and mixed activations.
inline nn::NetworkSpec random_small_spec(Rng& rng) {
  std::uniform_int_distribution<int> layers(1, 3);
  std::uniform_int_distribution<int> width(1, 16);
  std::uniform_int_distribution<int> act(0, 2);
  nn::NetworkSpec specs;
  int in = width(rng);
  const int n = layers(rng);
  for (int l = 0; l < n; ++l) {
    const int out = width(rng);
    specs.push_back({in, out, static_cast<nn::Activation>(act(rng))});
    in = out;
  }
  return specs;
}

inline nn::Matrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  nn::Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = u(rng);
  }
  return m;
}

}  // namespace skilldisc::oracle
