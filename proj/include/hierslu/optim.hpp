#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <random>
#include <string>

#include "hierslu/corpus.hpp"
#include "hierslu/tensor.hpp"

namespace hierslu {

// Uniform in [-a, a], a = sqrt(6 / (rows + cols)).
inline Tensor glorot_init(std::size_t rows, std::size_t cols, Rng& rng) {
  if (rows == 0 || cols == 0) throw Error(ErrorCode::InvalidArgument, "glorot_init: zero dimension");
  const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-a, a);
  Tensor t(rows, cols);
  for (auto& v : t.data) v = dist(rng);
  return t;
}

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct OptimizerState {
  AdamConfig config;
  std::size_t step = 0;
  std::map<std::string, Tensor> first_moment;
  std::map<std::string, Tensor> second_moment;

  OptimizerState() = default;
  explicit OptimizerState(AdamConfig c) : config(c) {}
};

// Bias-corrected Adam update over every parameter; gradients are zeroed
// afterwards.
inline void adam_step(ParameterStore& store, OptimizerState& opt) {
  ++opt.step;
  const auto& c = opt.config;
  const double t = static_cast<double>(opt.step);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  for (const auto& name : store.names()) {
    auto& p = store.value(name);
    auto& g = store.grad(name);
    auto [mit, m_new] = opt.first_moment.try_emplace(name, p.rows, p.cols);
    auto [vit, v_new] = opt.second_moment.try_emplace(name, p.rows, p.cols);
    auto& m = mit->second;
    auto& v = vit->second;
    for (std::size_t k = 0; k < p.size(); ++k) {
      m.data[k] = c.beta1 * m.data[k] + (1.0 - c.beta1) * g.data[k];
      v.data[k] = c.beta2 * v.data[k] + (1.0 - c.beta2) * g.data[k] * g.data[k];
      const double mhat = m.data[k] / bc1;
      const double vhat = v.data[k] / bc2;
      p.data[k] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
    }
    g.fill(0.0);
  }
}

}  // namespace hierslu
