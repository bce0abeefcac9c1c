#pragma once

// Single-hidden-layer network over hashed sparse inputs.
//
// Input weights live at in[index * hidden + j]; output weights at
// out[k * (hidden + 1) + j] with j == hidden holding the output bias.
// Templated on the scalar type so the same code path can be checked in
// double precision against finite differences.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "l2s/features.hpp"

namespace l2s::nn {

template <class Real>
struct Activations {
  std::vector<Real> pre;     // hidden pre-activations
  std::vector<Real> hidden;  // tanh(pre)
  std::vector<Real> out;     // per-class outputs
};

template <class Real, class InWeights, class OutWeights>
void forward(std::span<const Feature> x, std::uint32_t hidden, std::uint32_t classes, const InWeights& in,
             const OutWeights& out, Activations<Real>& act) {
  act.pre.assign(hidden, Real(0));
  act.hidden.assign(hidden, Real(0));
  act.out.assign(classes, Real(0));
  for (const Feature& f : x) {
    const std::size_t base = static_cast<std::size_t>(f.index) * hidden;
    for (std::uint32_t j = 0; j < hidden; ++j) act.pre[j] += static_cast<Real>(in[base + j]) * Real(f.value);
  }
  for (std::uint32_t j = 0; j < hidden; ++j) act.hidden[j] = std::tanh(act.pre[j]);
  const std::size_t stride = hidden + 1;
  for (std::uint32_t k = 0; k < classes; ++k) {
    Real o = static_cast<Real>(out[k * stride + hidden]);
    for (std::uint32_t j = 0; j < hidden; ++j) o += static_cast<Real>(out[k * stride + j]) * act.hidden[j];
    act.out[k] = o;
  }
}

// Squared-loss output gradients: delta_k = out_k - cost_k over the costed classes.
template <class Real>
Real squared_loss(const Activations<Real>& act, std::span<const std::uint32_t> classes, std::span<const float> costs,
                  std::vector<Real>& delta) {
  delta.assign(act.out.size(), Real(0));
  Real loss = 0;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    const Real d = act.out[classes[i]] - Real(costs[i]);
    delta[classes[i]] = d;
    loss += Real(0.5) * d * d;
  }
  return loss;
}

// One-against-all logistic loss with `positive` as the only +1 class.
template <class Real>
Real logistic_loss(const Activations<Real>& act, std::span<const std::uint32_t> classes, std::uint32_t positive,
                   std::vector<Real>& delta) {
  delta.assign(act.out.size(), Real(0));
  Real loss = 0;
  for (std::uint32_t k : classes) {
    const Real y = (k == positive) ? Real(1) : Real(-1);
    const Real margin = y * act.out[k];
    // log(1 + exp(-m)), stable for both signs
    loss += margin > 0 ? std::log1p(std::exp(-margin)) : -margin + std::log1p(std::exp(margin));
    const Real s = Real(1) / (Real(1) + std::exp(margin));
    delta[k] = -y * s;
  }
  return loss;
}

// Backpropagates output deltas. Calls on_out(weight_pos, grad) for every
// output weight of a class with nonzero delta, and on_in(weight_pos, grad)
// for every input weight touched by x. Gradients use pre-update weights.
template <class Real, class OutWeights, class OnIn, class OnOut>
void backward(std::span<const Feature> x, std::uint32_t hidden, const OutWeights& out, const Activations<Real>& act,
              const std::vector<Real>& delta, OnIn&& on_in, OnOut&& on_out) {
  const std::size_t stride = hidden + 1;
  std::vector<Real> dpre(hidden, Real(0));
  for (std::size_t k = 0; k < delta.size(); ++k) {
    if (delta[k] == Real(0)) continue;
    for (std::uint32_t j = 0; j < hidden; ++j)
      dpre[j] += delta[k] * static_cast<Real>(out[k * stride + j]);
  }
  for (std::uint32_t j = 0; j < hidden; ++j) dpre[j] *= Real(1) - act.hidden[j] * act.hidden[j];

  for (std::size_t k = 0; k < delta.size(); ++k) {
    if (delta[k] == Real(0)) continue;
    for (std::uint32_t j = 0; j < hidden; ++j) on_out(k * stride + j, delta[k] * act.hidden[j]);
    on_out(k * stride + hidden, delta[k]);
  }
  for (const Feature& f : x) {
    const std::size_t base = static_cast<std::size_t>(f.index) * hidden;
    for (std::uint32_t j = 0; j < hidden; ++j) on_in(base + j, dpre[j] * Real(f.value));
  }
}

}  // namespace l2s::nn
