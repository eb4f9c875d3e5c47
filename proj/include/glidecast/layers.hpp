// SPDX-License-Identifier: Apache-2.0
// Stateless differentiable building blocks. Every forward op has a matching
// *_backward that returns the input gradient and accumulates (+=) parameter
// gradients into the tensors it is handed.
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "glidecast/rng.hpp"
#include "glidecast/tensor.hpp"

namespace glidecast {

enum class Mode { train, eval };

/// Valid 1-D cross-correlation.
/// input L x Cin, kernels K x Cin x W, bias K  ->  (L - W + 1) x K
Tensor conv1d(const Tensor& input, const Tensor& kernels, const Tensor& bias);
Tensor conv1d_backward(const Tensor& input, const Tensor& kernels, const Tensor& grad_out,
                       Tensor& grad_kernels, Tensor& grad_bias);

/// input D, weights O x D, bias O  ->  O
Tensor dense(const Tensor& input, const Tensor& weights, const Tensor& bias);
Tensor dense_backward(const Tensor& input, const Tensor& weights, const Tensor& grad_out,
                      Tensor& grad_weights, Tensor& grad_bias);

Tensor relu(const Tensor& input);
/// Gradient passes where input > 0; the subgradient at 0 is 0.
Tensor relu_backward(const Tensor& input, const Tensor& grad_out);

/// Keep mask and survivor scale from one train-mode dropout call.
struct DropoutMask {
    std::vector<std::uint8_t> keep;  ///< empty means identity
    double scale = 1.0;
};

/// Inverted dropout. In eval mode, or with rate 0, the output is the input
/// and the mask is left empty. Throws InvalidRateError unless 0 <= rate < 1.
Tensor dropout(const Tensor& input, double rate, Mode mode, RngStream& rng, DropoutMask& mask);
Tensor dropout_backward(const DropoutMask& mask, const Tensor& grad_out);

/// Row-major flatten of each part, concatenated in order.
Tensor flatten_concat(std::span<const Tensor> parts);
/// Splits a concatenated gradient back into tensors shaped like `parts`.
std::vector<Tensor> split_concat_grad(const Tensor& grad, std::span<const Tensor> parts);

/// Glorot-uniform draws in [-b, b] with b = sqrt(6 / (fan_in + fan_out)).
Tensor init_params(std::vector<std::size_t> shape, std::size_t fan_in, std::size_t fan_out,
                   RngStream& rng);
double glorot_bound(std::size_t fan_in, std::size_t fan_out);

} // namespace glidecast
