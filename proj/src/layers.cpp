// SPDX-License-Identifier: Apache-2.0
#include "glidecast/layers.hpp"

#include <cmath>
#include <string>

#include "glidecast/error.hpp"

namespace glidecast {

namespace {

void require_rank(const Tensor& t, std::size_t rank, const char* what) {
    if (t.rank() != rank) {
        throw ShapeError(std::string(what) + " must have rank " + std::to_string(rank) +
                         ", got " + shape_string(t.shape()));
    }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
    if (!a.same_shape(b)) {
        throw ShapeError(std::string(what) + ": shape " + shape_string(a.shape()) +
                         " does not match " + shape_string(b.shape()));
    }
}

} // namespace

Tensor conv1d(const Tensor& input, const Tensor& kernels, const Tensor& bias) {
    require_rank(input, 2, "conv1d input");
    require_rank(kernels, 3, "conv1d kernels");
    require_rank(bias, 1, "conv1d bias");
    const std::size_t length = input.dim(0);
    const std::size_t channels = input.dim(1);
    const std::size_t filters = kernels.dim(0);
    const std::size_t width = kernels.dim(2);
    if (kernels.dim(1) != channels || bias.dim(0) != filters) {
        throw ShapeError("conv1d: kernels " + shape_string(kernels.shape()) + " / bias " +
                         shape_string(bias.shape()) + " incompatible with input " +
                         shape_string(input.shape()));
    }
    if (width == 0 || length < width) {
        throw ShapeError("conv1d: sequence length " + std::to_string(length) +
                         " shorter than kernel width " + std::to_string(width));
    }
    const std::size_t out_len = length - width + 1;
    Tensor out({out_len, filters});
    for (std::size_t i = 0; i < out_len; ++i) {
        for (std::size_t k = 0; k < filters; ++k) {
            double acc = bias[k];
            for (std::size_t c = 0; c < channels; ++c) {
                const double* kern = kernels.data() + (k * channels + c) * width;
                for (std::size_t w = 0; w < width; ++w) {
                    acc += input.at(i + w, c) * kern[w];
                }
            }
            out.at(i, k) = acc;
        }
    }
    return out;
}

Tensor conv1d_backward(const Tensor& input, const Tensor& kernels, const Tensor& grad_out,
                       Tensor& grad_kernels, Tensor& grad_bias) {
    const std::size_t channels = input.dim(1);
    const std::size_t filters = kernels.dim(0);
    const std::size_t width = kernels.dim(2);
    const std::size_t out_len = input.dim(0) - width + 1;
    if (grad_out.rank() != 2 || grad_out.dim(0) != out_len || grad_out.dim(1) != filters) {
        throw ShapeError("conv1d_backward: upstream gradient has shape " +
                         shape_string(grad_out.shape()));
    }
    require_same_shape(grad_kernels, kernels, "conv1d_backward kernels gradient");

    Tensor grad_in(input.shape());
    for (std::size_t i = 0; i < out_len; ++i) {
        for (std::size_t k = 0; k < filters; ++k) {
            const double g = grad_out.at(i, k);
            grad_bias[k] += g;
            for (std::size_t c = 0; c < channels; ++c) {
                const std::size_t base = (k * channels + c) * width;
                for (std::size_t w = 0; w < width; ++w) {
                    grad_kernels[base + w] += g * input.at(i + w, c);
                    grad_in.at(i + w, c) += g * kernels[base + w];
                }
            }
        }
    }
    return grad_in;
}

Tensor dense(const Tensor& input, const Tensor& weights, const Tensor& bias) {
    require_rank(weights, 2, "dense weights");
    const std::size_t outputs = weights.dim(0);
    const std::size_t inputs = weights.dim(1);
    if (input.size() != inputs || bias.size() != outputs) {
        throw ShapeError("dense: weights " + shape_string(weights.shape()) + " incompatible with input " +
                         shape_string(input.shape()) + " / bias " + shape_string(bias.shape()));
    }
    Tensor out({outputs});
    const double* x = input.data();
    for (std::size_t j = 0; j < outputs; ++j) {
        const double* w = weights.data() + j * inputs;
        double acc = 0.0;
        for (std::size_t i = 0; i < inputs; ++i) {
            acc += w[i] * x[i];
        }
        out[j] = bias[j] + acc;
    }
    return out;
}

Tensor dense_backward(const Tensor& input, const Tensor& weights, const Tensor& grad_out,
                      Tensor& grad_weights, Tensor& grad_bias) {
    const std::size_t outputs = weights.dim(0);
    const std::size_t inputs = weights.dim(1);
    if (grad_out.size() != outputs) {
        throw ShapeError("dense_backward: upstream gradient has shape " +
                         shape_string(grad_out.shape()));
    }
    require_same_shape(grad_weights, weights, "dense_backward weights gradient");
    Tensor grad_in(input.shape());
    const double* x = input.data();
    double* gx = grad_in.data();
    for (std::size_t j = 0; j < outputs; ++j) {
        const double g = grad_out[j];
        grad_bias[j] += g;
        if (g == 0.0) {
            continue;
        }
        const double* w = weights.data() + j * inputs;
        double* gw = grad_weights.data() + j * inputs;
        for (std::size_t i = 0; i < inputs; ++i) {
            gw[i] += g * x[i];
            gx[i] += g * w[i];
        }
    }
    return grad_in;
}

Tensor relu(const Tensor& input) {
    Tensor out = input;
    for (double& v : out.values()) {
        v = v > 0.0 ? v : 0.0;
    }
    return out;
}

Tensor relu_backward(const Tensor& input, const Tensor& grad_out) {
    require_same_shape(input, grad_out, "relu_backward");
    Tensor grad_in(input.shape());
    for (std::size_t i = 0; i < input.size(); ++i) {
        grad_in[i] = input[i] > 0.0 ? grad_out[i] : 0.0;
    }
    return grad_in;
}

Tensor dropout(const Tensor& input, double rate, Mode mode, RngStream& rng, DropoutMask& mask) {
    if (!(rate >= 0.0 && rate < 1.0)) {
        throw InvalidRateError("dropout rate must lie in [0, 1), got " + std::to_string(rate));
    }
    mask.keep.clear();
    mask.scale = 1.0;
    if (mode == Mode::eval || rate == 0.0) {
        return input;
    }
    mask.scale = 1.0 / (1.0 - rate);
    mask.keep.resize(input.size());
    Tensor out(input.shape());
    for (std::size_t i = 0; i < input.size(); ++i) {
        const bool keep = rng.uniform() >= rate;
        mask.keep[i] = keep ? 1 : 0;
        out[i] = keep ? input[i] * mask.scale : 0.0;
    }
    return out;
}

Tensor dropout_backward(const DropoutMask& mask, const Tensor& grad_out) {
    if (mask.keep.empty()) {
        return grad_out;
    }
    if (mask.keep.size() != grad_out.size()) {
        throw ShapeError("dropout_backward: mask size does not match gradient");
    }
    Tensor grad_in(grad_out.shape());
    for (std::size_t i = 0; i < grad_out.size(); ++i) {
        grad_in[i] = mask.keep[i] ? grad_out[i] * mask.scale : 0.0;
    }
    return grad_in;
}

Tensor flatten_concat(std::span<const Tensor> parts) {
    std::size_t total = 0;
    for (const auto& p : parts) {
        total += p.size();
    }
    std::vector<double> values;
    values.reserve(total);
    for (const auto& p : parts) {
        values.insert(values.end(), p.values().begin(), p.values().end());
    }
    return Tensor::vector(std::move(values));
}

std::vector<Tensor> split_concat_grad(const Tensor& grad, std::span<const Tensor> parts) {
    std::vector<Tensor> out;
    out.reserve(parts.size());
    std::size_t offset = 0;
    for (const auto& p : parts) {
        if (offset + p.size() > grad.size()) {
            throw ShapeError("split_concat_grad: gradient shorter than concatenated parts");
        }
        std::vector<double> slice(grad.data() + offset, grad.data() + offset + p.size());
        out.emplace_back(p.shape(), std::move(slice));
        offset += p.size();
    }
    if (offset != grad.size()) {
        throw ShapeError("split_concat_grad: gradient longer than concatenated parts");
    }
    return out;
}

double glorot_bound(std::size_t fan_in, std::size_t fan_out) {
    return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

Tensor init_params(std::vector<std::size_t> shape, std::size_t fan_in, std::size_t fan_out,
                   RngStream& rng) {
    if (fan_in == 0 || fan_out == 0) {
        throw InvalidInputError("init_params: fans must be positive");
    }
    const double bound = glorot_bound(fan_in, fan_out);
    Tensor t(std::move(shape));
    for (double& v : t.values()) {
        v = rng.uniform(-bound, bound);
    }
    return t;
}

} // namespace glidecast
