// SPDX-License-Identifier: Apache-2.0
// LSTM and GRU layers with hand-derived backpropagation through time.
//
// LSTM (forget-gate variant):
//   i = sig(Wi x + Ui h + bi)    f = sig(Wf x + Uf h + bf)
//   o = sig(Wo x + Uo h + bo)    g = tanh(Wc x + Uc h + bc)
//   c' = f * c + i * g           h' = o * tanh(c')
//
// GRU (reset applied before the candidate's recurrent product):
//   z = sig(Wz x + Uz h + bz)    r = sig(Wr x + Ur h + br)
//   n = tanh(Wh x + Uh (r * h) + bh)
//   h' = (1 - z) * h + z * n
#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "glidecast/rng.hpp"
#include "glidecast/tensor.hpp"

namespace glidecast {

double sigmoid(double x);

enum LstmGate : std::size_t { kLstmInput = 0, kLstmForget = 1, kLstmOutput = 2, kLstmCandidate = 3 };
enum GruGate : std::size_t { kGruUpdate = 0, kGruReset = 1, kGruCandidate = 2 };

struct LstmParams {
    /// All-zero parameters named `<prefix>.Wi`, `<prefix>.Uf`, `<prefix>.bc`, ...
    LstmParams(std::size_t input_size, std::size_t hidden_size, const std::string& prefix = "lstm");

    std::size_t input_size;
    std::size_t hidden_size;
    std::array<Parameter, 4> W;  ///< H x D, indexed by LstmGate
    std::array<Parameter, 4> U;  ///< H x H
    std::array<Parameter, 4> b;  ///< H

    /// Canonical order: W i,f,o,c then U i,f,o,c then b i,f,o,c.
    std::vector<Parameter*> parameters();
    std::vector<const Parameter*> parameters() const;
};

/// Glorot-uniform weights, zero biases except the forget gate at 1.
LstmParams make_lstm_params(std::size_t input_size, std::size_t hidden_size, RngStream& rng,
                            const std::string& prefix = "lstm");

struct GruParams {
    /// All-zero parameters named `<prefix>.Wz`, `<prefix>.Ur`, `<prefix>.bh`, ...
    GruParams(std::size_t input_size, std::size_t hidden_size, const std::string& prefix = "gru");

    std::size_t input_size;
    std::size_t hidden_size;
    std::array<Parameter, 3> W;  ///< H x D, indexed by GruGate
    std::array<Parameter, 3> U;  ///< H x H
    std::array<Parameter, 3> b;  ///< H

    /// Canonical order: W z,r,h then U z,r,h then b z,r,h.
    std::vector<Parameter*> parameters();
    std::vector<const Parameter*> parameters() const;
};

/// Glorot-uniform weights, zero biases.
GruParams make_gru_params(std::size_t input_size, std::size_t hidden_size, RngStream& rng,
                          const std::string& prefix = "gru");

struct RecurrentState {
    std::vector<double> h;
    std::vector<double> c;  ///< LSTM only

    static RecurrentState zeros(std::size_t hidden_size, bool with_cell);
};

/// Activations cached by lstm_layer for the backward pass.
struct LstmTrace {
    std::size_t length = 0;
    std::size_t input_size = 0;
    std::size_t hidden_size = 0;
    std::vector<double> x;       ///< L x D
    std::vector<double> gates;   ///< L x 4 x H, post-activation
    std::vector<double> c;       ///< (L+1) x H, row 0 is the initial cell
    std::vector<double> h;       ///< (L+1) x H, row 0 is the initial hidden state
    std::vector<double> tanh_c;  ///< L x H
};

struct GruTrace {
    std::size_t length = 0;
    std::size_t input_size = 0;
    std::size_t hidden_size = 0;
    std::vector<double> x;      ///< L x D
    std::vector<double> gates;  ///< L x 3 x H, post-activation (z, r, n)
    std::vector<double> h;      ///< (L+1) x H
};

RecurrentState lstm_cell(std::span<const double> x, const RecurrentState& state,
                         const LstmParams& p);

/// Runs from a zero state and returns every hidden state, L x H.
Tensor lstm_layer(const Tensor& seq, const LstmParams& p, LstmTrace* trace = nullptr);

/// grad_out is L x H. Accumulates parameter gradients into p and returns the
/// L x D input gradient.
Tensor lstm_layer_backward(const LstmTrace& trace, const Tensor& grad_out, LstmParams& p);

std::vector<double> gru_cell(std::span<const double> x, std::span<const double> h,
                             const GruParams& p);

/// Runs from a zero state and returns only the final hidden state, H.
Tensor gru_layer(const Tensor& seq, const GruParams& p, GruTrace* trace = nullptr);

/// grad_out is H (final state only).
Tensor gru_layer_backward(const GruTrace& trace, const Tensor& grad_out, GruParams& p);

} // namespace glidecast
