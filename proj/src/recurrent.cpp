// SPDX-License-Identifier: Apache-2.0
#include "glidecast/recurrent.hpp"

#include <algorithm>
#include <cmath>

#include "glidecast/error.hpp"
#include "glidecast/layers.hpp"

namespace glidecast {

namespace {

constexpr const char* kLstmGateNames[4] = {"i", "f", "o", "c"};
constexpr const char* kGruGateNames[3] = {"z", "r", "h"};

// y[j] += sum_i m[j * cols + i] * v[i]
inline void gemv_acc(const double* m, const double* v, double* y, std::size_t rows,
                     std::size_t cols) {
    for (std::size_t j = 0; j < rows; ++j) {
        const double* mj = m + j * cols;
        double acc = 0.0;
        for (std::size_t i = 0; i < cols; ++i) {
            acc += mj[i] * v[i];
        }
        y[j] += acc;
    }
}

// y[i] += sum_j m[j * cols + i] * v[j]
inline void gemv_t_acc(const double* m, const double* v, double* y, std::size_t rows,
                       std::size_t cols) {
    for (std::size_t j = 0; j < rows; ++j) {
        const double vj = v[j];
        const double* mj = m + j * cols;
        for (std::size_t i = 0; i < cols; ++i) {
            y[i] += mj[i] * vj;
        }
    }
}

// m[j * cols + i] += a[j] * b[i]
inline void outer_acc(double* m, const double* a, const double* b, std::size_t rows,
                      std::size_t cols) {
    for (std::size_t j = 0; j < rows; ++j) {
        const double aj = a[j];
        double* mj = m + j * cols;
        for (std::size_t i = 0; i < cols; ++i) {
            mj[i] += aj * b[i];
        }
    }
}

void check_sequence(const Tensor& seq, std::size_t input_size, const char* what) {
    if (seq.rank() != 2 || seq.dim(0) == 0) {
        throw ShapeError(std::string(what) + ": expected a non-empty L x D sequence, got " +
                         shape_string(seq.shape()));
    }
    if (seq.dim(1) != input_size) {
        throw ShapeError(std::string(what) + ": input width " + std::to_string(seq.dim(1)) +
                         " does not match parameters (" + std::to_string(input_size) + ")");
    }
}

// One LSTM step writing post-activation gates (4 x H), the new cell and hidden state.
void lstm_step(const LstmParams& p, const double* x, const double* h_prev, const double* c_prev,
               double* gates, double* c_next, double* tanh_c, double* h_next) {
    const std::size_t H = p.hidden_size;
    const std::size_t D = p.input_size;
    for (std::size_t g = 0; g < 4; ++g) {
        double* a = gates + g * H;
        for (std::size_t j = 0; j < H; ++j) {
            a[j] = p.b[g].value[j];
        }
        gemv_acc(p.W[g].value.data(), x, a, H, D);
        gemv_acc(p.U[g].value.data(), h_prev, a, H, H);
        for (std::size_t j = 0; j < H; ++j) {
            a[j] = g == kLstmCandidate ? std::tanh(a[j]) : sigmoid(a[j]);
        }
    }
    const double* gi = gates + kLstmInput * H;
    const double* gf = gates + kLstmForget * H;
    const double* go = gates + kLstmOutput * H;
    const double* gc = gates + kLstmCandidate * H;
    for (std::size_t j = 0; j < H; ++j) {
        c_next[j] = gf[j] * c_prev[j] + gi[j] * gc[j];
        tanh_c[j] = std::tanh(c_next[j]);
        h_next[j] = go[j] * tanh_c[j];
    }
}

void gru_step(const GruParams& p, const double* x, const double* h_prev, double* gates,
              double* rh, double* h_next) {
    const std::size_t H = p.hidden_size;
    const std::size_t D = p.input_size;
    double* z = gates + kGruUpdate * H;
    double* r = gates + kGruReset * H;
    double* n = gates + kGruCandidate * H;
    for (std::size_t g : {kGruUpdate, kGruReset}) {
        double* a = gates + g * H;
        for (std::size_t j = 0; j < H; ++j) {
            a[j] = p.b[g].value[j];
        }
        gemv_acc(p.W[g].value.data(), x, a, H, D);
        gemv_acc(p.U[g].value.data(), h_prev, a, H, H);
        for (std::size_t j = 0; j < H; ++j) {
            a[j] = sigmoid(a[j]);
        }
    }
    for (std::size_t j = 0; j < H; ++j) {
        rh[j] = r[j] * h_prev[j];
        n[j] = p.b[kGruCandidate].value[j];
    }
    gemv_acc(p.W[kGruCandidate].value.data(), x, n, H, D);
    gemv_acc(p.U[kGruCandidate].value.data(), rh, n, H, H);
    for (std::size_t j = 0; j < H; ++j) {
        n[j] = std::tanh(n[j]);
        h_next[j] = (1.0 - z[j]) * h_prev[j] + z[j] * n[j];
    }
}

} // namespace

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

LstmParams::LstmParams(std::size_t in, std::size_t hidden, const std::string& prefix)
    : input_size(in), hidden_size(hidden) {
    for (std::size_t g = 0; g < 4; ++g) {
        W[g] = Parameter(prefix + ".W" + kLstmGateNames[g], Tensor({hidden, in}));
        U[g] = Parameter(prefix + ".U" + kLstmGateNames[g], Tensor({hidden, hidden}));
        b[g] = Parameter(prefix + ".b" + kLstmGateNames[g], Tensor({hidden}));
    }
}

std::vector<Parameter*> LstmParams::parameters() {
    std::vector<Parameter*> out;
    for (auto* group : {&W, &U, &b}) {
        for (auto& prm : *group) {
            out.push_back(&prm);
        }
    }
    return out;
}

std::vector<const Parameter*> LstmParams::parameters() const {
    std::vector<const Parameter*> out;
    for (const auto* group : {&W, &U, &b}) {
        for (const auto& prm : *group) {
            out.push_back(&prm);
        }
    }
    return out;
}

LstmParams make_lstm_params(std::size_t in, std::size_t hidden, RngStream& rng,
                            const std::string& prefix) {
    LstmParams p(in, hidden, prefix);
    for (std::size_t g = 0; g < 4; ++g) {
        p.W[g].value = init_params({hidden, in}, in, hidden, rng);
    }
    for (std::size_t g = 0; g < 4; ++g) {
        p.U[g].value = init_params({hidden, hidden}, hidden, hidden, rng);
    }
    p.b[kLstmForget].value.fill(1.0);
    return p;
}

GruParams::GruParams(std::size_t in, std::size_t hidden, const std::string& prefix)
    : input_size(in), hidden_size(hidden) {
    for (std::size_t g = 0; g < 3; ++g) {
        W[g] = Parameter(prefix + ".W" + kGruGateNames[g], Tensor({hidden, in}));
        U[g] = Parameter(prefix + ".U" + kGruGateNames[g], Tensor({hidden, hidden}));
        b[g] = Parameter(prefix + ".b" + kGruGateNames[g], Tensor({hidden}));
    }
}

std::vector<Parameter*> GruParams::parameters() {
    std::vector<Parameter*> out;
    for (auto* group : {&W, &U, &b}) {
        for (auto& prm : *group) {
            out.push_back(&prm);
        }
    }
    return out;
}

std::vector<const Parameter*> GruParams::parameters() const {
    std::vector<const Parameter*> out;
    for (const auto* group : {&W, &U, &b}) {
        for (const auto& prm : *group) {
            out.push_back(&prm);
        }
    }
    return out;
}

GruParams make_gru_params(std::size_t in, std::size_t hidden, RngStream& rng,
                          const std::string& prefix) {
    GruParams p(in, hidden, prefix);
    for (std::size_t g = 0; g < 3; ++g) {
        p.W[g].value = init_params({hidden, in}, in, hidden, rng);
    }
    for (std::size_t g = 0; g < 3; ++g) {
        p.U[g].value = init_params({hidden, hidden}, hidden, hidden, rng);
    }
    return p;
}

RecurrentState RecurrentState::zeros(std::size_t hidden_size, bool with_cell) {
    RecurrentState s;
    s.h.assign(hidden_size, 0.0);
    if (with_cell) {
        s.c.assign(hidden_size, 0.0);
    }
    return s;
}

RecurrentState lstm_cell(std::span<const double> x, const RecurrentState& state,
                         const LstmParams& p) {
    const std::size_t H = p.hidden_size;
    if (x.size() != p.input_size || state.h.size() != H || state.c.size() != H) {
        throw ShapeError("lstm_cell: input or state size does not match parameters");
    }
    std::vector<double> gates(4 * H);
    std::vector<double> tanh_c(H);
    RecurrentState next = RecurrentState::zeros(H, true);
    lstm_step(p, x.data(), state.h.data(), state.c.data(), gates.data(), next.c.data(),
              tanh_c.data(), next.h.data());
    return next;
}

Tensor lstm_layer(const Tensor& seq, const LstmParams& p, LstmTrace* trace) {
    check_sequence(seq, p.input_size, "lstm_layer");
    const std::size_t L = seq.dim(0);
    const std::size_t D = p.input_size;
    const std::size_t H = p.hidden_size;

    LstmTrace local;
    LstmTrace& t = trace ? *trace : local;
    t.length = L;
    t.input_size = D;
    t.hidden_size = H;
    t.x.assign(seq.values().begin(), seq.values().end());
    t.gates.assign(L * 4 * H, 0.0);
    t.c.assign((L + 1) * H, 0.0);
    t.h.assign((L + 1) * H, 0.0);
    t.tanh_c.assign(L * H, 0.0);

    Tensor out({L, H});
    for (std::size_t s = 0; s < L; ++s) {
        lstm_step(p, t.x.data() + s * D, t.h.data() + s * H, t.c.data() + s * H,
                  t.gates.data() + s * 4 * H, t.c.data() + (s + 1) * H, t.tanh_c.data() + s * H,
                  t.h.data() + (s + 1) * H);
        std::copy_n(t.h.data() + (s + 1) * H, H, out.data() + s * H);
    }
    return out;
}

Tensor lstm_layer_backward(const LstmTrace& t, const Tensor& grad_out, LstmParams& p) {
    const std::size_t L = t.length;
    const std::size_t D = t.input_size;
    const std::size_t H = t.hidden_size;
    if (L == 0) {
        throw StateError("lstm_layer_backward called without a forward trace");
    }
    if (grad_out.rank() != 2 || grad_out.dim(0) != L || grad_out.dim(1) != H) {
        throw ShapeError("lstm_layer_backward: upstream gradient has shape " +
                         shape_string(grad_out.shape()));
    }
    Tensor grad_in({L, D});
    std::vector<double> dh(H), dc(H), dh_next(H, 0.0), dc_next(H, 0.0), da(4 * H);

    for (std::size_t s = L; s-- > 0;) {
        const double* gates = t.gates.data() + s * 4 * H;
        const double* gi = gates + kLstmInput * H;
        const double* gf = gates + kLstmForget * H;
        const double* go = gates + kLstmOutput * H;
        const double* gc = gates + kLstmCandidate * H;
        const double* c_prev = t.c.data() + s * H;
        const double* h_prev = t.h.data() + s * H;
        const double* tc = t.tanh_c.data() + s * H;
        const double* x = t.x.data() + s * D;

        for (std::size_t j = 0; j < H; ++j) {
            dh[j] = grad_out.at(s, j) + dh_next[j];
            dc[j] = dh[j] * go[j] * (1.0 - tc[j] * tc[j]) + dc_next[j];
            const double d_o = dh[j] * tc[j];
            const double d_i = dc[j] * gc[j];
            const double d_g = dc[j] * gi[j];
            const double d_f = dc[j] * c_prev[j];
            da[kLstmInput * H + j] = d_i * gi[j] * (1.0 - gi[j]);
            da[kLstmForget * H + j] = d_f * gf[j] * (1.0 - gf[j]);
            da[kLstmOutput * H + j] = d_o * go[j] * (1.0 - go[j]);
            da[kLstmCandidate * H + j] = d_g * (1.0 - gc[j] * gc[j]);
            dc_next[j] = dc[j] * gf[j];
            dh_next[j] = 0.0;
        }
        double* dx = grad_in.data() + s * D;
        for (std::size_t g = 0; g < 4; ++g) {
            const double* dag = da.data() + g * H;
            outer_acc(p.W[g].grad.data(), dag, x, H, D);
            outer_acc(p.U[g].grad.data(), dag, h_prev, H, H);
            double* gb = p.b[g].grad.data();
            for (std::size_t j = 0; j < H; ++j) {
                gb[j] += dag[j];
            }
            gemv_t_acc(p.W[g].value.data(), dag, dx, H, D);
            gemv_t_acc(p.U[g].value.data(), dag, dh_next.data(), H, H);
        }
    }
    return grad_in;
}

std::vector<double> gru_cell(std::span<const double> x, std::span<const double> h,
                             const GruParams& p) {
    const std::size_t H = p.hidden_size;
    if (x.size() != p.input_size || h.size() != H) {
        throw ShapeError("gru_cell: input or state size does not match parameters");
    }
    std::vector<double> gates(3 * H), rh(H), next(H);
    gru_step(p, x.data(), h.data(), gates.data(), rh.data(), next.data());
    return next;
}

Tensor gru_layer(const Tensor& seq, const GruParams& p, GruTrace* trace) {
    check_sequence(seq, p.input_size, "gru_layer");
    const std::size_t L = seq.dim(0);
    const std::size_t D = p.input_size;
    const std::size_t H = p.hidden_size;

    GruTrace local;
    GruTrace& t = trace ? *trace : local;
    t.length = L;
    t.input_size = D;
    t.hidden_size = H;
    t.x.assign(seq.values().begin(), seq.values().end());
    t.gates.assign(L * 3 * H, 0.0);
    t.h.assign((L + 1) * H, 0.0);

    std::vector<double> rh(H);
    for (std::size_t s = 0; s < L; ++s) {
        gru_step(p, t.x.data() + s * D, t.h.data() + s * H, t.gates.data() + s * 3 * H, rh.data(),
                 t.h.data() + (s + 1) * H);
    }
    return Tensor({H}, std::vector<double>(t.h.end() - static_cast<std::ptrdiff_t>(H), t.h.end()));
}

Tensor gru_layer_backward(const GruTrace& t, const Tensor& grad_out, GruParams& p) {
    const std::size_t L = t.length;
    const std::size_t D = t.input_size;
    const std::size_t H = t.hidden_size;
    if (L == 0) {
        throw StateError("gru_layer_backward called without a forward trace");
    }
    if (grad_out.size() != H) {
        throw ShapeError("gru_layer_backward: upstream gradient has shape " +
                         shape_string(grad_out.shape()));
    }
    Tensor grad_in({L, D});
    std::vector<double> dh(grad_out.values().begin(), grad_out.values().end());
    std::vector<double> dh_prev(H), da_z(H), da_r(H), da_n(H), drh(H), rh(H);

    for (std::size_t s = L; s-- > 0;) {
        const double* gates = t.gates.data() + s * 3 * H;
        const double* z = gates + kGruUpdate * H;
        const double* r = gates + kGruReset * H;
        const double* n = gates + kGruCandidate * H;
        const double* h_prev = t.h.data() + s * H;
        const double* x = t.x.data() + s * D;

        for (std::size_t j = 0; j < H; ++j) {
            const double dz = dh[j] * (n[j] - h_prev[j]);
            const double dn = dh[j] * z[j];
            dh_prev[j] = dh[j] * (1.0 - z[j]);
            da_n[j] = dn * (1.0 - n[j] * n[j]);
            da_z[j] = dz * z[j] * (1.0 - z[j]);
            rh[j] = r[j] * h_prev[j];
            drh[j] = 0.0;
        }
        gemv_t_acc(p.U[kGruCandidate].value.data(), da_n.data(), drh.data(), H, H);
        for (std::size_t j = 0; j < H; ++j) {
            const double dr = drh[j] * h_prev[j];
            dh_prev[j] += drh[j] * r[j];
            da_r[j] = dr * r[j] * (1.0 - r[j]);
        }

        double* dx = grad_in.data() + s * D;
        const double* da[3] = {da_z.data(), da_r.data(), da_n.data()};
        for (std::size_t g = 0; g < 3; ++g) {
            outer_acc(p.W[g].grad.data(), da[g], x, H, D);
            outer_acc(p.U[g].grad.data(), da[g], g == kGruCandidate ? rh.data() : h_prev, H, H);
            double* gb = p.b[g].grad.data();
            for (std::size_t j = 0; j < H; ++j) {
                gb[j] += da[g][j];
            }
            gemv_t_acc(p.W[g].value.data(), da[g], dx, H, D);
        }
        gemv_t_acc(p.U[kGruUpdate].value.data(), da_z.data(), dh_prev.data(), H, H);
        gemv_t_acc(p.U[kGruReset].value.data(), da_r.data(), dh_prev.data(), H, H);
        dh.swap(dh_prev);
    }
    return grad_in;
}

} // namespace glidecast
