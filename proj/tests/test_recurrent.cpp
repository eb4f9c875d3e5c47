// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "glidecast/error.hpp"
#include "glidecast/recurrent.hpp"
#include "gradcheck.hpp"

using namespace glidecast;
using glidecast::testing::check_gradient;
using glidecast::testing::GradCheckResult;

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, RngStream& rng) {
    Tensor t(std::move(shape));
    for (double& v : t.values()) v = rng.uniform(-1.0, 1.0);
    return t;
}

template <typename Params>
void randomize(Params& p, RngStream& rng) {
    for (Parameter* q : p.parameters()) {
        for (double& v : q->value.values()) v = rng.uniform(-0.8, 0.8);
    }
}

template <typename Params>
void fill_all(Params& p, double w, double u, double b) {
    for (auto& q : p.W) q.value.fill(w);
    for (auto& q : p.U) q.value.fill(u);
    for (auto& q : p.b) q.value.fill(b);
}

double weighted_sum(const Tensor& t, const Tensor& w) {
    double s = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) s += t[i] * w[i];
    return s;
}

template <typename Params, typename Loss>
GradCheckResult check_params(Params& p, Loss&& loss) {
    GradCheckResult r;
    for (Parameter* q : p.parameters()) {
        r.merge(check_gradient(q->value.values(), q->grad.values(), loss));
    }
    return r;
}

} // namespace

TEST_CASE("parameter layout") {
    LstmParams l(3, 64);
    CHECK(l.parameters().size() == 12);
    CHECK(l.W[kLstmForget].name == "lstm.Wf");
    CHECK(l.U[kLstmInput].value.shape() == std::vector<std::size_t>{64, 64});
    CHECK(l.W[kLstmOutput].value.shape() == std::vector<std::size_t>{64, 3});
    GruParams g(3, 64);
    CHECK(g.parameters().size() == 9);
    CHECK(g.b[kGruCandidate].name == "gru.bh");

    RngStream rng(1);
    const LstmParams li = make_lstm_params(3, 8, rng);
    for (std::size_t k = 0; k < 4; ++k) {
        const double expect = k == kLstmForget ? 1.0 : 0.0;
        for (double v : li.b[k].value.values()) CHECK(v == expect);
    }
    const GruParams gi = make_gru_params(3, 8, rng);
    for (const auto& b : gi.b) {
        for (double v : b.value.values()) CHECK(v == 0.0);
    }
}

TEST_CASE("lstm_cell") {
    LstmParams zero(2, 3);
    const RecurrentState s = lstm_cell(std::vector<double>{0.4, -0.2}, RecurrentState::zeros(3, true), zero);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(s.h[i] == 0.0);
        CHECK(s.c[i] == 0.0);
    }

    LstmParams scalar(1, 1);
    fill_all(scalar, 1.0, 0.0, 0.0);
    const RecurrentState t = lstm_cell(std::vector<double>{1.0}, RecurrentState::zeros(1, true), scalar);
    const double sg = 1.0 / (1.0 + std::exp(-1.0));
    CHECK(sg == doctest::Approx(0.73106).epsilon(1e-5));
    CHECK(t.c[0] == doctest::Approx(sg * std::tanh(1.0)).epsilon(1e-14));
    CHECK(t.c[0] == doctest::Approx(0.55677).epsilon(1e-5));
    CHECK(t.h[0] == doctest::Approx(sg * std::tanh(sg * std::tanh(1.0))).epsilon(1e-14));
    CHECK(t.h[0] == doctest::Approx(0.3696).epsilon(1e-4));

    CHECK_THROWS_AS(lstm_cell(std::vector<double>{1.0, 2.0}, RecurrentState::zeros(1, true), scalar), ShapeError);
    CHECK_THROWS_AS(lstm_cell(std::vector<double>{1.0}, RecurrentState::zeros(2, true), scalar), ShapeError);
}

TEST_CASE("gru_cell") {
    GruParams zero(2, 3);
    const auto h0 = gru_cell(std::vector<double>{0.4, -0.2}, std::vector<double>(3, 0.0), zero);
    for (double v : h0) CHECK(v == 0.0);

    GruParams scalar(1, 1);
    fill_all(scalar, 1.0, 0.0, 0.0);
    const auto h = gru_cell(std::vector<double>{1.0}, std::vector<double>{0.0}, scalar);
    CHECK(h[0] == doctest::Approx(0.55677).epsilon(1e-5));
    CHECK_THROWS_AS(gru_cell(std::vector<double>{1.0}, std::vector<double>{0.0, 0.0}, scalar), ShapeError);
}

TEST_CASE("layers equal explicit cell iteration") {
    RngStream rng(2);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t L = 1 + rng.below(12), D = 1 + rng.below(4), H = 1 + rng.below(6);
        LstmParams lp(D, H);
        GruParams gp(D, H);
        randomize(lp, rng);
        randomize(gp, rng);
        const Tensor seq = random_tensor({L, D}, rng);

        const Tensor lout = lstm_layer(seq, lp);
        REQUIRE(lout.shape() == std::vector<std::size_t>{L, H});
        RecurrentState s = RecurrentState::zeros(H, true);
        std::vector<double> gh(H, 0.0);
        double dev = 0.0;
        for (std::size_t t = 0; t < L; ++t) {
            s = lstm_cell(seq.row(t), s, lp);
            gh = gru_cell(seq.row(t), gh, gp);
            for (std::size_t j = 0; j < H; ++j) {
                dev = std::max(dev, std::abs(lout.at(t, j) - s.h[j]));
                CHECK(std::abs(s.h[j]) < 1.0);
            }
        }
        const Tensor gout = gru_layer(seq, gp);
        REQUIRE(gout.size() == H);
        for (std::size_t j = 0; j < H; ++j) dev = std::max(dev, std::abs(gout[j] - gh[j]));
        CHECK(dev <= 1e-12);
    }

    LstmParams zl(2, 4);
    GruParams zg(2, 4);
    const Tensor seq = random_tensor({5, 2}, rng);
    CHECK(lstm_layer(seq, zl) == Tensor({5, 4}));
    CHECK(gru_layer(seq, zg) == Tensor({4}));
    CHECK_THROWS_AS(lstm_layer(Tensor({0, 2}), zl), ShapeError);
    CHECK_THROWS_AS(gru_layer(Tensor({0, 2}), zg), ShapeError);
}

TEST_CASE("gates stay in range") {
    RngStream rng(3);
    LstmParams lp = make_lstm_params(3, 5, rng);
    GruParams gp = make_gru_params(3, 5, rng);
    const Tensor seq = random_tensor({7, 3}, rng);
    LstmTrace lt;
    GruTrace gt;
    lstm_layer(seq, lp, &lt);
    gru_layer(seq, gp, &gt);
    for (std::size_t t = 0; t < 7; ++t) {
        for (std::size_t k = 0; k < 4; ++k) {
            for (std::size_t j = 0; j < 5; ++j) {
                const double v = lt.gates[(t * 4 + k) * 5 + j];
                if (k == kLstmCandidate) {
                    CHECK(std::abs(v) < 1.0);
                } else {
                    CHECK(v > 0.0);
                    CHECK(v < 1.0);
                }
            }
        }
        for (std::size_t k = 0; k < 3; ++k) {
            for (std::size_t j = 0; j < 5; ++j) {
                const double v = gt.gates[(t * 3 + k) * 5 + j];
                if (k == kGruCandidate) {
                    CHECK(std::abs(v) < 1.0);
                } else {
                    CHECK(v > 0.0);
                    CHECK(v < 1.0);
                }
            }
        }
    }
}

TEST_CASE("LSTM backpropagation through time") {
    for (std::uint64_t seed = 10; seed < 16; ++seed) {
        RngStream rng(seed);
        const std::size_t L = seed == 10 ? 3 : 1 + rng.below(5);
        const std::size_t D = seed == 10 ? 2 : 1 + rng.below(3);
        const std::size_t H = seed == 10 ? 2 : 1 + rng.below(4);
        LstmParams p(D, H);
        randomize(p, rng);
        Tensor seq = random_tensor({L, D}, rng);
        const Tensor w = random_tensor({L, H}, rng);
        auto loss = [&] { return weighted_sum(lstm_layer(seq, p), w); };
        LstmTrace trace;
        lstm_layer(seq, p, &trace);
        const Tensor gseq = lstm_layer_backward(trace, w, p);
        GradCheckResult r = check_params(p, loss);
        r.merge(check_gradient(seq.values(), gseq.values(), loss));
        CHECK(r.max_relative_error < 1e-5);
    }
    LstmParams p(1, 1);
    CHECK_THROWS_AS(lstm_layer_backward(LstmTrace{}, Tensor({1, 1}), p), StateError);
}

TEST_CASE("GRU backpropagation through time") {
    for (std::uint64_t seed = 20; seed < 26; ++seed) {
        RngStream rng(seed);
        const std::size_t L = seed == 20 ? 3 : 1 + rng.below(5);
        const std::size_t D = seed == 20 ? 2 : 1 + rng.below(3);
        const std::size_t H = seed == 20 ? 2 : 1 + rng.below(4);
        GruParams p(D, H);
        randomize(p, rng);
        Tensor seq = random_tensor({L, D}, rng);
        const Tensor w = random_tensor({H}, rng);
        auto loss = [&] { return weighted_sum(gru_layer(seq, p), w); };
        GruTrace trace;
        gru_layer(seq, p, &trace);
        const Tensor gseq = gru_layer_backward(trace, w, p);
        GradCheckResult r = check_params(p, loss);
        r.merge(check_gradient(seq.values(), gseq.values(), loss));
        CHECK(r.max_relative_error < 1e-5);
    }
    GruParams p(1, 1);
    CHECK_THROWS_AS(gru_layer_backward(GruTrace{}, Tensor({1}), p), StateError);
}

TEST_CASE("backward accumulates into existing gradients") {
    RngStream rng(30);
    GruParams p(2, 3);
    randomize(p, rng);
    const Tensor seq = random_tensor({4, 2}, rng);
    const Tensor w = random_tensor({3}, rng);
    GruTrace trace;
    gru_layer(seq, p, &trace);
    gru_layer_backward(trace, w, p);
    const Tensor once = p.U[kGruReset].grad;
    gru_layer_backward(trace, w, p);
    for (std::size_t i = 0; i < once.size(); ++i) {
        CHECK(p.U[kGruReset].grad[i] == doctest::Approx(2.0 * once[i]).epsilon(1e-14));
    }
}
