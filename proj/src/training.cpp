// SPDX-License-Identifier: Apache-2.0
#include "glidecast/training.hpp"

#include <cmath>
#include <numeric>
#include <string>
#include <thread>

#include "glidecast/error.hpp"
#include "glidecast/rng.hpp"

namespace glidecast {

void TrainConfig::validate() const {
    if (batch_size < 1) {
        throw InvalidInputError("training.batch_size must be >= 1");
    }
    if (!std::isfinite(learning_rate) || learning_rate <= 0.0) {
        throw InvalidInputError("training.learning_rate must be > 0");
    }
    if (!(beta1 >= 0.0 && beta1 < 1.0)) {
        throw InvalidInputError("training.beta1 must lie in [0, 1)");
    }
    if (!(beta2 >= 0.0 && beta2 < 1.0)) {
        throw InvalidInputError("training.beta2 must lie in [0, 1)");
    }
    if (!std::isfinite(epsilon) || epsilon <= 0.0) {
        throw InvalidInputError("training.epsilon must be > 0");
    }
}

AdamState::AdamState(std::span<Parameter* const> params) {
    m.reserve(params.size());
    v.reserve(params.size());
    for (const auto* p : params) {
        m.emplace_back(p->value.shape());
        v.emplace_back(p->value.shape());
    }
}

MseResult mse_loss(std::span<const double> pred, std::span<const double> target) {
    if (pred.empty() || pred.size() != target.size()) {
        throw InvalidInputError("mse_loss needs equal-length non-empty batches");
    }
    const auto n = static_cast<double>(pred.size());
    MseResult r;
    r.grad.resize(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double e = pred[i] - target[i];
        r.loss += e * e;
        r.grad[i] = 2.0 * e / n;
    }
    r.loss /= n;
    return r;
}

void adam_step(std::span<Parameter* const> params, AdamState& state, const TrainConfig& cfg) {
    if (state.m.size() != params.size()) {
        state = AdamState(params);
    }
    ++state.t;
    const double t = static_cast<double>(state.t);
    const double correction1 = 1.0 - std::pow(cfg.beta1, t);
    const double correction2 = 1.0 - std::pow(cfg.beta2, t);
    for (std::size_t k = 0; k < params.size(); ++k) {
        Parameter& p = *params[k];
        if (!p.grad.same_shape(p.value) || !state.m[k].same_shape(p.value)) {
            throw ShapeError("adam_step: state does not match parameter '" + p.name + "'");
        }
        double* w = p.value.data();
        const double* g = p.grad.data();
        double* m = state.m[k].data();
        double* v = state.v[k].data();
        for (std::size_t i = 0; i < p.value.size(); ++i) {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            const double m_hat = m[i] / correction1;
            const double v_hat = v[i] / correction2;
            w[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
        }
    }
}

std::vector<EpochRecord> TrainHistory::for_axis(Axis a) const {
    std::vector<EpochRecord> out;
    for (const auto& r : records) {
        if (r.axis == a) {
            out.push_back(r);
        }
    }
    return out;
}

std::vector<EpochRecord> train_model(HybridModel& model, const SequenceDataset& data,
                                     const TrainConfig& cfg) {
    cfg.validate();
    if (data.empty()) {
        throw InsufficientDataError("training partition is empty");
    }
    const Axis axis = model.axis();
    const std::vector<double>& targets = data.targets[index(axis)];
    const std::size_t n = data.size();

    RngStream shuffle_rng(derive_seed(cfg.shuffle_seed, index(axis)));
    RngStream dropout_rng(derive_seed(model.seed(), 0xD50));

    std::vector<Parameter*> params = model.parameters();
    AdamState adam(params);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    ForwardCache cache;
    std::vector<double> preds;
    std::vector<double> batch_targets;

    std::vector<EpochRecord> history;
    history.reserve(cfg.epochs);
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        // Fisher-Yates with the seeded stream.
        for (std::size_t i = n; i > 1; --i) {
            std::swap(order[i - 1], order[shuffle_rng.below(i)]);
        }
        double loss_sum = 0.0;
        double abs_sum = 0.0;
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t end = std::min(n, start + cfg.batch_size);
            const std::size_t count = end - start;
            model.zero_grad();
            preds.assign(count, 0.0);
            batch_targets.assign(count, 0.0);
            // MSE gradient is 2 (p - t) / count for each sample; each sample
            // is forwarded and back-propagated before the next so the
            // accumulation order is fixed.
            for (std::size_t b = 0; b < count; ++b) {
                const std::size_t idx = order[start + b];
                preds[b] = model.forward(data.inputs[idx], Mode::train, &dropout_rng, &cache);
                batch_targets[b] = targets[idx];
                const double e = preds[b] - batch_targets[b];
                model.backward(cache, 2.0 * e / static_cast<double>(count));
                loss_sum += e * e;
                abs_sum += std::abs(e);
            }
            adam_step(params, adam, cfg);
        }
        history.push_back({epoch, axis, loss_sum / static_cast<double>(n),
                           abs_sum / static_cast<double>(n)});
    }
    return history;
}

TrainHistory train(AxisModelSet& set, const SequenceDataset& data, const TrainConfig& cfg) {
    cfg.validate();
    if (data.empty()) {
        throw InsufficientDataError("training partition is empty");
    }
    if (data.length != set.length) {
        throw ShapeError("dataset window length " + std::to_string(data.length) +
                         " does not match the models (" + std::to_string(set.length) + ")");
    }
    std::array<std::vector<EpochRecord>, kAxisCount> per_axis;
    if (cfg.parallel_axes && cfg.epochs > 0) {
        std::array<std::exception_ptr, kAxisCount> errors{};
        {
            std::vector<std::jthread> workers;
            for (Axis a : kAxes) {
                workers.emplace_back([&, a] {
                    try {
                        per_axis[index(a)] = train_model(set.model(a), data, cfg);
                    } catch (...) {
                        errors[index(a)] = std::current_exception();
                    }
                });
            }
        }
        for (const auto& e : errors) {
            if (e) {
                std::rethrow_exception(e);
            }
        }
    } else {
        for (Axis a : kAxes) {
            per_axis[index(a)] = train_model(set.model(a), data, cfg);
        }
    }
    TrainHistory history;
    for (auto& records : per_axis) {
        history.records.insert(history.records.end(), records.begin(), records.end());
    }
    return history;
}

EvalReport compute_report(const std::array<std::vector<double>, kAxisCount>& predictions,
                          const std::array<std::vector<double>, kAxisCount>& targets) {
    EvalReport r;
    double sq_total = 0.0;
    double abs_total = 0.0;
    double pct_total = 0.0;
    std::size_t pct_count = 0;
    for (std::size_t c = 0; c < kAxisCount; ++c) {
        const auto& p = predictions[c];
        const auto& t = targets[c];
        if (p.size() != t.size()) {
            throw InvalidInputError("prediction and target counts differ on axis " +
                                    std::string(to_string(static_cast<Axis>(c))));
        }
        AxisMetrics& m = r.per_axis[c];
        double sq = 0.0;
        double ab = 0.0;
        double pct = 0.0;
        std::size_t used = 0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double e = p[i] - t[i];
            sq += e * e;
            ab += std::abs(e);
            if (std::abs(t[i]) >= kMapeMinTarget) {
                pct += std::abs(e / t[i]);
                ++used;
            }
        }
        m.count = p.size();
        m.mape_excluded = p.size() - used;
        if (m.count > 0) {
            m.rmse = std::sqrt(sq / static_cast<double>(m.count));
            m.mae = ab / static_cast<double>(m.count);
        }
        m.mape_percent = used > 0 ? 100.0 * pct / static_cast<double>(used) : 0.0;

        sq_total += sq;
        abs_total += ab;
        pct_total += pct;
        pct_count += used;
        r.count += m.count;
        r.mape_excluded_count += m.mape_excluded;
    }
    if (r.count > 0) {
        r.rmse = std::sqrt(sq_total / static_cast<double>(r.count));
        r.mae = abs_total / static_cast<double>(r.count);
    }
    r.mape_percent = pct_count > 0 ? 100.0 * pct_total / static_cast<double>(pct_count) : 0.0;
    return r;
}

std::array<std::vector<double>, kAxisCount> predict_dataset(const AxisModelSet& set,
                                                            const SequenceDataset& data) {
    std::array<std::vector<double>, kAxisCount> preds;
    for (Axis a : kAxes) {
        auto& out = preds[index(a)];
        out.reserve(data.size());
        for (const auto& window : data.inputs) {
            out.push_back(set.normalizer.invert(set.model(a).predict(window), a));
        }
    }
    return preds;
}

EvalReport evaluate(const AxisModelSet& set, const SequenceDataset& test) {
    if (test.empty()) {
        throw InsufficientDataError("test partition is empty");
    }
    return compute_report(predict_dataset(set, test), test.physical_targets);
}

} // namespace glidecast
