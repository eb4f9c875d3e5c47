// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "glidecast/dataset.hpp"
#include "glidecast/model.hpp"

namespace glidecast {

struct TrainConfig {
    std::size_t epochs = 50;
    std::size_t batch_size = 16;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t shuffle_seed = 42;
    /// Train the three axis models on separate threads. Results do not depend on it.
    bool parallel_axes = true;

    void validate() const;

    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct AdamState {
    AdamState() = default;
    explicit AdamState(std::span<Parameter* const> params);

    std::vector<Tensor> m;
    std::vector<Tensor> v;
    std::uint64_t t = 0;
};

struct MseResult {
    double loss = 0.0;
    std::vector<double> grad;  ///< d loss / d pred
};

/// Mean squared error and its gradient. Throws InvalidInputError for empty
/// or mismatched batches.
MseResult mse_loss(std::span<const double> pred, std::span<const double> target);

/// One bias-corrected Adam update from each parameter's accumulated grad.
void adam_step(std::span<Parameter* const> params, AdamState& state, const TrainConfig& cfg);

struct EpochRecord {
    std::size_t epoch = 0;  ///< 1-based
    Axis axis = Axis::x;
    double loss = 0.0;      ///< epoch-mean MSE, normalized space
    double mae = 0.0;       ///< epoch-mean absolute error, normalized space
};

struct TrainHistory {
    std::vector<EpochRecord> records;  ///< grouped by axis, then epoch

    std::vector<EpochRecord> for_axis(Axis a) const;
};

/// Trains one model on targets for its own axis.
std::vector<EpochRecord> train_model(HybridModel& model, const SequenceDataset& data,
                                     const TrainConfig& cfg);

/// Trains the three axis models independently. Throws InsufficientDataError
/// when the training partition is empty.
TrainHistory train(AxisModelSet& set, const SequenceDataset& data, const TrainConfig& cfg);

struct AxisMetrics {
    double rmse = 0.0;
    double mae = 0.0;
    double mape_percent = 0.0;
    std::size_t count = 0;
    std::size_t mape_excluded = 0;
};

/// Targets with |t| below this many metres are left out of MAPE.
inline constexpr double kMapeMinTarget = 1.0;

struct EvalReport {
    double rmse = 0.0;
    double mae = 0.0;
    double mape_percent = 0.0;
    std::size_t mape_excluded_count = 0;
    std::size_t count = 0;
    std::array<AxisMetrics, kAxisCount> per_axis{};
};

/// Pools errors over every axis and sample; per-axis figures are kept too.
EvalReport compute_report(const std::array<std::vector<double>, kAxisCount>& predictions,
                          const std::array<std::vector<double>, kAxisCount>& targets);

/// Teacher-forced single-step predictions, denormalized to metres.
std::array<std::vector<double>, kAxisCount> predict_dataset(const AxisModelSet& set,
                                                            const SequenceDataset& data);

/// Throws InsufficientDataError on an empty test set.
EvalReport evaluate(const AxisModelSet& set, const SequenceDataset& test);

} // namespace glidecast
