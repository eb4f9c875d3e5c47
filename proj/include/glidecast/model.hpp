// SPDX-License-Identifier: Apache-2.0
// Three-branch convolutional / LSTM / GRU forecaster, one per axis.
//
//   window L x 3 --+-- conv1d(64, w=3) -> relu -> dropout -> flatten   (L-2)*64
//                  +-- lstm(64, all steps) -> dropout -> flatten         L*64
//                  +-- gru(64, final state) -> dropout                   64
//                  concat -> dense(128) -> relu -> dropout -> dense(1)
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "glidecast/dataset.hpp"
#include "glidecast/layers.hpp"
#include "glidecast/recurrent.hpp"
#include "glidecast/rng.hpp"
#include "glidecast/tensor.hpp"

namespace glidecast {

inline constexpr std::size_t kConvFilters = 64;
inline constexpr std::size_t kConvWidth = 3;
inline constexpr std::size_t kRecurrentUnits = 64;
inline constexpr std::size_t kHeadUnits = 128;
inline constexpr double kDropoutRate = 0.3;
inline constexpr int kModelFormatVersion = 1;

/// Width of the concatenated branch features for window length L.
std::size_t concat_width(std::size_t length);
/// Closed-form trainable parameter count for window length L.
std::size_t expected_parameter_count(std::size_t length);

/// Activations from one forward pass, consumed by HybridModel::backward.
struct ForwardCache {
    bool valid = false;
    Tensor input;
    Tensor conv_pre;
    DropoutMask conv_mask;
    LstmTrace lstm;
    DropoutMask lstm_mask;
    GruTrace gru;
    DropoutMask gru_mask;
    std::array<Tensor, 3> branch_out;  ///< conv, lstm, gru after dropout
    Tensor concat;
    Tensor dense1_pre;
    DropoutMask head_mask;
    Tensor head_in;
};

class HybridModel {
public:
    /// Model with every parameter zero. Use build_model for initialised weights.
    HybridModel(std::size_t length, Axis axis, std::uint64_t seed = 0);

    std::size_t sequence_length() const { return length_; }
    Axis axis() const { return axis_; }
    std::uint64_t seed() const { return seed_; }

    /// Predicts one normalized scalar from a normalized L x 3 window. Train
    /// mode needs `rng` for dropout masks. Pass `cache` to enable backward().
    double forward(const Tensor& window, Mode mode, RngStream* rng = nullptr,
                   ForwardCache* cache = nullptr) const;
    double predict(const Tensor& window) const { return forward(window, Mode::eval); }

    /// Accumulates d(output)/d(param) * grad_output into every Parameter::grad.
    /// Throws StateError if `cache` holds no forward pass.
    void backward(const ForwardCache& cache, double grad_output);

    /// Canonical order, which is also the initialisation and file order.
    std::vector<Parameter*> parameters();
    std::vector<const Parameter*> parameters() const;
    std::size_t parameter_count() const;
    void zero_grad();

    /// nullptr when no parameter has this name.
    Parameter* find(const std::string& name);
    const Parameter* find(const std::string& name) const;

private:
    friend HybridModel build_model(std::size_t, Axis, RngStream&);

    std::size_t length_;
    Axis axis_;
    std::uint64_t seed_;
    Parameter conv_kernels_;
    Parameter conv_bias_;
    LstmParams lstm_;
    GruParams gru_;
    Parameter dense1_weights_;
    Parameter dense1_bias_;
    Parameter dense2_weights_;
    Parameter dense2_bias_;
};

/// Glorot-initialised model drawn from `rng`; records rng.seed() as the model seed.
/// Throws InvalidWindowError when L < 3.
HybridModel build_model(std::size_t length, Axis axis, RngStream& rng);

double model_forward(const HybridModel& m, const Tensor& window, Mode mode, RngStream& rng,
                     ForwardCache* cache = nullptr);
void model_backward(HybridModel& m, const ForwardCache& cache, double grad_output);

/// The three per-axis models plus the scaling they share.
struct AxisModelSet {
    std::size_t length = 0;
    Normalizer normalizer;
    std::vector<HybridModel> models;  ///< indexed by Axis

    HybridModel& model(Axis a) { return models.at(index(a)); }
    const HybridModel& model(Axis a) const { return models.at(index(a)); }
};

AxisModelSet make_model_set(std::size_t length, const Normalizer& normalizer,
                            const std::array<std::uint64_t, kAxisCount>& seeds);

using Position = std::array<double, kAxisCount>;

/// Physical-units window in, physical-units next position out.
Position predict_next(const AxisModelSet& set, const Tensor& window);

/// Feeds each prediction back into the window; returns `steps` positions.
std::vector<Position> rollout(const AxisModelSet& set, const Tensor& seed_window,
                              std::size_t steps);

/// Writes `<dir>/model_x.json`, `model_y.json`, `model_z.json`.
void save_model(const AxisModelSet& set, const std::filesystem::path& dir);
AxisModelSet load_model(const std::filesystem::path& dir);

std::filesystem::path model_file_path(const std::filesystem::path& dir, Axis a);
void write_model_file(const std::filesystem::path& path, const HybridModel& m,
                      const Normalizer& normalizer);

struct LoadedModel {
    HybridModel model;
    Normalizer normalizer;
};
/// Throws MissingFileError, VersionMismatchError, TruncatedFileError or LoadError.
LoadedModel read_model_file(const std::filesystem::path& path);

} // namespace glidecast
