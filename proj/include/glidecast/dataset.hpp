// SPDX-License-Identifier: Apache-2.0
// Sliding-window supervision over a trajectory, min-max scaling and the
// chronological train/test split.
#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "glidecast/integrator.hpp"
#include "glidecast/tensor.hpp"

namespace glidecast {

inline constexpr std::size_t kAxisCount = 3;
inline constexpr std::size_t kMinWindow = 3;

enum class Axis : std::size_t { x = 0, y = 1, z = 2 };

inline constexpr std::array<Axis, kAxisCount> kAxes = {Axis::x, Axis::y, Axis::z};

constexpr std::size_t index(Axis a) { return static_cast<std::size_t>(a); }
std::string_view to_string(Axis a);
/// Throws InvalidInputError for anything other than "x", "y" or "z".
Axis axis_from_string(std::string_view name);

/// Generic 1-D sliding windows: pair i is (series[i, i+L), series[i+L]).
struct SeriesWindows {
    std::vector<std::vector<double>> inputs;
    std::vector<double> targets;
};
SeriesWindows sliding_windows(std::span<const double> series, std::size_t length);

/// Windowed pairs in physical units, before scaling.
struct WindowedPairs {
    std::size_t length = 0;
    std::vector<Tensor> inputs;                          ///< each L x 3
    std::vector<std::array<double, kAxisCount>> targets; ///< next position
    std::vector<std::size_t> target_index;               ///< trajectory index of each target

    std::size_t size() const { return inputs.size(); }
};

/// Throws InvalidWindowError if L < 3 and InsufficientDataError if the
/// trajectory has L or fewer samples.
WindowedPairs make_windows(const Trajectory& traj, std::size_t length);

struct SplitSpec {
    double train_fraction = 0.8;
};

/// First floor(fraction * N) pairs train, the rest test, order preserved.
std::pair<WindowedPairs, WindowedPairs> chronological_split(const WindowedPairs& pairs,
                                                            const SplitSpec& spec);

struct ChannelRange {
    double min = 0.0;
    double max = 1.0;
    bool degenerate = false;

    friend bool operator==(const ChannelRange&, const ChannelRange&) = default;
};

/// Per-channel min-max scaling to [0, 1]. Channels whose range is below
/// 1e-9 are degenerate: apply gives 0 and invert gives the channel minimum.
struct Normalizer {
    std::array<ChannelRange, kAxisCount> channels{};

    static Normalizer identity();

    /// Throws InvalidInputError for a channel index outside {0, 1, 2}.
    double apply(double value, std::size_t channel) const;
    double invert(double value, std::size_t channel) const;
    double apply(double value, Axis a) const { return apply(value, index(a)); }
    double invert(double value, Axis a) const { return invert(value, index(a)); }

    /// Scales an L x 3 window channel-wise.
    Tensor apply_window(const Tensor& window) const;

    friend bool operator==(const Normalizer&, const Normalizer&) = default;
};

inline constexpr double kDegenerateRange = 1e-9;

/// Fits on every timestep of every training window.
/// Throws InsufficientDataError when there are no windows.
Normalizer fit_normalizer(std::span<const Tensor> train_inputs);

double normalize_apply(const Normalizer& n, double value, std::size_t channel);
double normalize_invert(const Normalizer& n, double value, std::size_t channel);

/// Scaled pairs ready for training: inputs and targets share the scaling.
struct SequenceDataset {
    std::size_t length = 0;
    std::vector<Tensor> inputs;  ///< each L x 3, normalized
    std::array<std::vector<double>, kAxisCount> targets;           ///< normalized
    std::array<std::vector<double>, kAxisCount> physical_targets;  ///< metres
    std::vector<std::size_t> target_index;

    std::size_t size() const { return inputs.size(); }
    bool empty() const { return inputs.empty(); }
};

SequenceDataset normalize_pairs(const WindowedPairs& pairs, const Normalizer& n);

struct PreparedData {
    Normalizer normalizer;
    SequenceDataset train;
    SequenceDataset test;
};

/// make_windows -> chronological_split -> fit_normalizer(train) -> scale both.
PreparedData prepare_dataset(const Trajectory& traj, std::size_t length, const SplitSpec& spec);

} // namespace glidecast
