// SPDX-License-Identifier: Apache-2.0
#include "glidecast/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "glidecast/error.hpp"

namespace glidecast {

std::string_view to_string(Axis a) {
    switch (a) {
    case Axis::x: return "x";
    case Axis::y: return "y";
    case Axis::z: return "z";
    }
    return "?";
}

Axis axis_from_string(std::string_view name) {
    if (name == "x") return Axis::x;
    if (name == "y") return Axis::y;
    if (name == "z") return Axis::z;
    throw InvalidInputError("unknown axis '" + std::string(name) + "'");
}

SeriesWindows sliding_windows(std::span<const double> series, std::size_t length) {
    if (length == 0) {
        throw InvalidWindowError("window length must be positive");
    }
    if (series.size() <= length) {
        throw InsufficientDataError("series of " + std::to_string(series.size()) +
                                    " samples cannot fill a window of " +
                                    std::to_string(length) + " plus a target");
    }
    SeriesWindows out;
    const std::size_t n = series.size() - length;
    out.inputs.reserve(n);
    out.targets.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.inputs.emplace_back(series.begin() + static_cast<std::ptrdiff_t>(i),
                                series.begin() + static_cast<std::ptrdiff_t>(i + length));
        out.targets.push_back(series[i + length]);
    }
    return out;
}

WindowedPairs make_windows(const Trajectory& traj, std::size_t length) {
    if (length < kMinWindow) {
        throw InvalidWindowError("window length " + std::to_string(length) +
                                 " is below the convolution width " + std::to_string(kMinWindow));
    }
    const std::size_t T = traj.size();
    if (T <= length) {
        throw InsufficientDataError("trajectory of " + std::to_string(T) +
                                    " samples cannot fill a window of " + std::to_string(length) +
                                    " plus a target");
    }
    WindowedPairs out;
    out.length = length;
    const std::size_t n = T - length;
    out.inputs.reserve(n);
    out.targets.reserve(n);
    out.target_index.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Tensor w({length, kAxisCount});
        for (std::size_t s = 0; s < length; ++s) {
            const auto& p = traj.samples[i + s];
            w.at(s, 0) = p.x;
            w.at(s, 1) = p.y;
            w.at(s, 2) = p.z;
        }
        out.inputs.push_back(std::move(w));
        const auto& t = traj.samples[i + length];
        out.targets.push_back({t.x, t.y, t.z});
        out.target_index.push_back(i + length);
    }
    return out;
}

std::pair<WindowedPairs, WindowedPairs> chronological_split(const WindowedPairs& pairs,
                                                            const SplitSpec& spec) {
    if (!(spec.train_fraction >= 0.0 && spec.train_fraction <= 1.0)) {
        throw InvalidInputError("train_fraction must lie in [0, 1]");
    }
    const auto n = pairs.size();
    const auto n_train = std::min(
        n, static_cast<std::size_t>(std::floor(spec.train_fraction * static_cast<double>(n))));
    WindowedPairs train;
    WindowedPairs test;
    train.length = test.length = pairs.length;
    const auto cut = static_cast<std::ptrdiff_t>(n_train);
    train.inputs.assign(pairs.inputs.begin(), pairs.inputs.begin() + cut);
    train.targets.assign(pairs.targets.begin(), pairs.targets.begin() + cut);
    train.target_index.assign(pairs.target_index.begin(), pairs.target_index.begin() + cut);
    test.inputs.assign(pairs.inputs.begin() + cut, pairs.inputs.end());
    test.targets.assign(pairs.targets.begin() + cut, pairs.targets.end());
    test.target_index.assign(pairs.target_index.begin() + cut, pairs.target_index.end());
    return {std::move(train), std::move(test)};
}

Normalizer Normalizer::identity() {
    Normalizer n;
    for (auto& c : n.channels) {
        c = {0.0, 1.0, false};
    }
    return n;
}

namespace {

const ChannelRange& channel_at(const Normalizer& n, std::size_t channel) {
    if (channel >= kAxisCount) {
        throw InvalidInputError("unknown channel index " + std::to_string(channel));
    }
    return n.channels[channel];
}

} // namespace

double Normalizer::apply(double value, std::size_t channel) const {
    const auto& c = channel_at(*this, channel);
    if (c.degenerate) {
        return 0.0;
    }
    return (value - c.min) / (c.max - c.min);
}

double Normalizer::invert(double value, std::size_t channel) const {
    const auto& c = channel_at(*this, channel);
    if (c.degenerate) {
        return c.min;
    }
    return c.min + value * (c.max - c.min);
}

Tensor Normalizer::apply_window(const Tensor& window) const {
    if (window.rank() != 2 || window.dim(1) != kAxisCount) {
        throw ShapeError("window must be L x 3, got " + shape_string(window.shape()));
    }
    Tensor out(window.shape());
    for (std::size_t s = 0; s < window.dim(0); ++s) {
        for (std::size_t c = 0; c < kAxisCount; ++c) {
            out.at(s, c) = apply(window.at(s, c), c);
        }
    }
    return out;
}

Normalizer fit_normalizer(std::span<const Tensor> train_inputs) {
    if (train_inputs.empty()) {
        throw InsufficientDataError("cannot fit a normalizer without training windows");
    }
    std::array<double, kAxisCount> lo;
    std::array<double, kAxisCount> hi;
    lo.fill(std::numeric_limits<double>::infinity());
    hi.fill(-std::numeric_limits<double>::infinity());
    for (const auto& w : train_inputs) {
        if (w.rank() != 2 || w.dim(1) != kAxisCount) {
            throw ShapeError("training window must be L x 3, got " + shape_string(w.shape()));
        }
        for (std::size_t s = 0; s < w.dim(0); ++s) {
            for (std::size_t c = 0; c < kAxisCount; ++c) {
                lo[c] = std::min(lo[c], w.at(s, c));
                hi[c] = std::max(hi[c], w.at(s, c));
            }
        }
    }
    Normalizer n;
    for (std::size_t c = 0; c < kAxisCount; ++c) {
        n.channels[c] = {lo[c], hi[c], hi[c] - lo[c] < kDegenerateRange};
    }
    return n;
}

double normalize_apply(const Normalizer& n, double value, std::size_t channel) {
    return n.apply(value, channel);
}

double normalize_invert(const Normalizer& n, double value, std::size_t channel) {
    return n.invert(value, channel);
}

SequenceDataset normalize_pairs(const WindowedPairs& pairs, const Normalizer& n) {
    SequenceDataset d;
    d.length = pairs.length;
    d.target_index = pairs.target_index;
    d.inputs.reserve(pairs.size());
    for (const auto& w : pairs.inputs) {
        d.inputs.push_back(n.apply_window(w));
    }
    for (std::size_t c = 0; c < kAxisCount; ++c) {
        d.targets[c].reserve(pairs.size());
        d.physical_targets[c].reserve(pairs.size());
        for (const auto& t : pairs.targets) {
            d.targets[c].push_back(n.apply(t[c], c));
            d.physical_targets[c].push_back(t[c]);
        }
    }
    return d;
}

PreparedData prepare_dataset(const Trajectory& traj, std::size_t length, const SplitSpec& spec) {
    const WindowedPairs pairs = make_windows(traj, length);
    auto [train, test] = chronological_split(pairs, spec);
    PreparedData out;
    out.normalizer = fit_normalizer(train.inputs);
    out.train = normalize_pairs(train, out.normalizer);
    out.test = normalize_pairs(test, out.normalizer);
    return out;
}

} // namespace glidecast
