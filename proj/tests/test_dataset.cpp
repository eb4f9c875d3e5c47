// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "glidecast/dataset.hpp"
#include "glidecast/error.hpp"

using namespace glidecast;

namespace {

Trajectory ramp(std::size_t n) {
    Trajectory t;
    for (std::size_t i = 0; i < n; ++i) {
        const double s = static_cast<double>(i);
        t.samples.push_back({0.1 * s, 100.0 * s, 0.0, 80000.0 - 3.0 * s * s});
    }
    return t;
}

const Trajectory& default_run() {
    static const Trajectory t = simulate(SimConfig{}, PhysicalConstants{});
    return t;
}

} // namespace

TEST_CASE("axis names") {
    CHECK(to_string(Axis::x) == "x");
    CHECK(to_string(Axis::z) == "z");
    CHECK(axis_from_string("y") == Axis::y);
    CHECK_THROWS_AS(axis_from_string("w"), InvalidInputError);
}

TEST_CASE("sliding windows on a one-axis series") {
    const std::vector<double> series{0, 1, 2, 3};
    const SeriesWindows w = sliding_windows(series, 2);
    REQUIRE(w.inputs.size() == 2);
    CHECK(w.inputs[0] == std::vector<double>{0, 1});
    CHECK(w.targets[0] == 2);
    CHECK(w.inputs[1] == std::vector<double>{1, 2});
    CHECK(w.targets[1] == 3);
}

TEST_CASE("make_windows") {
    const WindowedPairs p = make_windows(default_run(), 10);
    CHECK(p.size() == 2991);
    CHECK(p.length == 10);

    const WindowedPairs one = make_windows(ramp(11), 10);
    CHECK(one.size() == 1);

    CHECK_THROWS_AS(make_windows(ramp(10), 10), InsufficientDataError);
    CHECK_THROWS_AS(make_windows(ramp(50), 2), InvalidWindowError);

    const Trajectory r = ramp(40);
    const WindowedPairs q = make_windows(r, 5);
    REQUIRE(q.size() == 35);
    for (std::size_t i = 0; i < q.size(); ++i) {
        CHECK(q.inputs[i].shape() == std::vector<std::size_t>{5, 3});
        for (std::size_t s = 0; s < 5; ++s) {
            CHECK(q.inputs[i].at(s, 0) == r.samples[i + s].x);
            CHECK(q.inputs[i].at(s, 1) == r.samples[i + s].y);
            CHECK(q.inputs[i].at(s, 2) == r.samples[i + s].z);
        }
        CHECK(q.target_index[i] == i + 5);
        CHECK(q.targets[i][0] == r.samples[i + 5].x);
        CHECK(q.targets[i][2] == r.samples[i + 5].z);
    }
}

TEST_CASE("chronological_split") {
    const WindowedPairs p = make_windows(default_run(), 10);
    const auto [train, test] = chronological_split(p, SplitSpec{0.8});
    CHECK(train.size() == 2392);
    CHECK(test.size() == 599);
    CHECK(train.target_index.front() == 10);
    CHECK(test.target_index.front() == train.target_index.back() + 1);

    const auto [all, none] = chronological_split(p, SplitSpec{1.0});
    CHECK(all.size() == 2991);
    CHECK(none.size() == 0);

    const WindowedPairs ten = make_windows(ramp(13), 3);
    REQUIRE(ten.size() == 10);
    const auto [a, b] = chronological_split(ten, SplitSpec{0.8});
    CHECK(a.size() == 8);
    CHECK(b.size() == 2);

    CHECK_THROWS_AS(chronological_split(ten, SplitSpec{1.5}), InvalidInputError);
    CHECK_THROWS_AS(chronological_split(ten, SplitSpec{-0.1}), InvalidInputError);
}

TEST_CASE("fit_normalizer") {
    std::vector<Tensor> windows;
    windows.push_back(Tensor({3, 3}, {0, 5, 7, 50, 5, 8, 100, 5, 9}));
    const Normalizer n = fit_normalizer(windows);
    CHECK(n.channels[0] == ChannelRange{0.0, 100.0, false});
    CHECK(n.channels[1].degenerate);
    CHECK(n.apply(5.0, 1) == 0.0);
    CHECK(n.invert(0.7, 1) == 5.0);
    CHECK(n.apply(50.0, 0) == 0.5);
    CHECK(n.apply(100.0, 0) == 1.0);
    CHECK(n.apply(200.0, 0) == 2.0);
    CHECK(n.apply(-100.0, 0) == -1.0);
    for (double v : {0.0, 50.0, 100.0}) {
        CHECK(n.invert(n.apply(v, 0), 0) == doctest::Approx(v).epsilon(1e-9));
    }
    CHECK(fit_normalizer(windows) == n);
    CHECK_THROWS_AS(n.apply(1.0, 3), InvalidInputError);
    CHECK_THROWS_AS(normalize_invert(n, 1.0, 7), InvalidInputError);
    CHECK_THROWS_AS(fit_normalizer(std::vector<Tensor>{}), InsufficientDataError);

    const Tensor scaled = n.apply_window(windows[0]);
    CHECK(scaled.at(1, 0) == 0.5);
    CHECK(scaled.at(2, 2) == 1.0);
    CHECK(scaled.at(0, 1) == 0.0);
}

TEST_CASE("no leakage from the test partition") {
    const WindowedPairs p = make_windows(default_run(), 10);
    const auto [train, test] = chronological_split(p, SplitSpec{0.8});
    const Normalizer n = fit_normalizer(train.inputs);
    const PreparedData prepared = prepare_dataset(default_run(), 10, SplitSpec{0.8});
    CHECK(prepared.normalizer == n);

    Trajectory truncated = default_run();
    truncated.samples.resize(train.target_index.back() + 1);
    const WindowedPairs p2 = make_windows(truncated, 10);
    CHECK(fit_normalizer(p2.inputs) == n);
}

TEST_CASE("prepared dataset alignment") {
    const Trajectory& traj = default_run();
    const PreparedData d = prepare_dataset(traj, 10, SplitSpec{0.8});
    CHECK(d.train.size() == 2392);
    CHECK(d.test.size() == 599);
    CHECK(d.normalizer.channels[1].degenerate);
    for (const SequenceDataset* part : {&d.train, &d.test}) {
        for (std::size_t i = 0; i < part->size(); ++i) {
            const TrajectorySample& s = traj.samples[part->target_index[i]];
            const double xs = d.normalizer.invert(part->targets[0][i], Axis::x);
            const double zs = d.normalizer.invert(part->targets[2][i], Axis::z);
            CHECK(std::abs(xs - s.x) <= 1e-9 * std::max(1.0, std::abs(s.x)));
            CHECK(std::abs(zs - s.z) <= 1e-9 * std::abs(s.z));
            CHECK(part->physical_targets[0][i] == s.x);
            CHECK(part->targets[1][i] == 0.0);
        }
    }
    for (const Tensor& w : d.train.inputs) {
        for (double v : w.values()) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
}
