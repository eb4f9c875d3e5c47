// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "glidecast/error.hpp"
#include "glidecast/model.hpp"
#include "model_check.hpp"

using namespace glidecast;
using glidecast::testing::check_model_gradient;
using glidecast::testing::random_window;
namespace fs = std::filesystem;

namespace {

std::size_t counted_parameters(const HybridModel& m) {
    std::size_t n = 0;
    for (const Parameter* p : m.parameters()) n += shape_size(p->value.shape());
    return n;
}

bool same_bytes(const HybridModel& a, const HybridModel& b) {
    const auto pa = a.parameters();
    const auto pb = b.parameters();
    if (pa.size() != pb.size()) return false;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        if (pa[i]->name != pb[i]->name || pa[i]->value.shape() != pb[i]->value.shape()) return false;
        if (std::memcmp(pa[i]->value.data(), pb[i]->value.data(), pa[i]->value.size() * sizeof(double)) != 0) {
            return false;
        }
    }
    return true;
}

Normalizer sample_normalizer() {
    Normalizer n;
    n.channels[0] = {0.0, 1.2e6, false};
    n.channels[1] = {0.0, 0.0, true};
    n.channels[2] = {3.4e4, 8.0e4, false};
    return n;
}

Tensor physical_window(std::size_t length, RngStream& rng) {
    Tensor w({length, 3});
    for (std::size_t t = 0; t < length; ++t) {
        w.at(t, 0) = rng.uniform(0.0, 1.2e6);
        w.at(t, 1) = 0.0;
        w.at(t, 2) = rng.uniform(3.4e4, 8.0e4);
    }
    return w;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

} // namespace

TEST_CASE("parameter count") {
    CHECK(concat_width(10) == 1216);
    CHECK(expected_parameter_count(10) == 187009);
    for (std::size_t L : {3, 5, 10, 20}) {
        RngStream rng(L);
        const HybridModel m = build_model(L, Axis::z, rng);
        const std::size_t closed = 640 + 17408 + 13056 + (concat_width(L) * 128 + 128) + 129;
        const std::size_t expanded = 31104 + 128 * (128 * L - 64) + 129 + 128;
        CHECK(counted_parameters(m) == closed);
        CHECK(closed == expanded);
        CHECK(m.parameter_count() == closed);
        CHECK(expected_parameter_count(L) == closed);
    }
    RngStream rng(1);
    CHECK_THROWS_AS(build_model(2, Axis::x, rng), InvalidWindowError);
    CHECK_THROWS_AS(HybridModel(2, Axis::x), InvalidWindowError);
}

TEST_CASE("canonical parameter names") {
    HybridModel m(10, Axis::y);
    const auto params = m.parameters();
    REQUIRE(params.size() == 2 + 12 + 9 + 4);
    CHECK(params.front()->name == "conv.kernels");
    CHECK(params.front()->value.shape() == std::vector<std::size_t>{64, 3, 3});
    CHECK(params.back()->name == "head.dense2.bias");
    CHECK(m.find("lstm.Wf") != nullptr);
    CHECK(m.find("head.dense1.weights")->value.shape() == std::vector<std::size_t>{128, 1216});
    CHECK(m.find("nope") == nullptr);
}

TEST_CASE("build_model is deterministic") {
    RngStream a(42), b(42), c(43);
    const HybridModel ma = build_model(10, Axis::x, a);
    CHECK(same_bytes(ma, build_model(10, Axis::x, b)));
    CHECK(!same_bytes(ma, build_model(10, Axis::x, c)));
    CHECK(ma.seed() == 42);
    for (double v : ma.find("lstm.bf")->value.values()) CHECK(v == 1.0);
    for (double v : ma.find("lstm.bi")->value.values()) CHECK(v == 0.0);
}

TEST_CASE("forward") {
    RngStream rng(3);
    const Tensor w = random_window(10, rng);
    const HybridModel zero(10, Axis::x);
    CHECK(zero.predict(w) == 0.0);
    RngStream drop(1);
    CHECK(zero.forward(w, Mode::train, &drop) == 0.0);

    const HybridModel m = build_model(10, Axis::x, rng);
    CHECK(m.predict(w) == m.predict(w));
    CHECK(std::isfinite(m.predict(w)));
    CHECK_THROWS_AS(m.predict(random_window(9, rng)), ShapeError);
    CHECK_THROWS_AS(m.predict(Tensor({10, 2})), ShapeError);
    CHECK_THROWS_AS(m.forward(w, Mode::train, nullptr), InvalidInputError);

    RngStream d1(9), d2(9);
    CHECK(model_forward(m, w, Mode::train, d1) == model_forward(m, w, Mode::train, d2));
}

TEST_CASE("backward") {
    RngStream rng(4);
    HybridModel m = build_model(5, Axis::z, rng);
    const Tensor w = random_window(5, rng);
    ForwardCache empty;
    CHECK_THROWS_AS(m.backward(empty, 1.0), StateError);

    ForwardCache cache;
    RngStream drop(5);
    model_forward(m, w, Mode::train, drop, &cache);
    m.zero_grad();
    model_backward(m, cache, 0.0);
    for (const Parameter* p : m.parameters()) {
        for (double g : p->grad.values()) CHECK(g == 0.0);
    }

    m.zero_grad();
    m.backward(cache, 1.0);
    std::vector<Tensor> first;
    for (const Parameter* p : m.parameters()) first.push_back(p->grad);
    m.zero_grad();
    m.backward(cache, 1.0);
    const auto params = m.parameters();
    for (std::size_t i = 0; i < params.size(); ++i) CHECK(params[i]->grad == first[i]);
}

TEST_CASE("gradients per branch") {
    RngStream rng(6);
    HybridModel m = build_model(5, Axis::x, rng);
    const Tensor w = random_window(5, rng);
    for (const char* branch : {"conv.", "lstm.", "gru.", "head."}) {
        const auto r = check_model_gradient(m, w, 77, Mode::train, branch, 7);
        INFO(branch);
        CHECK(r.checked > 0);
        CHECK(r.max_relative_error < 1e-5);
    }
    const auto all = check_model_gradient(m, w, 78, Mode::eval, "", 13);
    CHECK(all.max_relative_error < 1e-4);
}

TEST_CASE("predict_next and rollout") {
    RngStream rng(7);
    const Normalizer n = sample_normalizer();
    AxisModelSet set = make_model_set(10, n, {1, 2, 3});
    const Tensor w = physical_window(10, rng);

    const Position p = predict_next(set, w);
    const Tensor scaled = n.apply_window(w);
    for (Axis a : kAxes) {
        const double manual = normalize_invert(n, model_forward(set.model(a), scaled, Mode::eval, rng), index(a));
        CHECK(std::abs(p[index(a)] - manual) <= 1e-12 * std::max(1.0, std::abs(manual)));
    }
    CHECK(p[1] == 0.0);

    AxisModelSet ident = make_model_set(10, Normalizer::identity(), {1, 2, 3});
    const Tensor unit = random_window(10, rng);
    const Position q = predict_next(ident, unit);
    for (Axis a : kAxes) CHECK(q[index(a)] == ident.model(a).predict(unit));

    const Tensor other = physical_window(10, rng);
    const Position o1 = predict_next(set, other);
    CHECK(predict_next(set, w) == p);
    CHECK(predict_next(set, other) == o1);

    CHECK(rollout(set, w, 0).empty());
    const auto r1 = rollout(set, w, 1);
    REQUIRE(r1.size() == 1);
    CHECK(r1[0] == p);

    const auto r2 = rollout(set, w, 2);
    Tensor shifted({10, 3});
    for (std::size_t t = 0; t < 9; ++t) {
        for (std::size_t c = 0; c < 3; ++c) shifted.at(t, c) = w.at(t + 1, c);
    }
    for (std::size_t c = 0; c < 3; ++c) shifted.at(9, c) = p[c];
    CHECK(r2[1] == predict_next(set, shifted));

    const auto r6 = rollout(set, w, 6);
    const auto r7 = rollout(set, w, 7);
    for (std::size_t i = 0; i < 6; ++i) CHECK(r6[i] == r7[i]);

    CHECK_THROWS_AS(predict_next(set, physical_window(9, rng)), ShapeError);
}

TEST_CASE("save and load") {
    TempDir dir("glidecast_model_test");
    const Normalizer n = sample_normalizer();
    const AxisModelSet set = make_model_set(10, n, {42, 43, 44});
    save_model(set, dir.path);
    for (Axis a : kAxes) CHECK(fs::exists(model_file_path(dir.path, a)));

    const AxisModelSet back = load_model(dir.path);
    CHECK(back.length == 10);
    CHECK(back.normalizer == n);
    for (Axis a : kAxes) {
        CHECK(back.model(a).axis() == a);
        CHECK(back.model(a).seed() == set.model(a).seed());
        CHECK(back.model(a).parameter_count() == 187009);
        CHECK(same_bytes(back.model(a), set.model(a)));
    }
    RngStream rng(8);
    for (int i = 0; i < 100; ++i) {
        const Tensor w = physical_window(10, rng);
        CHECK(predict_next(back, w) == predict_next(set, w));
    }

    // Saving the reloaded set reproduces the files exactly.
    TempDir again("glidecast_model_test_again");
    save_model(back, again.path);
    for (Axis a : kAxes) {
        std::ifstream f1(model_file_path(dir.path, a)), f2(model_file_path(again.path, a));
        std::stringstream s1, s2;
        s1 << f1.rdbuf();
        s2 << f2.rdbuf();
        CHECK(s1.str() == s2.str());
    }

    const nlohmann::json doc = nlohmann::json::parse(std::ifstream(model_file_path(dir.path, Axis::z)));
    CHECK(doc["format_version"] == 1);
    CHECK(doc["axis"] == "z");
    CHECK(doc["sequence_length"] == 10);
    CHECK(doc["seed"] == 44);
    CHECK(doc["parameters"].size() == 27);
    CHECK(doc["parameters"]["conv.kernels"]["shape"] == nlohmann::json::array({64, 3, 3}));
}

TEST_CASE("load errors") {
    TempDir dir("glidecast_model_errors");
    const AxisModelSet set = make_model_set(5, sample_normalizer(), {1, 2, 3});
    const fs::path file = model_file_path(dir.path, Axis::x);

    CHECK_THROWS_AS(load_model(dir.path), MissingFileError);
    CHECK_THROWS_AS(read_model_file(dir.path / "absent.json"), MissingFileError);

    write_model_file(file, set.model(Axis::x), set.normalizer);
    std::stringstream text;
    text << std::ifstream(file).rdbuf();
    const std::string good = text.str();
    auto write = [&](const std::string& s) { std::ofstream(file, std::ios::trunc) << s; };

    nlohmann::json doc = nlohmann::json::parse(good);
    doc["format_version"] = 2;
    write(doc.dump());
    CHECK_THROWS_AS(read_model_file(file), VersionMismatchError);

    write(good.substr(0, good.size() / 2));
    CHECK_THROWS_AS(read_model_file(file), TruncatedFileError);

    doc = nlohmann::json::parse(good);
    doc["parameters"].erase("gru.Uh");
    write(doc.dump());
    CHECK_THROWS_AS(read_model_file(file), TruncatedFileError);

    doc = nlohmann::json::parse(good);
    doc["parameters"]["conv.bias"]["values"].erase(0);
    write(doc.dump());
    CHECK_THROWS_AS(read_model_file(file), TruncatedFileError);

    doc = nlohmann::json::parse(good);
    doc["axis"] = "w";
    write(doc.dump());
    CHECK_THROWS_AS(read_model_file(file), LoadError);

    write(good);
    CHECK_NOTHROW(read_model_file(file));
    write_model_file(model_file_path(dir.path, Axis::y), set.model(Axis::y), set.normalizer);
    write_model_file(model_file_path(dir.path, Axis::z), set.model(Axis::x), set.normalizer);
    CHECK_THROWS_AS(load_model(dir.path), LoadError);
}
