// SPDX-License-Identifier: Apache-2.0
#include "glidecast/model.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "glidecast/error.hpp"

namespace glidecast {

using nlohmann::json;

std::size_t concat_width(std::size_t length) {
    return (length - (kConvWidth - 1)) * kConvFilters + length * kRecurrentUnits + kRecurrentUnits;
}

std::size_t expected_parameter_count(std::size_t length) {
    const std::size_t conv = kConvFilters * kAxisCount * kConvWidth + kConvFilters;
    const std::size_t gate = kRecurrentUnits * (kAxisCount + kRecurrentUnits + 1);
    return conv + 4 * gate + 3 * gate + (concat_width(length) * kHeadUnits + kHeadUnits) +
           (kHeadUnits + 1);
}

HybridModel::HybridModel(std::size_t length, Axis axis, std::uint64_t seed)
    : length_(length),
      axis_(axis),
      seed_(seed),
      conv_kernels_("conv.kernels", Tensor({kConvFilters, kAxisCount, kConvWidth})),
      conv_bias_("conv.bias", Tensor({kConvFilters})),
      lstm_(kAxisCount, kRecurrentUnits, "lstm"),
      gru_(kAxisCount, kRecurrentUnits, "gru"),
      dense1_weights_("head.dense1.weights", Tensor({kHeadUnits, length >= kMinWindow ? concat_width(length) : 0})),
      dense1_bias_("head.dense1.bias", Tensor({kHeadUnits})),
      dense2_weights_("head.dense2.weights", Tensor({1, kHeadUnits})),
      dense2_bias_("head.dense2.bias", Tensor({1})) {
    if (length < kMinWindow) {
        throw InvalidWindowError("window length " + std::to_string(length) +
                                 " is below the convolution width");
    }
}

HybridModel build_model(std::size_t length, Axis axis, RngStream& rng) {
    HybridModel m(length, axis, rng.seed());
    m.conv_kernels_.value = init_params({kConvFilters, kAxisCount, kConvWidth},
                                        kAxisCount * kConvWidth, kConvFilters * kConvWidth, rng);
    m.lstm_ = make_lstm_params(kAxisCount, kRecurrentUnits, rng, "lstm");
    m.gru_ = make_gru_params(kAxisCount, kRecurrentUnits, rng, "gru");
    const std::size_t width = concat_width(length);
    m.dense1_weights_.value = init_params({kHeadUnits, width}, width, kHeadUnits, rng);
    m.dense2_weights_.value = init_params({1, kHeadUnits}, kHeadUnits, 1, rng);
    return m;
}

std::vector<Parameter*> HybridModel::parameters() {
    std::vector<Parameter*> out{&conv_kernels_, &conv_bias_};
    for (auto* p : lstm_.parameters()) out.push_back(p);
    for (auto* p : gru_.parameters()) out.push_back(p);
    out.insert(out.end(), {&dense1_weights_, &dense1_bias_, &dense2_weights_, &dense2_bias_});
    return out;
}

std::vector<const Parameter*> HybridModel::parameters() const {
    std::vector<const Parameter*> out{&conv_kernels_, &conv_bias_};
    for (const auto* p : lstm_.parameters()) out.push_back(p);
    for (const auto* p : gru_.parameters()) out.push_back(p);
    out.insert(out.end(), {&dense1_weights_, &dense1_bias_, &dense2_weights_, &dense2_bias_});
    return out;
}

std::size_t HybridModel::parameter_count() const {
    std::size_t n = 0;
    for (const auto* p : parameters()) {
        n += p->value.size();
    }
    return n;
}

void HybridModel::zero_grad() {
    for (auto* p : parameters()) {
        p->zero_grad();
    }
}

Parameter* HybridModel::find(const std::string& name) {
    for (auto* p : parameters()) {
        if (p->name == name) {
            return p;
        }
    }
    return nullptr;
}

const Parameter* HybridModel::find(const std::string& name) const {
    for (const auto* p : parameters()) {
        if (p->name == name) {
            return p;
        }
    }
    return nullptr;
}

double HybridModel::forward(const Tensor& window, Mode mode, RngStream* rng,
                            ForwardCache* cache) const {
    if (window.rank() != 2 || window.dim(0) != length_ || window.dim(1) != kAxisCount) {
        throw ShapeError("model expects a " + std::to_string(length_) + " x 3 window, got " +
                         shape_string(window.shape()));
    }
    if (mode == Mode::train && rng == nullptr) {
        throw InvalidInputError("train-mode forward requires a random stream for dropout");
    }
    RngStream unused(0);
    RngStream& r = rng ? *rng : unused;

    ForwardCache local;
    ForwardCache& c = cache ? *cache : local;
    c.valid = false;

    Tensor conv_pre = conv1d(window, conv_kernels_.value, conv_bias_.value);
    c.branch_out[0] = dropout(relu(conv_pre), kDropoutRate, mode, r, c.conv_mask);
    c.branch_out[1] = dropout(lstm_layer(window, lstm_, cache ? &c.lstm : nullptr), kDropoutRate,
                              mode, r, c.lstm_mask);
    c.branch_out[2] = dropout(gru_layer(window, gru_, cache ? &c.gru : nullptr), kDropoutRate, mode,
                              r, c.gru_mask);
    Tensor concat = flatten_concat(c.branch_out);
    Tensor dense1_pre = dense(concat, dense1_weights_.value, dense1_bias_.value);
    Tensor head_in = dropout(relu(dense1_pre), kDropoutRate, mode, r, c.head_mask);
    const double out = dense(head_in, dense2_weights_.value, dense2_bias_.value)[0];

    if (cache) {
        c.input = window;
        c.conv_pre = std::move(conv_pre);
        c.concat = std::move(concat);
        c.dense1_pre = std::move(dense1_pre);
        c.head_in = std::move(head_in);
        c.valid = true;
    }
    return out;
}

void HybridModel::backward(const ForwardCache& c, double grad_output) {
    if (!c.valid) {
        throw StateError("backward called without a cached forward pass");
    }
    const Tensor g_out = Tensor::vector({grad_output});
    const Tensor g_head_in = dense_backward(c.head_in, dense2_weights_.value, g_out,
                                            dense2_weights_.grad, dense2_bias_.grad);
    const Tensor g_dense1 = relu_backward(c.dense1_pre, dropout_backward(c.head_mask, g_head_in));
    const Tensor g_concat = dense_backward(c.concat, dense1_weights_.value, g_dense1,
                                           dense1_weights_.grad, dense1_bias_.grad);
    const std::vector<Tensor> g_branch = split_concat_grad(g_concat, c.branch_out);

    const Tensor g_conv = relu_backward(c.conv_pre, dropout_backward(c.conv_mask, g_branch[0]));
    conv1d_backward(c.input, conv_kernels_.value, g_conv, conv_kernels_.grad, conv_bias_.grad);
    lstm_layer_backward(c.lstm, dropout_backward(c.lstm_mask, g_branch[1]), lstm_);
    gru_layer_backward(c.gru, dropout_backward(c.gru_mask, g_branch[2]), gru_);
}

double model_forward(const HybridModel& m, const Tensor& window, Mode mode, RngStream& rng,
                     ForwardCache* cache) {
    return m.forward(window, mode, &rng, cache);
}

void model_backward(HybridModel& m, const ForwardCache& cache, double grad_output) {
    m.backward(cache, grad_output);
}

AxisModelSet make_model_set(std::size_t length, const Normalizer& normalizer,
                            const std::array<std::uint64_t, kAxisCount>& seeds) {
    AxisModelSet set;
    set.length = length;
    set.normalizer = normalizer;
    set.models.reserve(kAxisCount);
    for (Axis a : kAxes) {
        RngStream rng(seeds[index(a)]);
        set.models.push_back(build_model(length, a, rng));
    }
    return set;
}

Position predict_next(const AxisModelSet& set, const Tensor& window) {
    if (window.rank() != 2 || window.dim(0) != set.length || window.dim(1) != kAxisCount) {
        throw ShapeError("predict_next expects a " + std::to_string(set.length) +
                         " x 3 window, got " + shape_string(window.shape()));
    }
    const Tensor scaled = set.normalizer.apply_window(window);
    Position out{};
    for (Axis a : kAxes) {
        out[index(a)] = set.normalizer.invert(set.model(a).predict(scaled), a);
    }
    return out;
}

std::vector<Position> rollout(const AxisModelSet& set, const Tensor& seed_window,
                              std::size_t steps) {
    std::vector<Position> out;
    out.reserve(steps);
    Tensor window = seed_window;
    for (std::size_t n = 0; n < steps; ++n) {
        const Position next = predict_next(set, window);
        out.push_back(next);
        const std::size_t L = window.dim(0);
        for (std::size_t s = 0; s + 1 < L; ++s) {
            for (std::size_t c = 0; c < kAxisCount; ++c) {
                window.at(s, c) = window.at(s + 1, c);
            }
        }
        for (std::size_t c = 0; c < kAxisCount; ++c) {
            window.at(L - 1, c) = next[c];
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Model files
// ---------------------------------------------------------------------------

namespace {

json normalizer_to_json(const Normalizer& n) {
    json j = json::object();
    for (Axis a : kAxes) {
        const auto& c = n.channels[index(a)];
        j[std::string(to_string(a))] = {{"min", c.min}, {"max", c.max}, {"degenerate", c.degenerate}};
    }
    return j;
}

Normalizer normalizer_from_json(const json& j) {
    Normalizer n;
    for (Axis a : kAxes) {
        const json& c = j.at(std::string(to_string(a)));
        n.channels[index(a)] = {c.at("min").get<double>(), c.at("max").get<double>(),
                                c.at("degenerate").get<bool>()};
    }
    return n;
}

} // namespace

std::filesystem::path model_file_path(const std::filesystem::path& dir, Axis a) {
    return dir / ("model_" + std::string(to_string(a)) + ".json");
}

void write_model_file(const std::filesystem::path& path, const HybridModel& m,
                      const Normalizer& normalizer) {
    json params = json::object();
    for (const auto* p : m.parameters()) {
        params[p->name] = {{"shape", p->value.shape()},
                           {"values", std::vector<double>(p->value.values().begin(),
                                                          p->value.values().end())}};
    }
    json doc = {{"format_version", kModelFormatVersion},
                {"axis", std::string(to_string(m.axis()))},
                {"sequence_length", m.sequence_length()},
                {"seed", m.seed()},
                {"normalizer", normalizer_to_json(normalizer)},
                {"parameters", std::move(params)}};
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot open '" + path.string() + "' for writing");
    }
    out << doc.dump() << '\n';
    if (!out) {
        throw Error("failed writing '" + path.string() + "'");
    }
}

LoadedModel read_model_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw MissingFileError("model file '" + path.string() + "' not found");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();

    json doc;
    try {
        doc = json::parse(buffer.str());
    } catch (const json::parse_error& e) {
        throw TruncatedFileError("model file '" + path.string() + "' is truncated or corrupt: " +
                                 e.what());
    }
    try {
        if (!doc.contains("format_version") || !doc["format_version"].is_number_integer() ||
            doc["format_version"].get<int>() != kModelFormatVersion) {
            throw VersionMismatchError("model file '" + path.string() + "' has format_version " +
                                       (doc.contains("format_version")
                                            ? doc["format_version"].dump()
                                            : std::string("<missing>")) +
                                       ", expected " + std::to_string(kModelFormatVersion));
        }
        const Axis axis = axis_from_string(doc.at("axis").get<std::string>());
        const auto length = doc.at("sequence_length").get<std::size_t>();
        const auto seed = doc.at("seed").get<std::uint64_t>();
        LoadedModel loaded{HybridModel(length, axis, seed),
                           normalizer_from_json(doc.at("normalizer"))};

        const json& params = doc.at("parameters");
        for (auto* p : loaded.model.parameters()) {
            if (!params.contains(p->name)) {
                throw TruncatedFileError("model file '" + path.string() + "' lacks parameter '" +
                                         p->name + "'");
            }
            const json& entry = params.at(p->name);
            const auto shape = entry.at("shape").get<std::vector<std::size_t>>();
            if (shape != p->value.shape()) {
                throw LoadError("parameter '" + p->name + "' has shape " + shape_string(shape) +
                                ", expected " + shape_string(p->value.shape()));
            }
            auto values = entry.at("values").get<std::vector<double>>();
            if (values.size() != p->value.size()) {
                throw TruncatedFileError("parameter '" + p->name + "' has " +
                                         std::to_string(values.size()) + " values, expected " +
                                         std::to_string(p->value.size()));
            }
            p->value = Tensor(shape, std::move(values));
        }
        if (params.size() != loaded.model.parameters().size()) {
            throw LoadError("model file '" + path.string() + "' has unexpected parameters");
        }
        return loaded;
    } catch (const json::exception& e) {
        throw LoadError("model file '" + path.string() + "' is malformed: " + e.what());
    } catch (const InvalidWindowError& e) {
        throw LoadError("model file '" + path.string() + "': " + e.what());
    } catch (const InvalidInputError& e) {
        throw LoadError("model file '" + path.string() + "': " + e.what());
    }
}

void save_model(const AxisModelSet& set, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (Axis a : kAxes) {
        write_model_file(model_file_path(dir, a), set.model(a), set.normalizer);
    }
}

AxisModelSet load_model(const std::filesystem::path& dir) {
    AxisModelSet set;
    set.models.reserve(kAxisCount);
    for (Axis a : kAxes) {
        LoadedModel loaded = read_model_file(model_file_path(dir, a));
        if (loaded.model.axis() != a) {
            throw LoadError(model_file_path(dir, a).string() + " holds the " +
                            std::string(to_string(loaded.model.axis())) + " model");
        }
        if (a == Axis::x) {
            set.length = loaded.model.sequence_length();
            set.normalizer = loaded.normalizer;
        } else if (loaded.model.sequence_length() != set.length ||
                   !(loaded.normalizer == set.normalizer)) {
            throw LoadError("model files in '" + dir.string() +
                            "' disagree on sequence length or normalizer");
        }
        set.models.push_back(std::move(loaded.model));
    }
    return set;
}

} // namespace glidecast
