// SPDX-License-Identifier: Apache-2.0
// Finite-difference check of a whole HybridModel with dropout masks replayed
// from a fixed seed, so every loss evaluation sees the same masks.
#pragma once

#include <string>

#include "glidecast/model.hpp"
#include "gradcheck.hpp"

namespace glidecast::testing {

inline Tensor random_window(std::size_t length, RngStream& rng) {
    Tensor w({length, 3});
    for (double& v : w.values()) v = rng.uniform(0.0, 1.0);
    return w;
}

/// Checks every `stride`-th entry of every parameter whose name starts with
/// `prefix` (all parameters when empty).
inline GradCheckResult check_model_gradient(HybridModel& m, const Tensor& window,
                                            std::uint64_t dropout_seed, Mode mode,
                                            const std::string& prefix = "",
                                            std::size_t stride = 1) {
    auto loss = [&] {
        RngStream replay(dropout_seed);
        return m.forward(window, mode, &replay);
    };
    m.zero_grad();
    {
        RngStream replay(dropout_seed);
        ForwardCache cache;
        m.forward(window, mode, &replay, &cache);
        m.backward(cache, 1.0);
    }
    GradCheckResult r;
    for (Parameter* p : m.parameters()) {
        if (p->name.rfind(prefix, 0) != 0) continue;
        r.merge(check_gradient(p->value.values(), p->grad.values(), loss, stride));
    }
    return r;
}

} // namespace glidecast::testing
