#include "qfd/vqc.hpp"

#include <atomic>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qfd::vqc {

namespace {

std::atomic<std::uint64_t> g_forward_evals{0};

void check_finite(std::span<const double> values, const char* who) {
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument(std::string(who) + ": non-finite angle");
        }
    }
}

} // namespace

void VqcConfig::validate() const {
    if (n_qubits < 1 || n_qubits > qsim::kMaxQubits) {
        throw std::invalid_argument("VqcConfig: n_qubits must be in [1, " +
                                    std::to_string(qsim::kMaxQubits) + "]");
    }
    if (n_layers < 1 || n_layers > 8) {
        throw std::invalid_argument("VqcConfig: n_layers must be in [1, 8]");
    }
}

VqcParams VqcParams::zeros(const VqcConfig& cfg) {
    cfg.validate();
    return VqcParams{std::vector<double>(size_for(cfg), 0.0)};
}

VqcParams VqcParams::random_init(const VqcConfig& cfg, std::mt19937_64& rng) {
    cfg.validate();
    std::uniform_real_distribution<double> dist(0.0, 2.0 * std::numbers::pi);
    VqcParams p{std::vector<double>(size_for(cfg))};
    for (double& a : p.angles) {
        a = dist(rng);
    }
    return p;
}

qsim::StateVector& angle_embedding(qsim::StateVector& state, const FeatureAngles& x) {
    if (x.size() != state.n_qubits()) {
        throw std::invalid_argument("angle_embedding: expected " +
                                    std::to_string(state.n_qubits()) + " angles, got " +
                                    std::to_string(x.size()));
    }
    check_finite(x, "angle_embedding");
    for (std::size_t q = 0; q < x.size(); ++q) {
        state.apply_ry(q, x[q]);
    }
    return state;
}

qsim::StateVector& entangling_layer(qsim::StateVector& state, std::span<const double> layer_angles) {
    const std::size_t n = state.n_qubits();
    if (layer_angles.size() != n * 3) {
        throw std::invalid_argument("entangling_layer: expected " + std::to_string(n * 3) +
                                    " angles, got " + std::to_string(layer_angles.size()));
    }
    check_finite(layer_angles, "entangling_layer");
    for (std::size_t q = 0; q < n; ++q) {
        state.apply_rot(q, layer_angles[q * 3], layer_angles[q * 3 + 1], layer_angles[q * 3 + 2]);
    }
    if (n > 1) {
        for (std::size_t q = 0; q < n; ++q) {
            state.apply_cnot(q, (q + 1) % n);
        }
    }
    return state;
}

MeasurementVector vqc_forward(const FeatureAngles& x, const VqcParams& params, const VqcConfig& cfg) {
    cfg.validate();
    if (x.size() != cfg.n_qubits) {
        throw std::invalid_argument("vqc_forward: feature vector has " + std::to_string(x.size()) +
                                    " entries, config expects " + std::to_string(cfg.n_qubits));
    }
    if (params.angles.size() != VqcParams::size_for(cfg)) {
        throw std::invalid_argument("vqc_forward: params have " +
                                    std::to_string(params.angles.size()) + " angles, config expects " +
                                    std::to_string(VqcParams::size_for(cfg)));
    }
    g_forward_evals.fetch_add(1, std::memory_order_relaxed);

    qsim::StateVector state = qsim::init_state(cfg.n_qubits);
    angle_embedding(state, x);
    const std::size_t per_layer = cfg.n_qubits * 3;
    for (std::size_t l = 0; l < cfg.n_layers; ++l) {
        entangling_layer(state, std::span<const double>(params.angles).subspan(l * per_layer, per_layer));
    }

    MeasurementVector q(cfg.n_qubits);
    for (std::size_t i = 0; i < cfg.n_qubits; ++i) {
        q[i] = state.expect_z(i);
    }
    return q;
}

VqcGrads vqc_backward(const FeatureAngles& x, const VqcParams& params, const VqcConfig& cfg,
                      const std::vector<double>& upstream) {
    cfg.validate();
    if (upstream.size() != cfg.n_qubits) {
        throw std::invalid_argument("vqc_backward: upstream has " + std::to_string(upstream.size()) +
                                    " entries, config expects " + std::to_string(cfg.n_qubits));
    }

    constexpr double shift = std::numbers::pi / 2.0;

    const auto shifted_dot = [&](const FeatureAngles& xs, const VqcParams& ps) {
        const MeasurementVector q = vqc_forward(xs, ps, cfg);
        double acc = 0.0;
        for (std::size_t i = 0; i < q.size(); ++i) {
            acc += upstream[i] * q[i];
        }
        return acc;
    };

    VqcGrads grads;
    grads.params.resize(params.angles.size());
    grads.x.resize(x.size());

    VqcParams shifted_params = params;
    for (std::size_t j = 0; j < params.angles.size(); ++j) {
        const double saved = shifted_params.angles[j];
        shifted_params.angles[j] = saved + shift;
        const double plus = shifted_dot(x, shifted_params);
        shifted_params.angles[j] = saved - shift;
        const double minus = shifted_dot(x, shifted_params);
        shifted_params.angles[j] = saved;
        grads.params[j] = (plus - minus) / 2.0;
    }

    FeatureAngles shifted_x = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double saved = shifted_x[i];
        shifted_x[i] = saved + shift;
        const double plus = shifted_dot(shifted_x, params);
        shifted_x[i] = saved - shift;
        const double minus = shifted_dot(shifted_x, params);
        shifted_x[i] = saved;
        grads.x[i] = (plus - minus) / 2.0;
    }

    return grads;
}

std::uint64_t forward_eval_count() {
    return g_forward_evals.load(std::memory_order_relaxed);
}

} // namespace qfd::vqc
