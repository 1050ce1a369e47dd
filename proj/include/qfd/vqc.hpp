#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "qfd/qsim.hpp"

namespace qfd::vqc {

struct VqcConfig {
    std::size_t n_qubits = 10;
    std::size_t n_layers = 2;

    // Throws std::invalid_argument outside n_qubits in [1,16], n_layers in [1,8].
    void validate() const;
};

// Trainable rotation angles, shape [n_layers][n_qubits][3], stored flat in
// layer-major order. Entry (l, q, k) holds the k-th Euler angle (alpha, beta,
// gamma) of qubit q in layer l.
struct VqcParams {
    std::vector<double> angles;

    static VqcParams zeros(const VqcConfig& cfg);
    // Uniform [0, 2pi) init, the usual starting point for this circuit family.
    static VqcParams random_init(const VqcConfig& cfg, std::mt19937_64& rng);

    static std::size_t size_for(const VqcConfig& cfg) { return cfg.n_layers * cfg.n_qubits * 3; }

    double& at(const VqcConfig& cfg, std::size_t layer, std::size_t qubit, std::size_t k) {
        return angles[(layer * cfg.n_qubits + qubit) * 3 + k];
    }
    double at(const VqcConfig& cfg, std::size_t layer, std::size_t qubit, std::size_t k) const {
        return angles[(layer * cfg.n_qubits + qubit) * 3 + k];
    }
};

// Classical feature vector interpreted as per-qubit RY angles.
using FeatureAngles = std::vector<double>;

// Per-qubit Pauli-Z expectations, each in [-1, 1].
using MeasurementVector = std::vector<double>;

// RY(x_i) on qubit i, for a state fresh out of init_state.
qsim::StateVector& angle_embedding(qsim::StateVector& state, const FeatureAngles& x);

// One entangling block: Rot(alpha_i, beta_i, gamma_i) on every qubit, then the
// CNOT ring i -> (i+1) mod n. The ring is skipped for a single qubit.
// layer_angles holds n_qubits * 3 values in qubit-major order.
qsim::StateVector& entangling_layer(qsim::StateVector& state, std::span<const double> layer_angles);

// init_state -> angle_embedding -> n_layers entangling blocks -> <Z> on each
// qubit. Pure and deterministic.
MeasurementVector vqc_forward(const FeatureAngles& x, const VqcParams& params, const VqcConfig& cfg);

struct VqcGrads {
    std::vector<double> params; // same flat layout as VqcParams.angles
    std::vector<double> x;      // n_qubits entries
};

// Parameter-shift gradients of upstream . q with respect to every trainable
// angle and every embedded feature angle. Each scalar angle a contributes
// dq/da = [q(a + pi/2) - q(a - pi/2)] / 2 via two full circuit evaluations;
// the rule is exact for these rotation gates, not a finite-difference
// approximation. upstream must have n_qubits entries (dLoss/dq).
VqcGrads vqc_backward(const FeatureAngles& x, const VqcParams& params, const VqcConfig& cfg,
                      const std::vector<double>& upstream);

// Monotone count of vqc_forward evaluations in this process. Lets tests pin
// the 2 * (3 * L * n + n) evaluation budget of vqc_backward.
std::uint64_t forward_eval_count();

} // namespace qfd::vqc
