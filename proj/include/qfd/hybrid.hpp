#pragma once

#include <cstddef>
#include <random>
#include <utility>
#include <vector>

#include "qfd/neural.hpp"
#include "qfd/vqc.hpp"

namespace qfd::hybrid {

using neural::Vec;

// LSTM -> dropout on h_T -> dense reducer -> VQC -> dense head. The reducer's
// output doubles as the embedding angles; RY's 2pi periodicity makes the
// unbounded range safe. Logits stay pre-sigmoid; the loss and predict() own
// the squashing.
struct HybridModel {
    neural::LstmWeights lstm;
    neural::DenseLayer reducer; // hidden -> n_qubits
    vqc::VqcParams vqc_params;
    vqc::VqcConfig vqc_cfg;
    neural::DenseLayer head;    // n_qubits -> 1
    double dropout_rate = 0.3;
};

// Purely classical comparison model: stacked LSTM with inter-layer dropout,
// then a dense head on the final hidden state.
struct BaselineModel {
    neural::LstmWeights lstm;
    neural::DenseLayer head; // hidden -> 1
    double dropout_rate = 0.3;
};

HybridModel make_hybrid(std::size_t input_size, std::size_t hidden_size, std::size_t lstm_layers,
                        const vqc::VqcConfig& cfg, double dropout_rate, std::mt19937_64& rng);

BaselineModel make_baseline(std::size_t input_size, std::size_t hidden_size,
                            std::size_t lstm_layers, double dropout_rate, std::mt19937_64& rng);

// Per-sample intermediates for the backward pass. Consumed by exactly one
// matching backward call.
struct HybridSampleCache {
    neural::LstmCache lstm;
    Vec h_T;
    Vec h_mask;    // dropout mask on h_T
    Vec h_dropped; // reducer input
    vqc::FeatureAngles angles;
    vqc::MeasurementVector q;
};

struct HybridCache {
    std::vector<HybridSampleCache> samples;
    std::size_t input_size = 0;
};

struct BaselineSampleCache {
    neural::LstmCache lstm;
    Vec h_T;
};

struct BaselineCache {
    std::vector<BaselineSampleCache> samples;
    std::size_t input_size = 0;
};

// Forward over a batch (B x F). Each sample becomes a length-1 sequence for
// the LSTM. Dropout masks are drawn from rng up front in sample order, so the
// result is independent of n_threads; the per-sample work may then fan out.
std::pair<Vec, HybridCache> hybrid_forward(const std::vector<Vec>& batch, const HybridModel& model,
                                           bool training, std::mt19937_64& rng,
                                           std::size_t n_threads = 1);

struct HybridGrads {
    neural::LstmGrads lstm;
    neural::DenseGrads reducer;
    std::vector<double> vqc; // flat, same layout as VqcParams.angles
    neural::DenseGrads head;
};

// Chain rule through head, VQC (parameter shift), reducer, dropout and LSTM;
// gradients are summed over the batch in sample order regardless of
// n_threads. Throws std::logic_error on a cache/batch mismatch.
HybridGrads hybrid_backward(const HybridCache& cache, const Vec& dlogits, const HybridModel& model,
                            std::size_t n_threads = 1);

std::pair<Vec, BaselineCache> baseline_forward(const std::vector<Vec>& batch,
                                               const BaselineModel& model, bool training,
                                               std::mt19937_64& rng, std::size_t n_threads = 1);

struct BaselineGrads {
    neural::LstmGrads lstm;
    neural::DenseGrads head;
};

BaselineGrads baseline_backward(const BaselineCache& cache, const Vec& dlogits,
                                const BaselineModel& model, std::size_t n_threads = 1);

// label = 1 iff sigmoid(logit) >= threshold, i.e. logit >= logit(threshold).
// The boundary is inclusive: logit 0 at threshold 0.5 maps to 1.
// threshold must lie in (0, 1).
std::vector<int> predict(const Vec& logits, double threshold = 0.5);

// Number of trainable quantum angles (3 * L * n_qubits).
std::size_t quantum_param_count(const HybridModel& model);

// Flat parameter order (also the checkpoint order): per LSTM layer
// w_i,w_f,w_c,w_o,u_i,u_f,u_c,u_o,b_i,b_f,b_c,b_o row-major, then reducer
// weight/bias, then VQC angles, then head weight/bias. Baseline drops the
// reducer and VQC blocks.
std::size_t param_count(const HybridModel& model);
std::size_t param_count(const BaselineModel& model);
Vec flatten_params(const HybridModel& model);
Vec flatten_params(const BaselineModel& model);
void set_params(HybridModel& model, const Vec& flat);
void set_params(BaselineModel& model, const Vec& flat);
Vec flatten_grads(const HybridGrads& grads);
Vec flatten_grads(const BaselineGrads& grads);

} // namespace qfd::hybrid
