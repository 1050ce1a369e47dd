#pragma once

#include <cstddef>
#include <random>
#include <utility>
#include <vector>

namespace qfd::neural {

using Vec = std::vector<double>;

// Minimal row-major matrix. Everything in this module is CPU-scalar double;
// the shapes are small enough that anything fancier would not pay for itself.
struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    Vec data;

    Mat() = default;
    Mat(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::size_t size() const { return data.size(); }
};

// y = m x (length m.rows)
Vec matvec(const Mat& m, const Vec& x);
// y = m^T x (length m.cols)
Vec matvec_t(const Mat& m, const Vec& x);
// acc += a (outer) b, acc is |a| x |b|
void add_outer(Mat& acc, const Vec& a, const Vec& b);

double sigmoid(double z);

// ---------------------------------------------------------------------------
// Weight init
// ---------------------------------------------------------------------------

// Glorot-uniform: U(-limit, limit) with limit = sqrt(6 / (fan_in + fan_out)).
Mat glorot_uniform(std::size_t rows, std::size_t cols, std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// LSTM
// ---------------------------------------------------------------------------

// One stacked layer's gate parameters. W_* act on the layer input, U_* on the
// previous hidden state, b_* are biases. Gate order everywhere: i, f, c, o.
struct LstmLayerWeights {
    Mat w_i, w_f, w_c, w_o; // hidden x input
    Mat u_i, u_f, u_c, u_o; // hidden x hidden
    Vec b_i, b_f, b_c, b_o; // hidden
};

struct LstmWeights {
    std::vector<LstmLayerWeights> layers;

    std::size_t n_layers() const { return layers.size(); }
    std::size_t hidden_size() const { return layers.empty() ? 0 : layers[0].b_i.size(); }
    std::size_t input_size() const { return layers.empty() ? 0 : layers[0].w_i.cols; }
};

// Glorot W/U, zero biases. Layer k > 0 takes the hidden vector of layer k-1
// as its input.
LstmWeights make_lstm(std::size_t input_size, std::size_t hidden_size, std::size_t n_layers,
                      std::mt19937_64& rng);

struct LstmState {
    Vec h; // hidden
    Vec c; // cell

    static LstmState zero(std::size_t hidden_size) {
        return LstmState{Vec(hidden_size, 0.0), Vec(hidden_size, 0.0)};
    }
};

// Per-timestep activations kept for the backward pass.
struct LstmStepCache {
    Vec x;      // input to this layer at this step
    Vec h_prev; // hidden state entering the step
    Vec c_prev; // cell state entering the step
    Vec i, f, c_bar, o;
    Vec c;      // post-update cell state
    Vec tanh_c;
};

struct LstmCache {
    // steps[layer][t]
    std::vector<std::vector<LstmStepCache>> steps;
    // Inverted-dropout masks applied to layer k's output sequence before it
    // feeds layer k+1; empty when no inter-layer dropout was used.
    // inter_masks[k] is seq_len x hidden.
    std::vector<Mat> inter_masks;
    std::size_t input_size = 0;
    std::size_t hidden_size = 0;
};

// Runs the gate recurrences over x_seq (seq_len x input_size). Every stacked
// layer starts from s0. Returns the final hidden state of the top layer and
// the cache for lstm_backward. inter_masks, when given, must hold
// n_layers - 1 matrices of shape seq_len x hidden.
std::pair<Vec, LstmCache> lstm_forward(const std::vector<Vec>& x_seq, const LstmWeights& w,
                                       const LstmState& s0,
                                       const std::vector<Mat>* inter_masks = nullptr);

struct LstmGrads {
    std::vector<LstmLayerWeights> layers; // same shapes as the weights

    void add(const LstmGrads& other);
    void scale(double s);
};

LstmGrads zero_lstm_grads(const LstmWeights& w);

// Exact gradients of <dh_T, h_T> with respect to all weights, biases and the
// input sequence. Throws std::logic_error when the cache does not match w.
std::pair<LstmGrads, std::vector<Vec>> lstm_backward(const LstmCache& cache, const LstmWeights& w,
                                                     const Vec& dh_T);

// ---------------------------------------------------------------------------
// Dense layer
// ---------------------------------------------------------------------------

struct DenseLayer {
    Mat weight; // out x in
    Vec bias;   // out
};

DenseLayer make_dense(std::size_t out_size, std::size_t in_size, std::mt19937_64& rng);

// weight * x + bias
Vec dense_forward(const Vec& x, const DenseLayer& layer);

struct DenseGrads {
    Mat weight;
    Vec bias;

    void add(const DenseGrads& other);
};

// Returns ((grad_weight, grad_bias), dx) for upstream dout.
std::pair<DenseGrads, Vec> dense_backward(const Vec& x, const DenseLayer& layer, const Vec& dout);

// ---------------------------------------------------------------------------
// Dropout
// ---------------------------------------------------------------------------

// Inverted dropout: in training mode each entry is zeroed with probability
// `rate` and survivors are scaled by 1/(1-rate); the returned mask holds those
// scale factors (0 or 1/(1-rate)). Eval mode is the identity with an all-ones
// mask. rate must be in [0, 1).
std::pair<Vec, Vec> dropout(const Vec& x, double rate, bool training, std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// Loss
// ---------------------------------------------------------------------------

// Numerically stable binary cross entropy on logits:
//   loss = mean_i [ max(z_i, 0) - z_i y_i + log(1 + exp(-|z_i|)) ]
// Returns the loss and dloss/dlogits = (sigmoid(z) - y) / N.
std::pair<double, Vec> bce_with_logits(const Vec& logits, const std::vector<int>& labels);

// ---------------------------------------------------------------------------
// Optimizer
// ---------------------------------------------------------------------------

struct AdamState {
    Vec m;
    Vec v;
    long t = 0;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 1e-4;

    static AdamState init(std::size_t n_params, double lr = 1e-3, double weight_decay = 1e-4);
};

// One Adam step with bias correction. Weight decay enters as
// g <- g + weight_decay * p before the moment updates.
void adam_step(Vec& params, const Vec& grads, AdamState& st);

// Scales grads to global L2 norm max_norm when exceeded; returns the
// pre-clip norm. max_norm must be positive.
double clip_grad_norm(Vec& grads, double max_norm);

} // namespace qfd::neural
