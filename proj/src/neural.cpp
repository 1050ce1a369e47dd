#include "qfd/neural.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qfd::neural {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) {
        throw std::invalid_argument(msg);
    }
}

} // namespace

Vec matvec(const Mat& m, const Vec& x) {
    require(x.size() == m.cols, "matvec: dimension mismatch");
    Vec y(m.rows, 0.0);
    for (std::size_t r = 0; r < m.rows; ++r) {
        double acc = 0.0;
        const double* row = m.data.data() + r * m.cols;
        for (std::size_t c = 0; c < m.cols; ++c) {
            acc += row[c] * x[c];
        }
        y[r] = acc;
    }
    return y;
}

Vec matvec_t(const Mat& m, const Vec& x) {
    require(x.size() == m.rows, "matvec_t: dimension mismatch");
    Vec y(m.cols, 0.0);
    for (std::size_t r = 0; r < m.rows; ++r) {
        const double xr = x[r];
        const double* row = m.data.data() + r * m.cols;
        for (std::size_t c = 0; c < m.cols; ++c) {
            y[c] += row[c] * xr;
        }
    }
    return y;
}

void add_outer(Mat& acc, const Vec& a, const Vec& b) {
    require(acc.rows == a.size() && acc.cols == b.size(), "add_outer: dimension mismatch");
    for (std::size_t r = 0; r < a.size(); ++r) {
        double* row = acc.data.data() + r * acc.cols;
        const double ar = a[r];
        for (std::size_t c = 0; c < b.size(); ++c) {
            row[c] += ar * b[c];
        }
    }
}

double sigmoid(double z) {
    // Split on sign so exp never overflows.
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

Mat glorot_uniform(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Mat m(rows, cols);
    for (double& v : m.data) {
        v = dist(rng);
    }
    return m;
}

LstmWeights make_lstm(std::size_t input_size, std::size_t hidden_size, std::size_t n_layers,
                      std::mt19937_64& rng) {
    require(input_size > 0 && hidden_size > 0 && n_layers > 0, "make_lstm: sizes must be positive");
    LstmWeights w;
    w.layers.resize(n_layers);
    for (std::size_t l = 0; l < n_layers; ++l) {
        const std::size_t in = (l == 0) ? input_size : hidden_size;
        LstmLayerWeights& lw = w.layers[l];
        lw.w_i = glorot_uniform(hidden_size, in, rng);
        lw.w_f = glorot_uniform(hidden_size, in, rng);
        lw.w_c = glorot_uniform(hidden_size, in, rng);
        lw.w_o = glorot_uniform(hidden_size, in, rng);
        lw.u_i = glorot_uniform(hidden_size, hidden_size, rng);
        lw.u_f = glorot_uniform(hidden_size, hidden_size, rng);
        lw.u_c = glorot_uniform(hidden_size, hidden_size, rng);
        lw.u_o = glorot_uniform(hidden_size, hidden_size, rng);
        lw.b_i.assign(hidden_size, 0.0);
        lw.b_f.assign(hidden_size, 0.0);
        lw.b_c.assign(hidden_size, 0.0);
        lw.b_o.assign(hidden_size, 0.0);
    }
    return w;
}

std::pair<Vec, LstmCache> lstm_forward(const std::vector<Vec>& x_seq, const LstmWeights& w,
                                       const LstmState& s0, const std::vector<Mat>* inter_masks) {
    require(!x_seq.empty(), "lstm_forward: empty sequence");
    require(!w.layers.empty(), "lstm_forward: no layers");
    const std::size_t hidden = w.hidden_size();
    const std::size_t seq_len = x_seq.size();
    require(s0.h.size() == hidden && s0.c.size() == hidden, "lstm_forward: s0 size mismatch");
    for (const Vec& x : x_seq) {
        require(x.size() == w.input_size(), "lstm_forward: input width mismatch");
    }
    if (inter_masks != nullptr) {
        require(inter_masks->size() == w.n_layers() - 1,
                "lstm_forward: expected one mask per layer boundary");
        for (const Mat& m : *inter_masks) {
            require(m.rows == seq_len && m.cols == hidden, "lstm_forward: mask shape mismatch");
        }
    }

    LstmCache cache;
    cache.steps.resize(w.n_layers());
    cache.input_size = w.input_size();
    cache.hidden_size = hidden;
    if (inter_masks != nullptr) {
        cache.inter_masks = *inter_masks;
    }

    std::vector<Vec> layer_input = x_seq;
    Vec h_final;
    for (std::size_t l = 0; l < w.n_layers(); ++l) {
        const LstmLayerWeights& lw = w.layers[l];
        Vec h = s0.h;
        Vec c = s0.c;
        std::vector<Vec> outputs(seq_len);
        cache.steps[l].resize(seq_len);
        for (std::size_t t = 0; t < seq_len; ++t) {
            const Vec& x = layer_input[t];
            LstmStepCache& sc = cache.steps[l][t];
            sc.x = x;
            sc.h_prev = h;
            sc.c_prev = c;

            Vec a_i = matvec(lw.w_i, x);
            Vec a_f = matvec(lw.w_f, x);
            Vec a_c = matvec(lw.w_c, x);
            Vec a_o = matvec(lw.w_o, x);
            const Vec ui = matvec(lw.u_i, h);
            const Vec uf = matvec(lw.u_f, h);
            const Vec uc = matvec(lw.u_c, h);
            const Vec uo = matvec(lw.u_o, h);

            sc.i.resize(hidden);
            sc.f.resize(hidden);
            sc.c_bar.resize(hidden);
            sc.o.resize(hidden);
            sc.c.resize(hidden);
            sc.tanh_c.resize(hidden);
            Vec h_new(hidden);
            for (std::size_t j = 0; j < hidden; ++j) {
                sc.i[j] = sigmoid(a_i[j] + ui[j] + lw.b_i[j]);
                sc.f[j] = sigmoid(a_f[j] + uf[j] + lw.b_f[j]);
                sc.c_bar[j] = std::tanh(a_c[j] + uc[j] + lw.b_c[j]);
                sc.o[j] = sigmoid(a_o[j] + uo[j] + lw.b_o[j]);
                sc.c[j] = sc.f[j] * c[j] + sc.i[j] * sc.c_bar[j];
                sc.tanh_c[j] = std::tanh(sc.c[j]);
                h_new[j] = sc.o[j] * sc.tanh_c[j];
            }
            h = h_new;
            c = sc.c;
            outputs[t] = h;
        }
        h_final = h;
        if (l + 1 < w.n_layers()) {
            // Feed this layer's output sequence (optionally masked) upward.
            layer_input = outputs;
            if (!cache.inter_masks.empty()) {
                const Mat& mask = cache.inter_masks[l];
                for (std::size_t t = 0; t < seq_len; ++t) {
                    for (std::size_t j = 0; j < hidden; ++j) {
                        layer_input[t][j] *= mask(t, j);
                    }
                }
            }
        }
    }
    return {h_final, cache};
}

LstmGrads zero_lstm_grads(const LstmWeights& w) {
    LstmGrads g;
    g.layers.resize(w.n_layers());
    for (std::size_t l = 0; l < w.n_layers(); ++l) {
        const LstmLayerWeights& lw = w.layers[l];
        LstmLayerWeights& gl = g.layers[l];
        gl.w_i = Mat(lw.w_i.rows, lw.w_i.cols);
        gl.w_f = Mat(lw.w_f.rows, lw.w_f.cols);
        gl.w_c = Mat(lw.w_c.rows, lw.w_c.cols);
        gl.w_o = Mat(lw.w_o.rows, lw.w_o.cols);
        gl.u_i = Mat(lw.u_i.rows, lw.u_i.cols);
        gl.u_f = Mat(lw.u_f.rows, lw.u_f.cols);
        gl.u_c = Mat(lw.u_c.rows, lw.u_c.cols);
        gl.u_o = Mat(lw.u_o.rows, lw.u_o.cols);
        gl.b_i.assign(lw.b_i.size(), 0.0);
        gl.b_f.assign(lw.b_f.size(), 0.0);
        gl.b_c.assign(lw.b_c.size(), 0.0);
        gl.b_o.assign(lw.b_o.size(), 0.0);
    }
    return g;
}

namespace {

void add_mat(Mat& a, const Mat& b) {
    for (std::size_t k = 0; k < a.data.size(); ++k) {
        a.data[k] += b.data[k];
    }
}

void add_vec(Vec& a, const Vec& b) {
    for (std::size_t k = 0; k < a.size(); ++k) {
        a[k] += b[k];
    }
}

} // namespace

void LstmGrads::add(const LstmGrads& other) {
    for (std::size_t l = 0; l < layers.size(); ++l) {
        add_mat(layers[l].w_i, other.layers[l].w_i);
        add_mat(layers[l].w_f, other.layers[l].w_f);
        add_mat(layers[l].w_c, other.layers[l].w_c);
        add_mat(layers[l].w_o, other.layers[l].w_o);
        add_mat(layers[l].u_i, other.layers[l].u_i);
        add_mat(layers[l].u_f, other.layers[l].u_f);
        add_mat(layers[l].u_c, other.layers[l].u_c);
        add_mat(layers[l].u_o, other.layers[l].u_o);
        add_vec(layers[l].b_i, other.layers[l].b_i);
        add_vec(layers[l].b_f, other.layers[l].b_f);
        add_vec(layers[l].b_c, other.layers[l].b_c);
        add_vec(layers[l].b_o, other.layers[l].b_o);
    }
}

void LstmGrads::scale(double s) {
    for (LstmLayerWeights& l : layers) {
        for (Mat* m : {&l.w_i, &l.w_f, &l.w_c, &l.w_o, &l.u_i, &l.u_f, &l.u_c, &l.u_o}) {
            for (double& v : m->data) {
                v *= s;
            }
        }
        for (Vec* v : {&l.b_i, &l.b_f, &l.b_c, &l.b_o}) {
            for (double& e : *v) {
                e *= s;
            }
        }
    }
}

std::pair<LstmGrads, std::vector<Vec>> lstm_backward(const LstmCache& cache, const LstmWeights& w,
                                                     const Vec& dh_T) {
    if (cache.steps.size() != w.n_layers() || cache.hidden_size != w.hidden_size() ||
        cache.input_size != w.input_size()) {
        throw std::logic_error("lstm_backward: cache does not match the given weights");
    }
    if (dh_T.size() != w.hidden_size()) {
        throw std::invalid_argument("lstm_backward: dh_T size mismatch");
    }
    const std::size_t seq_len = cache.steps[0].size();
    const std::size_t hidden = w.hidden_size();

    LstmGrads grads = zero_lstm_grads(w);

    // dh_seq holds the externally supplied gradient on each output h_t of the
    // layer currently being processed; only the top layer's last step gets one.
    std::vector<Vec> dh_seq(seq_len, Vec(hidden, 0.0));
    dh_seq[seq_len - 1] = dh_T;

    std::vector<Vec> dx_seq;
    for (std::size_t li = w.n_layers(); li-- > 0;) {
        const LstmLayerWeights& lw = w.layers[li];
        LstmLayerWeights& gl = grads.layers[li];
        dx_seq.assign(seq_len, Vec(cache.steps[li][0].x.size(), 0.0));

        Vec dh_rec(hidden, 0.0); // recurrent gradient flowing to h_{t-1}
        Vec dc_next(hidden, 0.0);
        for (std::size_t t = seq_len; t-- > 0;) {
            const LstmStepCache& sc = cache.steps[li][t];
            Vec da_i(hidden), da_f(hidden), da_c(hidden), da_o(hidden);
            for (std::size_t j = 0; j < hidden; ++j) {
                const double dh = dh_seq[t][j] + dh_rec[j];
                const double d_o = dh * sc.tanh_c[j];
                double dc = dc_next[j] + dh * sc.o[j] * (1.0 - sc.tanh_c[j] * sc.tanh_c[j]);
                const double d_f = dc * sc.c_prev[j];
                const double d_i = dc * sc.c_bar[j];
                const double d_cbar = dc * sc.i[j];
                da_o[j] = d_o * sc.o[j] * (1.0 - sc.o[j]);
                da_f[j] = d_f * sc.f[j] * (1.0 - sc.f[j]);
                da_i[j] = d_i * sc.i[j] * (1.0 - sc.i[j]);
                da_c[j] = d_cbar * (1.0 - sc.c_bar[j] * sc.c_bar[j]);
                dc_next[j] = dc * sc.f[j];
            }

            add_outer(gl.w_i, da_i, sc.x);
            add_outer(gl.w_f, da_f, sc.x);
            add_outer(gl.w_c, da_c, sc.x);
            add_outer(gl.w_o, da_o, sc.x);
            add_outer(gl.u_i, da_i, sc.h_prev);
            add_outer(gl.u_f, da_f, sc.h_prev);
            add_outer(gl.u_c, da_c, sc.h_prev);
            add_outer(gl.u_o, da_o, sc.h_prev);
            add_vec(gl.b_i, da_i);
            add_vec(gl.b_f, da_f);
            add_vec(gl.b_c, da_c);
            add_vec(gl.b_o, da_o);

            Vec dx = matvec_t(lw.w_i, da_i);
            add_vec(dx, matvec_t(lw.w_f, da_f));
            add_vec(dx, matvec_t(lw.w_c, da_c));
            add_vec(dx, matvec_t(lw.w_o, da_o));
            dx_seq[t] = std::move(dx);

            dh_rec = matvec_t(lw.u_i, da_i);
            add_vec(dh_rec, matvec_t(lw.u_f, da_f));
            add_vec(dh_rec, matvec_t(lw.u_c, da_c));
            add_vec(dh_rec, matvec_t(lw.u_o, da_o));
        }

        if (li > 0) {
            // dx of this layer is dh of the layer below, through the mask if any.
            for (std::size_t t = 0; t < seq_len; ++t) {
                dh_seq[t] = dx_seq[t];
                if (!cache.inter_masks.empty()) {
                    const Mat& mask = cache.inter_masks[li - 1];
                    for (std::size_t j = 0; j < hidden; ++j) {
                        dh_seq[t][j] *= mask(t, j);
                    }
                }
            }
        }
    }
    return {std::move(grads), std::move(dx_seq)};
}

DenseLayer make_dense(std::size_t out_size, std::size_t in_size, std::mt19937_64& rng) {
    require(out_size > 0 && in_size > 0, "make_dense: sizes must be positive");
    return DenseLayer{glorot_uniform(out_size, in_size, rng), Vec(out_size, 0.0)};
}

Vec dense_forward(const Vec& x, const DenseLayer& layer) {
    require(x.size() == layer.weight.cols, "dense_forward: input size mismatch");
    Vec y = matvec(layer.weight, x);
    for (std::size_t r = 0; r < y.size(); ++r) {
        y[r] += layer.bias[r];
    }
    return y;
}

void DenseGrads::add(const DenseGrads& other) {
    add_mat(weight, other.weight);
    add_vec(bias, other.bias);
}

std::pair<DenseGrads, Vec> dense_backward(const Vec& x, const DenseLayer& layer, const Vec& dout) {
    require(x.size() == layer.weight.cols, "dense_backward: input size mismatch");
    require(dout.size() == layer.weight.rows, "dense_backward: dout size mismatch");
    DenseGrads g{Mat(layer.weight.rows, layer.weight.cols), dout};
    add_outer(g.weight, dout, x);
    Vec dx = matvec_t(layer.weight, dout);
    return {std::move(g), std::move(dx)};
}

std::pair<Vec, Vec> dropout(const Vec& x, double rate, bool training, std::mt19937_64& rng) {
    require(rate >= 0.0 && rate < 1.0, "dropout: rate must be in [0, 1)");
    if (!training || rate == 0.0) {
        return {x, Vec(x.size(), 1.0)};
    }
    const double keep_scale = 1.0 / (1.0 - rate);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    Vec y(x.size());
    Vec mask(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        mask[k] = (dist(rng) < rate) ? 0.0 : keep_scale;
        y[k] = x[k] * mask[k];
    }
    return {std::move(y), std::move(mask)};
}

std::pair<double, Vec> bce_with_logits(const Vec& logits, const std::vector<int>& labels) {
    require(!logits.empty(), "bce_with_logits: empty batch");
    require(logits.size() == labels.size(), "bce_with_logits: logits/labels size mismatch");
    const double n = static_cast<double>(logits.size());
    double loss = 0.0;
    Vec dlogits(logits.size());
    for (std::size_t k = 0; k < logits.size(); ++k) {
        const int y = labels[k];
        require(y == 0 || y == 1, "bce_with_logits: labels must be 0 or 1");
        const double z = logits[k];
        loss += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
        dlogits[k] = (sigmoid(z) - y) / n;
    }
    return {loss / n, std::move(dlogits)};
}

AdamState AdamState::init(std::size_t n_params, double lr, double weight_decay) {
    AdamState st;
    st.m.assign(n_params, 0.0);
    st.v.assign(n_params, 0.0);
    st.lr = lr;
    st.weight_decay = weight_decay;
    return st;
}

void adam_step(Vec& params, const Vec& grads, AdamState& st) {
    require(params.size() == grads.size(), "adam_step: params/grads size mismatch");
    require(params.size() == st.m.size() && params.size() == st.v.size(),
            "adam_step: state size mismatch");
    st.t += 1;
    const double bc1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.t));
    const double bc2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.t));
    for (std::size_t k = 0; k < params.size(); ++k) {
        const double g = grads[k] + st.weight_decay * params[k];
        st.m[k] = st.beta1 * st.m[k] + (1.0 - st.beta1) * g;
        st.v[k] = st.beta2 * st.v[k] + (1.0 - st.beta2) * g * g;
        const double m_hat = st.m[k] / bc1;
        const double v_hat = st.v[k] / bc2;
        params[k] -= st.lr * m_hat / (std::sqrt(v_hat) + st.eps);
    }
}

double clip_grad_norm(Vec& grads, double max_norm) {
    require(max_norm > 0.0, "clip_grad_norm: max_norm must be positive");
    double sq = 0.0;
    for (double g : grads) {
        sq += g * g;
    }
    const double norm = std::sqrt(sq);
    if (norm > max_norm) {
        const double scale = max_norm / norm;
        for (double& g : grads) {
            g *= scale;
        }
    }
    return norm;
}

} // namespace qfd::neural
