#include "qfd/hybrid.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace qfd::hybrid {

namespace {

// Runs fn(i) for i in [0, n) across up to n_threads workers. Callers write
// results into per-index slots, so the output is identical for any thread
// count. The first worker exception is rethrown on the calling thread.
void parallel_for(std::size_t n, std::size_t n_threads, const std::function<void(std::size_t)>& fn) {
    if (n == 0) {
        return;
    }
    if (n_threads <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    const std::size_t workers = std::min(n_threads, n);
    std::exception_ptr error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t i = w; i < n; i += workers) {
                        fn(i);
                    }
                } catch (...) {
                    const std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) {
                        error = std::current_exception();
                    }
                }
            });
        }
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

std::vector<neural::Mat> single_step_mask(const Vec& mask) {
    neural::Mat m(1, mask.size());
    m.data = mask;
    return {m};
}

} // namespace

HybridModel make_hybrid(std::size_t input_size, std::size_t hidden_size, std::size_t lstm_layers,
                        const vqc::VqcConfig& cfg, double dropout_rate, std::mt19937_64& rng) {
    cfg.validate();
    HybridModel m;
    m.lstm = neural::make_lstm(input_size, hidden_size, lstm_layers, rng);
    m.reducer = neural::make_dense(cfg.n_qubits, hidden_size, rng);
    m.vqc_params = vqc::VqcParams::random_init(cfg, rng);
    m.vqc_cfg = cfg;
    m.head = neural::make_dense(1, cfg.n_qubits, rng);
    m.dropout_rate = dropout_rate;
    return m;
}

BaselineModel make_baseline(std::size_t input_size, std::size_t hidden_size,
                            std::size_t lstm_layers, double dropout_rate, std::mt19937_64& rng) {
    BaselineModel m;
    m.lstm = neural::make_lstm(input_size, hidden_size, lstm_layers, rng);
    m.head = neural::make_dense(1, hidden_size, rng);
    m.dropout_rate = dropout_rate;
    return m;
}

std::pair<Vec, HybridCache> hybrid_forward(const std::vector<Vec>& batch, const HybridModel& model,
                                           bool training, std::mt19937_64& rng,
                                           std::size_t n_threads) {
    const std::size_t input_size = model.lstm.input_size();
    for (const Vec& row : batch) {
        if (row.size() != input_size) {
            throw std::invalid_argument("hybrid_forward: feature width mismatch");
        }
    }
    const std::size_t hidden = model.lstm.hidden_size();
    const neural::LstmState s0 = neural::LstmState::zero(hidden);

    // Masks come out of rng sequentially before any fan-out.
    std::vector<Vec> h_masks(batch.size());
    for (std::size_t b = 0; b < batch.size(); ++b) {
        Vec ones(hidden, 1.0);
        auto [_, mask] = neural::dropout(ones, model.dropout_rate, training, rng);
        h_masks[b] = std::move(mask);
    }

    Vec logits(batch.size());
    HybridCache cache;
    cache.samples.resize(batch.size());
    cache.input_size = input_size;

    parallel_for(batch.size(), n_threads, [&](std::size_t b) {
        HybridSampleCache& sc = cache.samples[b];
        auto [h_T, lstm_cache] = neural::lstm_forward({batch[b]}, model.lstm, s0);
        sc.lstm = std::move(lstm_cache);
        sc.h_T = std::move(h_T);
        sc.h_mask = h_masks[b];
        sc.h_dropped.resize(hidden);
        for (std::size_t j = 0; j < hidden; ++j) {
            sc.h_dropped[j] = sc.h_T[j] * sc.h_mask[j];
        }
        sc.angles = neural::dense_forward(sc.h_dropped, model.reducer);
        sc.q = vqc::vqc_forward(sc.angles, model.vqc_params, model.vqc_cfg);
        const Vec out = neural::dense_forward(sc.q, model.head);
        logits[b] = out[0];
    });

    return {std::move(logits), std::move(cache)};
}

HybridGrads hybrid_backward(const HybridCache& cache, const Vec& dlogits, const HybridModel& model,
                            std::size_t n_threads) {
    if (cache.samples.size() != dlogits.size()) {
        throw std::logic_error("hybrid_backward: cache/dlogits size mismatch");
    }
    if (cache.input_size != model.lstm.input_size()) {
        throw std::logic_error("hybrid_backward: cache does not match the model");
    }

    struct SampleGrads {
        neural::LstmGrads lstm;
        neural::DenseGrads reducer;
        std::vector<double> vqc;
        neural::DenseGrads head;
    };
    std::vector<SampleGrads> per_sample(cache.samples.size());

    parallel_for(cache.samples.size(), n_threads, [&](std::size_t b) {
        const HybridSampleCache& sc = cache.samples[b];
        SampleGrads& sg = per_sample[b];
        const Vec dlogit{dlogits[b]};

        auto [head_grads, dq] = neural::dense_backward(sc.q, model.head, dlogit);
        sg.head = std::move(head_grads);

        vqc::VqcGrads vqc_grads = vqc::vqc_backward(sc.angles, model.vqc_params, model.vqc_cfg, dq);
        sg.vqc = std::move(vqc_grads.params);

        auto [reducer_grads, dh_dropped] =
            neural::dense_backward(sc.h_dropped, model.reducer, vqc_grads.x);
        sg.reducer = std::move(reducer_grads);

        Vec dh_T(dh_dropped.size());
        for (std::size_t j = 0; j < dh_T.size(); ++j) {
            dh_T[j] = dh_dropped[j] * sc.h_mask[j];
        }
        auto [lstm_grads, dx] = neural::lstm_backward(sc.lstm, model.lstm, dh_T);
        sg.lstm = std::move(lstm_grads);
    });

    // Ordered reduction keeps the result bit-identical across thread counts.
    HybridGrads total;
    total.lstm = neural::zero_lstm_grads(model.lstm);
    total.reducer = neural::DenseGrads{neural::Mat(model.reducer.weight.rows, model.reducer.weight.cols),
                                       Vec(model.reducer.bias.size(), 0.0)};
    total.vqc.assign(model.vqc_params.angles.size(), 0.0);
    total.head = neural::DenseGrads{neural::Mat(model.head.weight.rows, model.head.weight.cols),
                                    Vec(model.head.bias.size(), 0.0)};
    for (const SampleGrads& sg : per_sample) {
        total.lstm.add(sg.lstm);
        total.reducer.add(sg.reducer);
        for (std::size_t k = 0; k < total.vqc.size(); ++k) {
            total.vqc[k] += sg.vqc[k];
        }
        total.head.add(sg.head);
    }
    return total;
}

std::pair<Vec, BaselineCache> baseline_forward(const std::vector<Vec>& batch,
                                               const BaselineModel& model, bool training,
                                               std::mt19937_64& rng, std::size_t n_threads) {
    const std::size_t input_size = model.lstm.input_size();
    for (const Vec& row : batch) {
        if (row.size() != input_size) {
            throw std::invalid_argument("baseline_forward: feature width mismatch");
        }
    }
    const std::size_t hidden = model.lstm.hidden_size();
    const std::size_t boundaries = model.lstm.n_layers() - 1;
    const neural::LstmState s0 = neural::LstmState::zero(hidden);

    // Inter-layer masks per sample, drawn up front in sample order.
    std::vector<std::vector<neural::Mat>> masks(batch.size());
    for (std::size_t b = 0; b < batch.size(); ++b) {
        for (std::size_t k = 0; k < boundaries; ++k) {
            Vec ones(hidden, 1.0);
            auto [_, mask] = neural::dropout(ones, model.dropout_rate, training, rng);
            auto step = single_step_mask(mask);
            masks[b].push_back(std::move(step[0]));
        }
    }

    Vec logits(batch.size());
    BaselineCache cache;
    cache.samples.resize(batch.size());
    cache.input_size = input_size;

    parallel_for(batch.size(), n_threads, [&](std::size_t b) {
        BaselineSampleCache& sc = cache.samples[b];
        const std::vector<neural::Mat>* mask_ptr = boundaries > 0 ? &masks[b] : nullptr;
        auto [h_T, lstm_cache] = neural::lstm_forward({batch[b]}, model.lstm, s0, mask_ptr);
        sc.lstm = std::move(lstm_cache);
        sc.h_T = std::move(h_T);
        const Vec out = neural::dense_forward(sc.h_T, model.head);
        logits[b] = out[0];
    });

    return {std::move(logits), std::move(cache)};
}

BaselineGrads baseline_backward(const BaselineCache& cache, const Vec& dlogits,
                                const BaselineModel& model, std::size_t n_threads) {
    if (cache.samples.size() != dlogits.size()) {
        throw std::logic_error("baseline_backward: cache/dlogits size mismatch");
    }
    if (cache.input_size != model.lstm.input_size()) {
        throw std::logic_error("baseline_backward: cache does not match the model");
    }

    struct SampleGrads {
        neural::LstmGrads lstm;
        neural::DenseGrads head;
    };
    std::vector<SampleGrads> per_sample(cache.samples.size());

    parallel_for(cache.samples.size(), n_threads, [&](std::size_t b) {
        const BaselineSampleCache& sc = cache.samples[b];
        SampleGrads& sg = per_sample[b];
        auto [head_grads, dh_T] = neural::dense_backward(sc.h_T, model.head, Vec{dlogits[b]});
        sg.head = std::move(head_grads);
        auto [lstm_grads, dx] = neural::lstm_backward(sc.lstm, model.lstm, dh_T);
        sg.lstm = std::move(lstm_grads);
    });

    BaselineGrads total;
    total.lstm = neural::zero_lstm_grads(model.lstm);
    total.head = neural::DenseGrads{neural::Mat(model.head.weight.rows, model.head.weight.cols),
                                    Vec(model.head.bias.size(), 0.0)};
    for (const SampleGrads& sg : per_sample) {
        total.lstm.add(sg.lstm);
        total.head.add(sg.head);
    }
    return total;
}

std::vector<int> predict(const Vec& logits, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw std::invalid_argument("predict: threshold must lie in (0, 1)");
    }
    // sigma(z) >= t  <=>  z >= log(t / (1 - t))
    const double cut = std::log(threshold / (1.0 - threshold));
    std::vector<int> labels(logits.size());
    for (std::size_t k = 0; k < logits.size(); ++k) {
        labels[k] = logits[k] >= cut ? 1 : 0;
    }
    return labels;
}

std::size_t quantum_param_count(const HybridModel& model) {
    return vqc::VqcParams::size_for(model.vqc_cfg);
}

namespace {

void append_mat(Vec& out, const neural::Mat& m) {
    out.insert(out.end(), m.data.begin(), m.data.end());
}

void append_vec(Vec& out, const Vec& v) {
    out.insert(out.end(), v.begin(), v.end());
}

void read_mat(neural::Mat& m, const Vec& flat, std::size_t& pos) {
    std::memcpy(m.data.data(), flat.data() + pos, m.data.size() * sizeof(double));
    pos += m.data.size();
}

void read_vec(Vec& v, const Vec& flat, std::size_t& pos) {
    std::memcpy(v.data(), flat.data() + pos, v.size() * sizeof(double));
    pos += v.size();
}

void append_lstm(Vec& out, const std::vector<neural::LstmLayerWeights>& layers) {
    for (const neural::LstmLayerWeights& l : layers) {
        append_mat(out, l.w_i);
        append_mat(out, l.w_f);
        append_mat(out, l.w_c);
        append_mat(out, l.w_o);
        append_mat(out, l.u_i);
        append_mat(out, l.u_f);
        append_mat(out, l.u_c);
        append_mat(out, l.u_o);
        append_vec(out, l.b_i);
        append_vec(out, l.b_f);
        append_vec(out, l.b_c);
        append_vec(out, l.b_o);
    }
}

void read_lstm(std::vector<neural::LstmLayerWeights>& layers, const Vec& flat, std::size_t& pos) {
    for (neural::LstmLayerWeights& l : layers) {
        read_mat(l.w_i, flat, pos);
        read_mat(l.w_f, flat, pos);
        read_mat(l.w_c, flat, pos);
        read_mat(l.w_o, flat, pos);
        read_mat(l.u_i, flat, pos);
        read_mat(l.u_f, flat, pos);
        read_mat(l.u_c, flat, pos);
        read_mat(l.u_o, flat, pos);
        read_vec(l.b_i, flat, pos);
        read_vec(l.b_f, flat, pos);
        read_vec(l.b_c, flat, pos);
        read_vec(l.b_o, flat, pos);
    }
}

std::size_t lstm_param_count(const neural::LstmWeights& w) {
    std::size_t n = 0;
    for (const neural::LstmLayerWeights& l : w.layers) {
        n += l.w_i.size() * 4 + l.u_i.size() * 4 + l.b_i.size() * 4;
    }
    return n;
}

} // namespace

std::size_t param_count(const HybridModel& model) {
    return lstm_param_count(model.lstm) + model.reducer.weight.size() + model.reducer.bias.size() +
           model.vqc_params.angles.size() + model.head.weight.size() + model.head.bias.size();
}

std::size_t param_count(const BaselineModel& model) {
    return lstm_param_count(model.lstm) + model.head.weight.size() + model.head.bias.size();
}

Vec flatten_params(const HybridModel& model) {
    Vec out;
    out.reserve(param_count(model));
    append_lstm(out, model.lstm.layers);
    append_mat(out, model.reducer.weight);
    append_vec(out, model.reducer.bias);
    append_vec(out, model.vqc_params.angles);
    append_mat(out, model.head.weight);
    append_vec(out, model.head.bias);
    return out;
}

Vec flatten_params(const BaselineModel& model) {
    Vec out;
    out.reserve(param_count(model));
    append_lstm(out, model.lstm.layers);
    append_mat(out, model.head.weight);
    append_vec(out, model.head.bias);
    return out;
}

void set_params(HybridModel& model, const Vec& flat) {
    if (flat.size() != param_count(model)) {
        throw std::invalid_argument("set_params: flat vector size mismatch");
    }
    std::size_t pos = 0;
    read_lstm(model.lstm.layers, flat, pos);
    read_mat(model.reducer.weight, flat, pos);
    read_vec(model.reducer.bias, flat, pos);
    read_vec(model.vqc_params.angles, flat, pos);
    read_mat(model.head.weight, flat, pos);
    read_vec(model.head.bias, flat, pos);
}

void set_params(BaselineModel& model, const Vec& flat) {
    if (flat.size() != param_count(model)) {
        throw std::invalid_argument("set_params: flat vector size mismatch");
    }
    std::size_t pos = 0;
    read_lstm(model.lstm.layers, flat, pos);
    read_mat(model.head.weight, flat, pos);
    read_vec(model.head.bias, flat, pos);
}

Vec flatten_grads(const HybridGrads& grads) {
    Vec out;
    append_lstm(out, grads.lstm.layers);
    append_mat(out, grads.reducer.weight);
    append_vec(out, grads.reducer.bias);
    append_vec(out, grads.vqc);
    append_mat(out, grads.head.weight);
    append_vec(out, grads.head.bias);
    return out;
}

Vec flatten_grads(const BaselineGrads& grads) {
    Vec out;
    append_lstm(out, grads.lstm.layers);
    append_mat(out, grads.head.weight);
    append_vec(out, grads.head.bias);
    return out;
}

} // namespace qfd::hybrid
