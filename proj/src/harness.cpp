#include "qfd/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>

#include "qfd/errors.hpp"
#include "qfd/neural.hpp"

namespace qfd::harness {

std::string to_string(ModelKind kind) {
    return kind == ModelKind::hybrid ? "hybrid" : "baseline";
}

ModelKind model_kind_from_string(const std::string& text) {
    if (text == "hybrid") {
        return ModelKind::hybrid;
    }
    if (text == "baseline") {
        return ModelKind::baseline;
    }
    throw std::invalid_argument("unknown model kind '" + text + "' (expected hybrid or baseline)");
}

void TrainConfig::validate() const {
    if (batch_size == 0) {
        throw std::invalid_argument("TrainConfig: batch_size must be positive");
    }
    if (lr <= 0.0 || weight_decay < 0.0 || clip_norm <= 0.0) {
        throw std::invalid_argument("TrainConfig: lr and clip_norm must be positive, "
                                    "weight_decay non-negative");
    }
    if (hidden_size == 0) {
        throw std::invalid_argument("TrainConfig: hidden_size must be positive");
    }
    if (!(dropout >= 0.0 && dropout < 1.0)) {
        throw std::invalid_argument("TrainConfig: dropout must be in [0, 1)");
    }
    if (model_kind == ModelKind::hybrid) {
        vqc::VqcConfig{n_qubits, n_layers}.validate();
    }
}

std::size_t TrainConfig::effective_lstm_layers() const {
    if (lstm_layers > 0) {
        return lstm_layers;
    }
    return model_kind == ModelKind::hybrid ? 1 : 2;
}

std::size_t TrainConfig::effective_threads() const {
    if (threads > 0) {
        return threads;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

ModelKind kind_of(const AnyModel& model) {
    return std::holds_alternative<hybrid::HybridModel>(model) ? ModelKind::hybrid
                                                              : ModelKind::baseline;
}

namespace {

using neural::Vec;

AnyModel build_model(const TrainConfig& cfg, std::size_t input_size, std::mt19937_64& rng) {
    if (cfg.model_kind == ModelKind::hybrid) {
        return hybrid::make_hybrid(input_size, cfg.hidden_size, cfg.effective_lstm_layers(),
                                   vqc::VqcConfig{cfg.n_qubits, cfg.n_layers}, cfg.dropout, rng);
    }
    return hybrid::make_baseline(input_size, cfg.hidden_size, cfg.effective_lstm_layers(),
                                 cfg.dropout, rng);
}

struct BatchResult {
    Vec logits;
    Vec flat_grads;
};

// Forward + BCE + backward for one batch; returns loss and flat gradients.
double batch_step(AnyModel& model, const std::vector<Vec>& batch_x, const std::vector<int>& batch_y,
                  std::mt19937_64& rng, std::size_t threads, Vec& flat_grads) {
    return std::visit(
        [&](auto& m) {
            auto [logits, cache] = [&] {
                if constexpr (std::is_same_v<std::decay_t<decltype(m)>, hybrid::HybridModel>) {
                    return hybrid::hybrid_forward(batch_x, m, /*training=*/true, rng, threads);
                } else {
                    return hybrid::baseline_forward(batch_x, m, /*training=*/true, rng, threads);
                }
            }();
            auto [loss, dlogits] = neural::bce_with_logits(logits, batch_y);
            if constexpr (std::is_same_v<std::decay_t<decltype(m)>, hybrid::HybridModel>) {
                flat_grads = hybrid::flatten_grads(hybrid::hybrid_backward(cache, dlogits, m, threads));
            } else {
                flat_grads =
                    hybrid::flatten_grads(hybrid::baseline_backward(cache, dlogits, m, threads));
            }
            return loss;
        },
        model);
}

} // namespace

std::vector<double> model_logits(const AnyModel& model, const std::vector<std::vector<double>>& x,
                                 std::size_t batch_size, std::size_t threads) {
    std::mt19937_64 unused_rng(0); // eval mode never draws from it
    std::vector<double> logits;
    logits.reserve(x.size());
    for (std::size_t start = 0; start < x.size(); start += batch_size) {
        const std::size_t end = std::min(x.size(), start + batch_size);
        const std::vector<Vec> chunk(x.begin() + static_cast<std::ptrdiff_t>(start),
                                     x.begin() + static_cast<std::ptrdiff_t>(end));
        const Vec part = std::visit(
            [&](const auto& m) {
                if constexpr (std::is_same_v<std::decay_t<decltype(m)>, hybrid::HybridModel>) {
                    return hybrid::hybrid_forward(chunk, m, /*training=*/false, unused_rng, threads)
                        .first;
                } else {
                    return hybrid::baseline_forward(chunk, m, /*training=*/false, unused_rng, threads)
                        .first;
                }
            },
            model);
        logits.insert(logits.end(), part.begin(), part.end());
    }
    return logits;
}

TrainResult train(const TrainConfig& cfg, const dataprep::DatasetSplit& split,
                  const std::optional<std::filesystem::path>& checkpoint_path) {
    cfg.validate();
    if (split.train_x.empty() || split.val_x.empty()) {
        throw std::invalid_argument("train: split has no training or validation rows");
    }
    const std::size_t input_size = split.columns.size();
    const std::size_t threads = cfg.effective_threads();

    std::mt19937_64 rng(cfg.seed);
    AnyModel model = build_model(cfg, input_size, rng);

    Vec flat_params = std::visit([](const auto& m) { return hybrid::flatten_params(m); }, model);
    neural::AdamState adam = neural::AdamState::init(flat_params.size(), cfg.lr, cfg.weight_decay);

    TrainResult result{model, model, std::numeric_limits<double>::infinity(), {}, 0};

    const std::size_t n_train = split.train_x.size();
    std::vector<std::size_t> order(n_train);
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        std::shuffle(order.begin(), order.end(), rng);

        double loss_sum = 0.0;
        for (std::size_t start = 0; start < n_train; start += cfg.batch_size) {
            const std::size_t end = std::min(n_train, start + cfg.batch_size);
            std::vector<Vec> batch_x;
            std::vector<int> batch_y;
            batch_x.reserve(end - start);
            batch_y.reserve(end - start);
            for (std::size_t k = start; k < end; ++k) {
                batch_x.push_back(split.train_x[order[k]]);
                batch_y.push_back(split.train_y[order[k]]);
            }

            Vec flat_grads;
            const double loss = batch_step(model, batch_x, batch_y, rng, threads, flat_grads);
            if (!std::isfinite(loss)) {
                throw numeric_error("train: non-finite loss at epoch " + std::to_string(epoch) +
                                    ", batch " + std::to_string(start / cfg.batch_size));
            }
            loss_sum += loss * static_cast<double>(end - start);

            neural::clip_grad_norm(flat_grads, cfg.clip_norm);
            neural::adam_step(flat_params, flat_grads, adam);
            std::visit([&](auto& m) { hybrid::set_params(m, flat_params); }, model);
            ++result.optimizer_steps;
        }

        const std::vector<double> val_logits =
            model_logits(model, split.val_x, cfg.batch_size, threads);
        const auto [val_loss, val_dlogits] = neural::bce_with_logits(val_logits, split.val_y);
        const std::vector<int> val_pred = hybrid::predict(val_logits);
        std::size_t correct = 0;
        for (std::size_t k = 0; k < val_pred.size(); ++k) {
            correct += (val_pred[k] == split.val_y[k]) ? 1 : 0;
        }
        const double val_acc = static_cast<double>(correct) / static_cast<double>(val_pred.size());

        const auto t1 = std::chrono::steady_clock::now();
        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = loss_sum / static_cast<double>(n_train);
        rec.val_loss = val_loss;
        rec.val_accuracy = val_acc;
        rec.epoch_seconds =
            cfg.record_timing ? std::chrono::duration<double>(t1 - t0).count() : 0.0;
        result.records.push_back(rec);

        if (val_loss < result.best_val_loss) {
            result.best_val_loss = val_loss;
            result.best_model = model;
            if (checkpoint_path) {
                save_checkpoint(model, *checkpoint_path, val_loss);
            }
        }
    }

    result.model = std::move(model);
    return result;
}

MetricsReport evaluate(const AnyModel& model, const std::vector<std::vector<double>>& x,
                       const std::vector<int>& y, double threshold, std::size_t batch_size,
                       std::size_t threads, bool record_timing) {
    if (x.empty() || x.size() != y.size()) {
        throw std::invalid_argument("evaluate: empty or mismatched evaluation set");
    }
    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<double> logits = model_logits(model, x, batch_size, threads);
    const std::vector<int> pred = hybrid::predict(logits, threshold);
    const auto t1 = std::chrono::steady_clock::now();

    ConfusionMatrix cm;
    for (std::size_t k = 0; k < pred.size(); ++k) {
        if (y[k] == 1) {
            (pred[k] == 1 ? cm.tp : cm.fn) += 1;
        } else {
            (pred[k] == 1 ? cm.fp : cm.tn) += 1;
        }
    }
    MetricsReport report = metrics_from_cm(cm);
    report.inference_seconds =
        record_timing ? std::chrono::duration<double>(t1 - t0).count() : 0.0;
    return report;
}

MetricsReport metrics_from_cm(const ConfusionMatrix& cm) {
    if (cm.total() <= 0) {
        throw std::invalid_argument("metrics_from_cm: empty confusion matrix");
    }
    if (cm.tp < 0 || cm.fp < 0 || cm.tn < 0 || cm.fn < 0) {
        throw std::invalid_argument("metrics_from_cm: negative count");
    }
    MetricsReport r;
    r.cm = cm;
    const double total = static_cast<double>(cm.total());
    r.accuracy = static_cast<double>(cm.tp + cm.tn) / total;
    r.precision = (cm.tp + cm.fp) > 0
                      ? static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp)
                      : 0.0;
    r.recall = (cm.tp + cm.fn) > 0
                   ? static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn)
                   : 0.0;
    r.f1 = (r.precision + r.recall) > 0.0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
                                          : 0.0;
    return r;
}

} // namespace qfd::harness
