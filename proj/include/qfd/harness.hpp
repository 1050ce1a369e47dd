#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qfd/dataprep.hpp"
#include "qfd/hybrid.hpp"

namespace qfd::harness {

enum class ModelKind { hybrid, baseline };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& text);

struct TrainConfig {
    std::size_t epochs = 80;
    std::size_t batch_size = 32;
    double lr = 1e-3;
    double weight_decay = 1e-4;
    double clip_norm = 5.0;
    std::size_t n_qubits = 10;   // hybrid only
    std::size_t n_layers = 2;    // entangling layers, hybrid only
    std::size_t hidden_size = 32;
    std::size_t lstm_layers = 0; // 0 = model default: 1 for hybrid, 2 for baseline
    double dropout = 0.3;
    std::uint64_t seed = 42;
    ModelKind model_kind = ModelKind::hybrid;
    std::size_t threads = 0;     // 0 = hardware concurrency
    // When false, epoch_seconds and inference_seconds are recorded as 0 so
    // repeated runs produce byte-identical artifacts.
    bool record_timing = true;

    void validate() const;
    std::size_t effective_lstm_layers() const;
    std::size_t effective_threads() const;
};

struct EpochRecord {
    std::size_t epoch = 0; // 1-based
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_accuracy = 0.0;
    double epoch_seconds = 0.0;
};

struct ConfusionMatrix {
    long long tp = 0;
    long long fp = 0;
    long long tn = 0;
    long long fn = 0;

    long long total() const { return tp + fp + tn + fn; }
};

struct MetricsReport {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    ConfusionMatrix cm;
    double inference_seconds = 0.0;
};

using AnyModel = std::variant<hybrid::HybridModel, hybrid::BaselineModel>;

ModelKind kind_of(const AnyModel& model);

// Eval-mode batched forward over a feature matrix.
std::vector<double> model_logits(const AnyModel& model, const std::vector<std::vector<double>>& x,
                                 std::size_t batch_size, std::size_t threads);

struct TrainResult {
    AnyModel model;           // final (last-epoch) parameters
    AnyModel best_model;      // lowest validation loss seen
    double best_val_loss = 0.0;
    std::vector<EpochRecord> records;
    std::size_t optimizer_steps = 0;
};

// Per epoch: seeded shuffle, batches of cfg.batch_size (final partial batch
// kept), forward / BCE loss / backward / clip / Adam, then validation loss and
// accuracy. A checkpoint is written to checkpoint_path whenever validation
// loss improves. No early stopping. Throws numeric_error when a batch loss
// goes non-finite, naming the epoch and batch.
TrainResult train(const TrainConfig& cfg, const dataprep::DatasetSplit& split,
                  const std::optional<std::filesystem::path>& checkpoint_path = std::nullopt);

// Derives accuracy / precision / recall / F1 from the counts. Zero
// denominators yield 0 by convention. Throws on an empty matrix.
MetricsReport metrics_from_cm(const ConfusionMatrix& cm);

// Eval-mode forward (dropout off), threshold at 0.5 probability, fraud = the
// positive class. Wall-clock inference time included unless record_timing is
// false.
MetricsReport evaluate(const AnyModel& model, const std::vector<std::vector<double>>& x,
                       const std::vector<int>& y, double threshold = 0.5,
                       std::size_t batch_size = 32, std::size_t threads = 1,
                       bool record_timing = true);

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

// JSON checkpoint with format version, model kind, architecture config, the
// validation loss it was saved at, and named parameter tensors. Round-trips
// every parameter bit for bit.
void save_checkpoint(const AnyModel& model, const std::filesystem::path& path,
                     double val_loss = 0.0);

struct LoadedCheckpoint {
    AnyModel model;
    double val_loss = 0.0;
};

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);
// Convenience loaders that throw checkpoint_kind_error on a kind mismatch.
hybrid::HybridModel load_hybrid_checkpoint(const std::filesystem::path& path);
hybrid::BaselineModel load_baseline_checkpoint(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Logs
// ---------------------------------------------------------------------------

// Writes <dir>/epochs.csv (epoch,train_loss,val_loss,val_accuracy,
// epoch_seconds at full printed precision) and <dir>/report.json (metrics plus
// confusion matrix). Key order and column order are fixed for diffing.
void emit_logs(const std::vector<EpochRecord>& records, const MetricsReport& report,
               const std::filesystem::path& dir);

std::vector<EpochRecord> read_epoch_csv(const std::filesystem::path& path);

} // namespace qfd::harness
