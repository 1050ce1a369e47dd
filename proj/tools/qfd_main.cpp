// qfd: synthetic fraud data, preprocessing, hybrid quantum-classical and
// classical LSTM training, and evaluation, from one binary.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "qfd/dataprep.hpp"
#include "qfd/errors.hpp"
#include "qfd/harness.hpp"

namespace fs = std::filesystem;
using namespace qfd;

namespace {

// Plain key=value config files, applied after parsing so explicit CLI flags
// win. Unknown keys are usage errors.
void apply_config_file(CLI::App* cmd, const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw data_error("cannot open config file " + path);
    }
    const auto trim = [](const std::string& s) {
        const auto first = s.find_first_not_of(" \t\r");
        if (first == std::string::npos) {
            return std::string();
        }
        const auto last = s.find_last_not_of(" \t\r");
        return s.substr(first, last - first + 1);
    };
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string entry = trim(line);
        if (entry.empty() || entry[0] == '#' || entry[0] == ';') {
            continue;
        }
        const auto eq = entry.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument(path + " line " + std::to_string(line_no) +
                                        ": expected key=value");
        }
        const std::string key = trim(entry.substr(0, eq));
        const std::string value = trim(entry.substr(eq + 1));
        CLI::Option* op = cmd->get_option_no_throw("--" + key);
        if (op == nullptr) {
            throw std::invalid_argument(path + " line " + std::to_string(line_no) +
                                        ": unknown config key '" + key + "'");
        }
        if (op->count() == 0) {
            op->add_result(value);
            op->run_callback();
        }
    }
}

struct GenerateArgs {
    std::size_t rows = 10000;
    std::uint64_t seed = 42;
    std::string out = "data.csv";
};

struct PreprocessArgs {
    std::string in;
    std::string out_dir = "splits";
    std::size_t per_class = 5000;
    std::uint64_t seed = 42;
};

struct TrainArgs {
    std::string data = "splits";
    std::string out = "run";
    harness::TrainConfig cfg;
};

struct EvaluateArgs {
    std::string checkpoint;
    std::string data = "splits";
    std::string split = "test";
    std::string out = "report";
    double threshold = 0.5;
    std::size_t threads = 0;
    bool no_timing = false;
};

struct BenchmarkArgs {
    std::string data = "splits";
    std::string out = "bench";
    harness::TrainConfig cfg;
};

void add_model_options(CLI::App* cmd, harness::TrainConfig& cfg, std::string* model_name) {
    if (model_name != nullptr) {
        cmd->add_option("--model", *model_name, "Model kind: hybrid or baseline")
            ->check(CLI::IsMember({"hybrid", "baseline"}));
    }
    cmd->add_option("--epochs", cfg.epochs, "Training epochs");
    cmd->add_option("--batch-size", cfg.batch_size, "Mini-batch size");
    cmd->add_option("--lr", cfg.lr, "Adam learning rate");
    cmd->add_option("--weight-decay", cfg.weight_decay, "Adam weight decay");
    cmd->add_option("--clip-norm", cfg.clip_norm, "Global gradient-norm clip threshold");
    cmd->add_option("--qubits", cfg.n_qubits, "Qubit count for the quantum layer");
    cmd->add_option("--layers", cfg.n_layers, "Entangling layers in the quantum circuit");
    cmd->add_option("--hidden", cfg.hidden_size, "LSTM hidden size");
    cmd->add_option("--lstm-layers", cfg.lstm_layers,
                    "Stacked LSTM depth (0 = model default: 1 hybrid, 2 baseline)");
    cmd->add_option("--dropout", cfg.dropout, "Dropout rate");
    cmd->add_option("--seed", cfg.seed, "RNG seed");
    cmd->add_option("--threads", cfg.threads, "Worker threads (0 = all cores)");
    cmd->add_flag_callback("--no-timing", [&cfg] { cfg.record_timing = false; },
                           "Record timing fields as 0 for byte-reproducible artifacts");
}

const std::vector<std::vector<double>>* pick_x(const dataprep::DatasetSplit& s,
                                               const std::string& name) {
    if (name == "train") return &s.train_x;
    if (name == "validation") return &s.val_x;
    return &s.test_x;
}

const std::vector<int>* pick_y(const dataprep::DatasetSplit& s, const std::string& name) {
    if (name == "train") return &s.train_y;
    if (name == "validation") return &s.val_y;
    return &s.test_y;
}

void print_report(const harness::MetricsReport& r) {
    std::printf("accuracy   %.4f\n", r.accuracy);
    std::printf("precision  %.4f\n", r.precision);
    std::printf("recall     %.4f\n", r.recall);
    std::printf("f1         %.4f\n", r.f1);
    std::printf("confusion  tp=%lld fp=%lld tn=%lld fn=%lld\n", r.cm.tp, r.cm.fp, r.cm.tn,
                r.cm.fn);
    std::printf("inference  %.3f s\n", r.inference_seconds);
}

int run_generate(const GenerateArgs& args) {
    const auto rows = dataprep::generate_synthetic(args.rows, args.seed);
    dataprep::write_raw_csv(args.out, rows);
    std::printf("wrote %zu rows to %s\n", rows.size(), args.out.c_str());
    return 0;
}

int run_preprocess(const PreprocessArgs& args) {
    const auto rows = dataprep::read_raw_csv(args.in);
    const dataprep::DatasetSplit split = dataprep::preprocess(rows, args.per_class, args.seed);
    dataprep::save_split(args.out_dir, split);
    std::printf("splits: train=%zu validation=%zu test=%zu -> %s\n", split.train_y.size(),
                split.val_y.size(), split.test_y.size(), args.out_dir.c_str());
    return 0;
}

int run_train(const TrainArgs& args) {
    const dataprep::DatasetSplit split = dataprep::load_split(args.data);
    fs::create_directories(args.out);
    const fs::path best_path = fs::path(args.out) / "best.ckpt";

    const harness::TrainResult result = harness::train(args.cfg, split, best_path);
    for (const auto& rec : result.records) {
        std::printf("epoch %zu/%zu  train_loss %.4f  val_loss %.4f  val_acc %.4f  %.1fs\n",
                    rec.epoch, args.cfg.epochs, rec.train_loss, rec.val_loss, rec.val_accuracy,
                    rec.epoch_seconds);
    }
    harness::save_checkpoint(result.model, fs::path(args.out) / "final.ckpt",
                             result.records.empty() ? 0.0 : result.records.back().val_loss);

    // Report the best checkpoint on the validation set; the test set stays
    // untouched until `evaluate`.
    const harness::MetricsReport report =
        harness::evaluate(result.best_model, split.val_x, split.val_y, 0.5, args.cfg.batch_size,
                          args.cfg.effective_threads(), args.cfg.record_timing);
    harness::emit_logs(result.records, report, args.out);
    std::printf("best val_loss %.4f, artifacts in %s\n", result.best_val_loss, args.out.c_str());
    return 0;
}

int run_evaluate(const EvaluateArgs& args) {
    const dataprep::DatasetSplit split = dataprep::load_split(args.data);
    const harness::LoadedCheckpoint loaded = harness::load_checkpoint(args.checkpoint);
    const std::size_t threads =
        args.threads > 0 ? args.threads : harness::TrainConfig{}.effective_threads();
    const harness::MetricsReport report =
        harness::evaluate(loaded.model, *pick_x(split, args.split), *pick_y(split, args.split),
                          args.threshold, 32, threads, !args.no_timing);
    fs::create_directories(args.out);
    harness::emit_logs({}, report, args.out);
    std::printf("%s split of %s:\n", args.split.c_str(), args.data.c_str());
    print_report(report);
    return 0;
}

int run_benchmark(const BenchmarkArgs& args) {
    const dataprep::DatasetSplit split = dataprep::load_split(args.data);
    fs::create_directories(args.out);

    struct Entry {
        std::string name;
        harness::MetricsReport report;
        double avg_epoch_seconds = 0.0;
    };
    std::vector<Entry> entries;

    for (const harness::ModelKind kind : {harness::ModelKind::hybrid, harness::ModelKind::baseline}) {
        harness::TrainConfig cfg = args.cfg;
        cfg.model_kind = kind;
        const std::string name = harness::to_string(kind);
        const fs::path sub = fs::path(args.out) / name;
        fs::create_directories(sub);

        std::printf("training %s for %zu epochs...\n", name.c_str(), cfg.epochs);
        const harness::TrainResult result = harness::train(cfg, split, sub / "best.ckpt");
        const harness::MetricsReport report =
            harness::evaluate(result.best_model, split.test_x, split.test_y, 0.5, cfg.batch_size,
                              cfg.effective_threads(), cfg.record_timing);
        harness::emit_logs(result.records, report, sub);

        double avg = 0.0;
        for (const auto& rec : result.records) {
            avg += rec.epoch_seconds;
        }
        if (!result.records.empty()) {
            avg /= static_cast<double>(result.records.size());
        }
        entries.push_back({name, report, avg});
    }

    // side-by-side comparison, metrics as percentages
    std::string table;
    char line[160];
    std::snprintf(line, sizeof line, "%-28s %14s %14s\n", "Metric", "Hybrid", "Baseline");
    table += line;
    const auto add_row = [&](const char* label, double h, double b, const char* fmt) {
        std::snprintf(line, sizeof line, fmt, label, h, b);
        table += line;
    };
    add_row("Accuracy (%)", entries[0].report.accuracy * 100, entries[1].report.accuracy * 100,
            "%-28s %14.2f %14.2f\n");
    add_row("Precision (%)", entries[0].report.precision * 100, entries[1].report.precision * 100,
            "%-28s %14.2f %14.2f\n");
    add_row("Recall (%)", entries[0].report.recall * 100, entries[1].report.recall * 100,
            "%-28s %14.2f %14.2f\n");
    add_row("F1 score (%)", entries[0].report.f1 * 100, entries[1].report.f1 * 100,
            "%-28s %14.2f %14.2f\n");
    add_row("Evaluation time (s)", entries[0].report.inference_seconds,
            entries[1].report.inference_seconds, "%-28s %14.3f %14.3f\n");
    add_row("Avg time per epoch (s)", entries[0].avg_epoch_seconds, entries[1].avg_epoch_seconds,
            "%-28s %14.3f %14.3f\n");

    std::ofstream txt(fs::path(args.out) / "comparison.txt");
    txt << table;
    std::cout << table;

    nlohmann::json j;
    for (const Entry& e : entries) {
        j[e.name] = {{"accuracy", e.report.accuracy},
                     {"precision", e.report.precision},
                     {"recall", e.report.recall},
                     {"f1", e.report.f1},
                     {"evaluation_seconds", e.report.inference_seconds},
                     {"avg_epoch_seconds", e.avg_epoch_seconds}};
    }
    std::ofstream jout(fs::path(args.out) / "comparison.json");
    jout << j.dump(2) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hybrid quantum-classical fraud detection toolkit"};
    app.require_subcommand(1);

    GenerateArgs gen;
    CLI::App* generate = app.add_subcommand("generate", "Write a seeded synthetic transaction CSV");
    generate->add_option("--rows", gen.rows, "Number of rows")->check(CLI::PositiveNumber);
    generate->add_option("--seed", gen.seed, "RNG seed");
    generate->add_option("--out", gen.out, "Output CSV path");
    std::string gen_config;
    generate->add_option("--config", gen_config, "key=value config file");

    PreprocessArgs pre;
    CLI::App* preprocess =
        app.add_subcommand("preprocess", "Engineer features, balance, split and normalize");
    preprocess->add_option("--in", pre.in, "Raw transaction CSV")->required();
    preprocess->add_option("--out-dir", pre.out_dir, "Output split directory");
    preprocess->add_option("--per-class", pre.per_class, "Rows per class after balancing");
    preprocess->add_option("--seed", pre.seed, "RNG seed");
    std::string pre_config;
    preprocess->add_option("--config", pre_config, "key=value config file");

    TrainArgs tr;
    std::string train_model = "hybrid";
    CLI::App* train = app.add_subcommand("train", "Train a model on a preprocessed split");
    train->add_option("--data", tr.data, "Split directory from preprocess");
    train->add_option("--out", tr.out, "Run output directory");
    add_model_options(train, tr.cfg, &train_model);
    std::string train_config;
    train->add_option("--config", train_config, "key=value config file");

    EvaluateArgs ev;
    CLI::App* evaluate = app.add_subcommand("evaluate", "Evaluate a checkpoint on a split");
    evaluate->add_option("--checkpoint", ev.checkpoint, "Checkpoint file")->required();
    evaluate->add_option("--data", ev.data, "Split directory");
    evaluate->add_option("--split", ev.split, "Which split to score")
        ->check(CLI::IsMember({"train", "validation", "test"}));
    evaluate->add_option("--out", ev.out, "Report output directory");
    evaluate->add_option("--threshold", ev.threshold, "Probability decision threshold");
    evaluate->add_option("--threads", ev.threads, "Worker threads (0 = all cores)");
    evaluate->add_flag("--no-timing", ev.no_timing, "Record timing fields as 0");
    std::string eval_config;
    evaluate->add_option("--config", eval_config, "key=value config file");

    BenchmarkArgs bench;
    CLI::App* benchmark =
        app.add_subcommand("benchmark", "Train hybrid and baseline, compare on the test split");
    benchmark->add_option("--data", bench.data, "Split directory");
    benchmark->add_option("--out", bench.out, "Benchmark output directory");
    add_model_options(benchmark, bench.cfg, nullptr);
    std::string bench_config;
    benchmark->add_option("--config", bench_config, "key=value config file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }

    try {
        if (generate->parsed()) {
            if (!gen_config.empty()) apply_config_file(generate, gen_config);
            return run_generate(gen);
        }
        if (preprocess->parsed()) {
            if (!pre_config.empty()) apply_config_file(preprocess, pre_config);
            return run_preprocess(pre);
        }
        if (train->parsed()) {
            if (!train_config.empty()) apply_config_file(train, train_config);
            tr.cfg.model_kind = harness::model_kind_from_string(train_model);
            tr.cfg.validate();
            return run_train(tr);
        }
        if (evaluate->parsed()) {
            if (!eval_config.empty()) apply_config_file(evaluate, eval_config);
            if (!(ev.threshold > 0.0 && ev.threshold < 1.0)) {
                throw std::invalid_argument("--threshold must lie in (0, 1)");
            }
            return run_evaluate(ev);
        }
        if (benchmark->parsed()) {
            if (!bench_config.empty()) apply_config_file(benchmark, bench_config);
            bench.cfg.validate();
            return run_benchmark(bench);
        }
    } catch (const numeric_error& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const data_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
