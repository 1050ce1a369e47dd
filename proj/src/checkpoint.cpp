#include <fstream>

#include <json.hpp>

#include "qfd/errors.hpp"
#include "qfd/harness.hpp"

namespace qfd::harness {

namespace {

using nlohmann::json;
using neural::Mat;
using neural::Vec;

constexpr int kCheckpointFormatVersion = 1;

json mat_to_json(const Mat& m) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows; ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < m.cols; ++c) {
            row.push_back(m(r, c));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Mat mat_from_json(const json& j, std::size_t rows, std::size_t cols, const std::string& name) {
    if (!j.is_array() || j.size() != rows) {
        throw checkpoint_shape_error("checkpoint: tensor '" + name + "' expected " +
                                     std::to_string(rows) + " rows");
    }
    Mat m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        const json& row = j[r];
        if (!row.is_array() || row.size() != cols) {
            throw checkpoint_shape_error("checkpoint: tensor '" + name + "' expected " +
                                         std::to_string(cols) + " columns");
        }
        for (std::size_t c = 0; c < cols; ++c) {
            m(r, c) = row[c].get<double>();
        }
    }
    return m;
}

Vec vec_from_json(const json& j, std::size_t size, const std::string& name) {
    if (!j.is_array() || j.size() != size) {
        throw checkpoint_shape_error("checkpoint: tensor '" + name + "' expected length " +
                                     std::to_string(size));
    }
    Vec v(size);
    for (std::size_t k = 0; k < size; ++k) {
        v[k] = j[k].get<double>();
    }
    return v;
}

json lstm_to_json(const neural::LstmWeights& w) {
    json layers = json::array();
    for (const neural::LstmLayerWeights& l : w.layers) {
        json layer;
        layer["w_i"] = mat_to_json(l.w_i);
        layer["w_f"] = mat_to_json(l.w_f);
        layer["w_c"] = mat_to_json(l.w_c);
        layer["w_o"] = mat_to_json(l.w_o);
        layer["u_i"] = mat_to_json(l.u_i);
        layer["u_f"] = mat_to_json(l.u_f);
        layer["u_c"] = mat_to_json(l.u_c);
        layer["u_o"] = mat_to_json(l.u_o);
        layer["b_i"] = l.b_i;
        layer["b_f"] = l.b_f;
        layer["b_c"] = l.b_c;
        layer["b_o"] = l.b_o;
        layers.push_back(std::move(layer));
    }
    return layers;
}

neural::LstmWeights lstm_from_json(const json& j, std::size_t input_size, std::size_t hidden,
                                   std::size_t n_layers) {
    if (!j.is_array() || j.size() != n_layers) {
        throw checkpoint_shape_error("checkpoint: expected " + std::to_string(n_layers) +
                                     " lstm layers");
    }
    neural::LstmWeights w;
    w.layers.resize(n_layers);
    for (std::size_t l = 0; l < n_layers; ++l) {
        const std::size_t in = (l == 0) ? input_size : hidden;
        const json& layer = j[l];
        const std::string tag = "lstm[" + std::to_string(l) + "].";
        w.layers[l].w_i = mat_from_json(layer.at("w_i"), hidden, in, tag + "w_i");
        w.layers[l].w_f = mat_from_json(layer.at("w_f"), hidden, in, tag + "w_f");
        w.layers[l].w_c = mat_from_json(layer.at("w_c"), hidden, in, tag + "w_c");
        w.layers[l].w_o = mat_from_json(layer.at("w_o"), hidden, in, tag + "w_o");
        w.layers[l].u_i = mat_from_json(layer.at("u_i"), hidden, hidden, tag + "u_i");
        w.layers[l].u_f = mat_from_json(layer.at("u_f"), hidden, hidden, tag + "u_f");
        w.layers[l].u_c = mat_from_json(layer.at("u_c"), hidden, hidden, tag + "u_c");
        w.layers[l].u_o = mat_from_json(layer.at("u_o"), hidden, hidden, tag + "u_o");
        w.layers[l].b_i = vec_from_json(layer.at("b_i"), hidden, tag + "b_i");
        w.layers[l].b_f = vec_from_json(layer.at("b_f"), hidden, tag + "b_f");
        w.layers[l].b_c = vec_from_json(layer.at("b_c"), hidden, tag + "b_c");
        w.layers[l].b_o = vec_from_json(layer.at("b_o"), hidden, tag + "b_o");
    }
    return w;
}

json dense_to_json(const neural::DenseLayer& d) {
    return json{{"weight", mat_to_json(d.weight)}, {"bias", d.bias}};
}

neural::DenseLayer dense_from_json(const json& j, std::size_t out, std::size_t in,
                                   const std::string& name) {
    neural::DenseLayer d;
    d.weight = mat_from_json(j.at("weight"), out, in, name + ".weight");
    d.bias = vec_from_json(j.at("bias"), out, name + ".bias");
    return d;
}

} // namespace

void save_checkpoint(const AnyModel& model, const std::filesystem::path& path, double val_loss) {
    json j;
    j["format_version"] = kCheckpointFormatVersion;
    j["model_kind"] = to_string(kind_of(model));
    j["val_loss"] = val_loss;

    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            json config;
            config["input_size"] = m.lstm.input_size();
            config["hidden_size"] = m.lstm.hidden_size();
            config["lstm_layers"] = m.lstm.n_layers();
            config["dropout"] = m.dropout_rate;
            json params;
            params["lstm"] = lstm_to_json(m.lstm);
            if constexpr (std::is_same_v<T, hybrid::HybridModel>) {
                config["n_qubits"] = m.vqc_cfg.n_qubits;
                config["vqc_layers"] = m.vqc_cfg.n_layers;
                params["reducer"] = dense_to_json(m.reducer);
                params["vqc"] = m.vqc_params.angles;
            }
            params["head"] = dense_to_json(m.head);
            j["config"] = std::move(config);
            j["params"] = std::move(params);
        },
        model);

    std::ofstream out(path);
    if (!out) {
        throw data_error("cannot open " + path.string() + " for writing");
    }
    out << j.dump(1) << "\n";
    if (!out) {
        throw data_error("write failed for " + path.string());
    }
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw data_error("cannot open " + path.string() + " for reading");
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw checkpoint_parse_error("checkpoint " + path.string() + ": " + e.what());
    }

    try {
        if (!j.contains("format_version") || !j["format_version"].is_number_integer()) {
            throw checkpoint_version_error("checkpoint " + path.string() +
                                           ": missing format_version");
        }
        if (j["format_version"].get<int>() != kCheckpointFormatVersion) {
            throw checkpoint_version_error("checkpoint " + path.string() +
                                           ": unsupported format_version " +
                                           std::to_string(j["format_version"].get<int>()));
        }
        const ModelKind kind = model_kind_from_string(j.at("model_kind").get<std::string>());
        const json& config = j.at("config");
        const json& params = j.at("params");
        const auto input_size = config.at("input_size").get<std::size_t>();
        const auto hidden = config.at("hidden_size").get<std::size_t>();
        const auto lstm_layers = config.at("lstm_layers").get<std::size_t>();
        const auto dropout = config.at("dropout").get<double>();

        LoadedCheckpoint loaded;
        loaded.val_loss = j.value("val_loss", 0.0);
        if (kind == ModelKind::hybrid) {
            hybrid::HybridModel m;
            m.vqc_cfg.n_qubits = config.at("n_qubits").get<std::size_t>();
            m.vqc_cfg.n_layers = config.at("vqc_layers").get<std::size_t>();
            m.vqc_cfg.validate();
            m.lstm = lstm_from_json(params.at("lstm"), input_size, hidden, lstm_layers);
            m.reducer = dense_from_json(params.at("reducer"), m.vqc_cfg.n_qubits, hidden, "reducer");
            m.vqc_params.angles =
                vec_from_json(params.at("vqc"), vqc::VqcParams::size_for(m.vqc_cfg), "vqc");
            m.head = dense_from_json(params.at("head"), 1, m.vqc_cfg.n_qubits, "head");
            m.dropout_rate = dropout;
            loaded.model = std::move(m);
        } else {
            hybrid::BaselineModel m;
            m.lstm = lstm_from_json(params.at("lstm"), input_size, hidden, lstm_layers);
            m.head = dense_from_json(params.at("head"), 1, hidden, "head");
            m.dropout_rate = dropout;
            loaded.model = std::move(m);
        }
        return loaded;
    } catch (const json::exception& e) {
        throw checkpoint_parse_error("checkpoint " + path.string() + ": " + e.what());
    }
}

hybrid::HybridModel load_hybrid_checkpoint(const std::filesystem::path& path) {
    LoadedCheckpoint loaded = load_checkpoint(path);
    if (kind_of(loaded.model) != ModelKind::hybrid) {
        throw checkpoint_kind_error("checkpoint " + path.string() +
                                    ": model_kind is baseline, expected hybrid");
    }
    return std::get<hybrid::HybridModel>(std::move(loaded.model));
}

hybrid::BaselineModel load_baseline_checkpoint(const std::filesystem::path& path) {
    LoadedCheckpoint loaded = load_checkpoint(path);
    if (kind_of(loaded.model) != ModelKind::baseline) {
        throw checkpoint_kind_error("checkpoint " + path.string() +
                                    ": model_kind is hybrid, expected baseline");
    }
    return std::get<hybrid::BaselineModel>(std::move(loaded.model));
}

} // namespace qfd::harness
