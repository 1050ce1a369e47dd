// Acceptance suite: each criterion below runs at its pinned tolerance and
// prints exactly one [PASS]/[FAIL] line. The process exits non-zero when any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qfd/dataprep.hpp"
#include "qfd/harness.hpp"
#include "qfd/hybrid.hpp"
#include "qfd/neural.hpp"
#include "qfd/qsim.hpp"
#include "qfd/vqc.hpp"

namespace fs = std::filesystem;
using namespace qfd;

namespace {

constexpr double kPi = std::numbers::pi;

std::string g_detail;

void notef(const char* fmt, ...) {
    char buf[512];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, args);
    va_end(args);
    g_detail = buf;
}

fs::path fresh_dir(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    const auto dir = fs::temp_directory_path() / ("qfd_acc_" + tag + "_" + std::to_string(rng()));
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------------------
// C1: metric arithmetic from the reference confusion counts
// ---------------------------------------------------------------------------
bool criterion_metric_arithmetic() {
    const harness::MetricsReport r = harness::metrics_from_cm({725, 45, 705, 25});
    const struct {
        const char* name;
        double got, want;
    } checks[] = {{"accuracy", r.accuracy, 0.9533},
                  {"precision", r.precision, 0.9416},
                  {"recall", r.recall, 0.9667},
                  {"f1", r.f1, 0.9539}};
    for (const auto& c : checks) {
        if (std::abs(c.got - c.want) > 1e-4) { // 0.01 percentage points
            notef("%s = %.6f, expected %.4f +/- 0.0001", c.name, c.got, c.want);
            return false;
        }
    }
    notef("accuracy %.4f precision %.4f recall %.4f f1 %.4f", r.accuracy, r.precision, r.recall,
          r.f1);
    return true;
}

// ---------------------------------------------------------------------------
// C2: parameter-shift gradients vs central finite differences, >= 100 circuits
// ---------------------------------------------------------------------------
bool criterion_parameter_shift() {
    std::mt19937_64 rng(82);
    std::uniform_real_distribution<double> angle(-kPi, kPi);
    std::uniform_real_distribution<double> up(-1.0, 1.0);
    const double h = 1e-4;
    const double tol = 1e-6;

    std::size_t circuits = 0;
    double worst = 0.0;
    for (const std::size_t n : {1, 2, 3, 4, 6}) {
        for (const std::size_t L : {1, 2, 3}) {
            const vqc::VqcConfig cfg{n, L};
            for (int rep = 0; rep < 7; ++rep) {
                vqc::VqcParams params = vqc::VqcParams::zeros(cfg);
                for (double& a : params.angles) {
                    a = angle(rng);
                }
                vqc::FeatureAngles x(n);
                for (double& v : x) {
                    v = angle(rng);
                }
                std::vector<double> upstream(n);
                for (double& u : upstream) {
                    u = up(rng);
                }

                const auto loss = [&](const vqc::FeatureAngles& xs, const vqc::VqcParams& ps) {
                    const vqc::MeasurementVector q = vqc::vqc_forward(xs, ps, cfg);
                    double acc = 0.0;
                    for (std::size_t i = 0; i < q.size(); ++i) {
                        acc += upstream[i] * q[i];
                    }
                    return acc;
                };

                const vqc::VqcGrads grads = vqc::vqc_backward(x, params, cfg, upstream);
                for (std::size_t j = 0; j < params.angles.size(); ++j) {
                    vqc::VqcParams pp = params, pm = params;
                    pp.angles[j] += h;
                    pm.angles[j] -= h;
                    const double fd = (loss(x, pp) - loss(x, pm)) / (2.0 * h);
                    worst = std::max(worst, std::abs(grads.params[j] - fd));
                }
                for (std::size_t i = 0; i < n; ++i) {
                    vqc::FeatureAngles xp = x, xm = x;
                    xp[i] += h;
                    xm[i] -= h;
                    const double fd = (loss(xp, params) - loss(xm, params)) / (2.0 * h);
                    worst = std::max(worst, std::abs(grads.x[i] - fd));
                }
                ++circuits;
            }
        }
    }
    notef("%zu circuits, worst |shift - fd| = %.3g (tol %.0e)", circuits, worst, tol);
    return circuits >= 100 && worst <= tol;
}

// ---------------------------------------------------------------------------
// C3: end-to-end hybrid gradient check on the tiny model
// ---------------------------------------------------------------------------
bool criterion_hybrid_gradient() {
    std::mt19937_64 rng(19);
    hybrid::HybridModel model = hybrid::make_hybrid(3, 4, 1, vqc::VqcConfig{2, 1}, 0.0, rng);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<std::vector<double>> batch(4, std::vector<double>(3));
    for (auto& row : batch) {
        for (double& v : row) {
            v = dist(rng);
        }
    }
    const std::vector<int> labels = {1, 0, 0, 1};

    const auto loss_at = [&](const std::vector<double>& flat) {
        hybrid::HybridModel m = model;
        hybrid::set_params(m, flat);
        std::mt19937_64 local(0);
        const auto [logits, cache] = hybrid::hybrid_forward(batch, m, false, local);
        return neural::bce_with_logits(logits, labels).first;
    };

    std::mt19937_64 local(0);
    const auto [logits, cache] = hybrid::hybrid_forward(batch, model, false, local);
    const auto [loss, dlogits] = neural::bce_with_logits(logits, labels);
    const std::vector<double> analytic =
        hybrid::flatten_grads(hybrid::hybrid_backward(cache, dlogits, model));

    std::vector<double> flat = hybrid::flatten_params(model);
    const double h = 1e-4;
    double worst = 0.0;
    for (std::size_t k = 0; k < flat.size(); ++k) {
        const double saved = flat[k];
        flat[k] = saved + h;
        const double up_l = loss_at(flat);
        flat[k] = saved - h;
        const double down_l = loss_at(flat);
        flat[k] = saved;
        const double fd = (up_l - down_l) / (2.0 * h);
        const double rel =
            std::abs(analytic[k] - fd) / std::max({1e-3, std::abs(analytic[k]), std::abs(fd)});
        worst = std::max(worst, rel);
    }
    notef("%zu parameters, worst relative error %.3g (tol 1e-4)", flat.size(), worst);
    return worst <= 1e-4;
}

// ---------------------------------------------------------------------------
// C4: LSTM gradient suite vs finite differences
// ---------------------------------------------------------------------------
bool criterion_lstm_gradients() {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    const double h = 1e-6;
    double worst = 0.0;
    std::size_t checked = 0;

    const struct {
        std::size_t input, hidden, seq;
    } cases[] = {{1, 1, 1}, {2, 3, 1}, {3, 4, 2}, {4, 4, 3}, {4, 2, 3}, {2, 4, 2}};

    for (const auto& tc : cases) {
        neural::LstmWeights w = neural::make_lstm(tc.input, tc.hidden, 1, rng);
        std::vector<neural::Vec> x(tc.seq, neural::Vec(tc.input));
        for (auto& row : x) {
            for (double& v : row) {
                v = dist(rng);
            }
        }
        neural::Vec dh_T(tc.hidden);
        for (double& v : dh_T) {
            v = dist(rng);
        }

        const auto loss = [&]() {
            const auto [h_T, cache] = neural::lstm_forward(x, w, neural::LstmState::zero(tc.hidden));
            double acc = 0.0;
            for (std::size_t j = 0; j < h_T.size(); ++j) {
                acc += dh_T[j] * h_T[j];
            }
            return acc;
        };

        const auto [h_T, cache] = neural::lstm_forward(x, w, neural::LstmState::zero(tc.hidden));
        const auto [grads, dx] = neural::lstm_backward(cache, w, dh_T);

        std::vector<double*> ptrs;
        std::vector<double> analytic;
        auto& gl = const_cast<neural::LstmLayerWeights&>(grads.layers[0]);
        auto& wl = w.layers[0];
        const auto push_mat = [&](neural::Mat& wm, neural::Mat& gm) {
            for (std::size_t k = 0; k < wm.data.size(); ++k) {
                ptrs.push_back(&wm.data[k]);
                analytic.push_back(gm.data[k]);
            }
        };
        const auto push_vec = [&](neural::Vec& wv, neural::Vec& gv) {
            for (std::size_t k = 0; k < wv.size(); ++k) {
                ptrs.push_back(&wv[k]);
                analytic.push_back(gv[k]);
            }
        };
        push_mat(wl.w_i, gl.w_i);
        push_mat(wl.w_f, gl.w_f);
        push_mat(wl.w_c, gl.w_c);
        push_mat(wl.w_o, gl.w_o);
        push_mat(wl.u_i, gl.u_i);
        push_mat(wl.u_f, gl.u_f);
        push_mat(wl.u_c, gl.u_c);
        push_mat(wl.u_o, gl.u_o);
        push_vec(wl.b_i, gl.b_i);
        push_vec(wl.b_f, gl.b_f);
        push_vec(wl.b_c, gl.b_c);
        push_vec(wl.b_o, gl.b_o);

        for (std::size_t k = 0; k < ptrs.size(); ++k) {
            const double saved = *ptrs[k];
            *ptrs[k] = saved + h;
            const double up = loss();
            *ptrs[k] = saved - h;
            const double down = loss();
            *ptrs[k] = saved;
            const double fd = (up - down) / (2.0 * h);
            const double rel =
                std::abs(analytic[k] - fd) / std::max({1e-4, std::abs(analytic[k]), std::abs(fd)});
            worst = std::max(worst, rel);
            ++checked;
        }
        for (std::size_t t = 0; t < tc.seq; ++t) {
            for (std::size_t c = 0; c < tc.input; ++c) {
                const double saved = x[t][c];
                x[t][c] = saved + h;
                const double up = loss();
                x[t][c] = saved - h;
                const double down = loss();
                x[t][c] = saved;
                const double fd = (up - down) / (2.0 * h);
                const double rel =
                    std::abs(dx[t][c] - fd) / std::max({1e-4, std::abs(dx[t][c]), std::abs(fd)});
                worst = std::max(worst, rel);
                ++checked;
            }
        }
    }
    notef("%zu gradients, worst relative error %.3g (tol 1e-5)", checked, worst);
    return worst <= 1e-5;
}

// ---------------------------------------------------------------------------
// C5: desk-scale training on the seeded synthetic set
// ---------------------------------------------------------------------------
bool criterion_desk_scale_training() {
    std::fprintf(stderr, "  [C5] generating 10,000 rows and preprocessing...\n");
    const auto rows = dataprep::generate_synthetic(10000, 7);
    const dataprep::DatasetSplit split = dataprep::preprocess(rows, 5000, 7);

    harness::TrainConfig cfg;
    cfg.model_kind = harness::ModelKind::hybrid;
    cfg.epochs = 30;
    cfg.n_qubits = 4;
    cfg.n_layers = 2;
    cfg.hidden_size = 32;
    cfg.dropout = 0.3;
    cfg.seed = 7;
    cfg.threads = 0; // all cores

    std::fprintf(stderr, "  [C5] training hybrid (4 qubits, 2 layers, %zu epochs)...\n",
                 cfg.epochs);
    const harness::TrainResult hybrid_run = harness::train(cfg, split);
    const harness::MetricsReport hybrid_report = harness::evaluate(
        hybrid_run.best_model, split.test_x, split.test_y, 0.5, 32, cfg.effective_threads(), false);

    cfg.model_kind = harness::ModelKind::baseline;
    std::fprintf(stderr, "  [C5] training baseline (hidden 32, 2 layers, %zu epochs)...\n",
                 cfg.epochs);
    const harness::TrainResult baseline_run = harness::train(cfg, split);
    const harness::MetricsReport baseline_report =
        harness::evaluate(baseline_run.best_model, split.test_x, split.test_y, 0.5, 32,
                          cfg.effective_threads(), false);

    notef("hybrid acc %.4f f1 %.4f, baseline acc %.4f (thresholds 0.90)", hybrid_report.accuracy,
          hybrid_report.f1, baseline_report.accuracy);
    return hybrid_report.accuracy >= 0.90 && hybrid_report.f1 >= 0.90 &&
           baseline_report.accuracy >= 0.90;
}

// ---------------------------------------------------------------------------
// C6: statevector property suite
// ---------------------------------------------------------------------------
bool criterion_statevector_properties() {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> angle(-kPi, kPi);

    // norm preservation across 10^4 random gate applications
    qsim::StateVector st = qsim::init_state(6);
    double worst_norm = 0.0;
    for (int k = 0; k < 10000; ++k) {
        const std::size_t q = rng() % 6;
        switch (rng() % 4) {
            case 0:
                st.apply_ry(q, angle(rng));
                break;
            case 1:
                st.apply_rz(q, angle(rng));
                break;
            case 2:
                st.apply_rot(q, angle(rng), angle(rng), angle(rng));
                break;
            default: {
                const std::size_t t = (q + 1 + rng() % 5) % 6;
                st.apply_cnot(q, t);
                break;
            }
        }
        worst_norm = std::max(worst_norm, std::abs(st.norm_sq() - 1.0));
    }
    if (worst_norm > 1e-12) {
        notef("norm drifted by %.3g after random gates (tol 1e-12)", worst_norm);
        return false;
    }

    // CNOT involution is exact
    for (int rep = 0; rep < 10; ++rep) {
        qsim::StateVector a = qsim::init_state(3);
        a.apply_ry(0, angle(rng)).apply_ry(1, angle(rng)).apply_ry(2, angle(rng));
        const qsim::StateVector before = a;
        a.apply_cnot(0, 2).apply_cnot(0, 2);
        for (std::size_t k = 0; k < a.dim(); ++k) {
            if (a.amplitudes()[k] != before.amplitudes()[k]) {
                notef("CNOT involution not exact at amplitude %zu", k);
                return false;
            }
        }
    }

    // RY additivity within 1e-12
    for (int rep = 0; rep < 25; ++rep) {
        const double a = angle(rng), b = angle(rng);
        qsim::StateVector chained = qsim::init_state(1);
        chained.apply_ry(0, a).apply_ry(0, b);
        qsim::StateVector direct = qsim::init_state(1);
        direct.apply_ry(0, a + b);
        for (std::size_t k = 0; k < 2; ++k) {
            if (std::abs(chained.amplitudes()[k] - direct.amplitudes()[k]) > 1e-12) {
                notef("RY additivity violated for a=%.3f b=%.3f", a, b);
                return false;
            }
        }
    }

    // the analytic two-qubit example
    qsim::StateVector two = qsim::init_state(2);
    two.apply_ry(0, 0.3).apply_ry(1, 0.7).apply_cnot(0, 1);
    const double z1 = two.expect_z(1);
    const double want = std::cos(0.3) * std::cos(0.7);
    if (std::abs(z1 - want) > 1e-12) {
        notef("<Z1> = %.15f, expected cos(0.3)cos(0.7) = %.15f", z1, want);
        return false;
    }

    notef("worst norm drift %.3g, involution exact, additivity and <Z1> within 1e-12", worst_norm);
    return true;
}

// ---------------------------------------------------------------------------
// C7: pipeline determinism through the CLI
// ---------------------------------------------------------------------------
bool criterion_pipeline_determinism() {
    const std::string cli = QFD_CLI_PATH;
    const fs::path dir = fresh_dir("determinism");

    const auto run_pipeline = [&](const fs::path& root) {
        fs::create_directories(root);
        const std::string data = (root / "data.csv").string();
        const std::string splits = (root / "splits").string();
        const std::string runout = (root / "run").string();
        const std::string report = (root / "report").string();
        const std::string cmds[] = {
            cli + " generate --rows 2000 --seed 99 --out " + data,
            cli + " preprocess --in " + data + " --out-dir " + splits + " --per-class 600 --seed 99",
            cli + " train --data " + splits + " --model baseline --epochs 3 --hidden 16 --seed 99"
                  " --no-timing --out " + runout,
            cli + " evaluate --checkpoint " + runout + "/best.ckpt --data " + splits +
                " --split test --no-timing --out " + report,
        };
        for (const std::string& cmd : cmds) {
            const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
            if (WEXITSTATUS(status) != 0) {
                return false;
            }
        }
        return true;
    };

    if (!run_pipeline(dir / "a") || !run_pipeline(dir / "b")) {
        notef("a pipeline stage exited non-zero");
        return false;
    }

    const struct {
        const char* rel;
    } artifacts[] = {{"data.csv"},          {"splits/train.csv"},   {"splits/meta.json"},
                     {"run/epochs.csv"},    {"run/report.json"},    {"run/best.ckpt"},
                     {"report/report.json"}};
    for (const auto& a : artifacts) {
        const std::string lhs = slurp(dir / "a" / a.rel);
        const std::string rhs = slurp(dir / "b" / a.rel);
        if (lhs.empty() || lhs != rhs) {
            notef("artifact %s differs between identically seeded runs", a.rel);
            return false;
        }
    }
    fs::remove_all(dir);
    notef("epoch CSVs, reports, checkpoints and splits byte-identical across runs");
    return true;
}

// ---------------------------------------------------------------------------
// C8: haversine forced values
// ---------------------------------------------------------------------------
bool criterion_haversine() {
    const double zero = dataprep::haversine_km(12.34, 56.78, 12.34, 56.78);
    const double half = dataprep::haversine_km(0, 0, 0, 180);
    const double quarter = dataprep::haversine_km(0, 0, 90, 0);
    const double want_half = kPi * 6371.0;
    const double want_quarter = kPi / 2.0 * 6371.0;
    notef("0 -> %.9f, antipodal -> %.6f (want %.6f), pole -> %.6f (want %.6f)", zero, half,
          want_half, quarter, want_quarter);
    return std::abs(zero) <= 1e-6 && std::abs(half - want_half) <= 1e-6 &&
           std::abs(quarter - want_quarter) <= 1e-6;
}

// ---------------------------------------------------------------------------
// C9: simulator scaling ratio n=12 vs n=10
// ---------------------------------------------------------------------------
bool criterion_scaling() {
    std::mt19937_64 rng(17);

    const auto mean_forward_seconds = [&](std::size_t n) {
        const vqc::VqcConfig cfg{n, 2};
        vqc::VqcParams params = vqc::VqcParams::random_init(cfg, rng);
        vqc::FeatureAngles x(n, 0.37);
        // warmup
        for (int k = 0; k < 10; ++k) {
            vqc::vqc_forward(x, params, cfg);
        }
        const auto t0 = std::chrono::steady_clock::now();
        for (int k = 0; k < 100; ++k) {
            vqc::vqc_forward(x, params, cfg);
        }
        const auto t1 = std::chrono::steady_clock::now();
        return std::chrono::duration<double>(t1 - t0).count() / 100.0;
    };

    // median of three measurements to damp scheduler noise
    std::vector<double> ratios;
    for (int rep = 0; rep < 3; ++rep) {
        const double t10 = mean_forward_seconds(10);
        const double t12 = mean_forward_seconds(12);
        ratios.push_back(t12 / t10);
    }
    std::sort(ratios.begin(), ratios.end());
    const double ratio = ratios[1];
    notef("mean forward time ratio n=12 / n=10 = %.2f (accept [3, 8])", ratio);
    return ratio >= 3.0 && ratio <= 8.0;
}

struct Criterion {
    int id;
    const char* name;
    bool (*run)();
};

} // namespace

int main(int argc, char** argv) {
    int only = 0;
    if (argc == 3 && std::string(argv[1]) == "--only") {
        only = std::atoi(argv[2]);
    }

    const Criterion criteria[] = {
        {1, "metric arithmetic from reference confusion counts", criterion_metric_arithmetic},
        {2, "parameter-shift gradients match finite differences", criterion_parameter_shift},
        {3, "end-to-end hybrid gradient check", criterion_hybrid_gradient},
        {4, "LSTM gradient suite", criterion_lstm_gradients},
        {5, "desk-scale training reaches 90% on synthetic data", criterion_desk_scale_training},
        {6, "statevector property suite", criterion_statevector_properties},
        {7, "pipeline determinism (byte-identical artifacts)", criterion_pipeline_determinism},
        {8, "haversine forced values", criterion_haversine},
        {9, "simulator scaling ratio n=12 vs n=10", criterion_scaling},
    };

    int failures = 0;
    for (const Criterion& c : criteria) {
        if (only != 0 && c.id != only) {
            continue;
        }
        g_detail.clear();
        bool ok = false;
        try {
            ok = c.run();
        } catch (const std::exception& e) {
            notef("exception: %s", e.what());
        }
        std::printf("[%s] C%d: %s%s%s%s\n", ok ? "PASS" : "FAIL", c.id, c.name,
                    g_detail.empty() ? "" : " — ", g_detail.c_str(), "");
        std::fflush(stdout);
        failures += ok ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
