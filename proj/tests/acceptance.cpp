// Acceptance checks, one PASS/FAIL line per sub-check.
// Usage: osc_acceptance <criterion 1-8 | all> [--cli <path to osc>]
// Exit 0 when every check passes, 1 on any failure, 77 when a criterion
// cannot run here (criterion 7 without OSC_DATA_DIR).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "osc/activation.hpp"
#include "osc/bench.hpp"
#include "osc/data/cifar.hpp"
#include "osc/error.hpp"
#include "osc/nn/model.hpp"
#include "osc/nn/ops.hpp"
#include "osc/nn/optim.hpp"
#include "osc/properties.hpp"
#include "osc/property_report.hpp"
#include "osc/xor_lab.hpp"
#include "temp_dir.hpp"

namespace {

using osc::ActivationId;
namespace fs = std::filesystem;

constexpr int kSkip = 77;

// Tolerances.
constexpr double kXorBound = 5.0;
constexpr double kXorResolution = 0.1;
constexpr double kXorSecondsPerActivation = 120.0;
constexpr double kRangeTol = 0.01;
constexpr double kDerivativeTol = 1e-5;
constexpr std::size_t kDerivativePoints = 1000;
constexpr double kEndToEndTol = 1e-3;
constexpr double kSlopeTol = 1e-9;
constexpr double kLn10Tol = 1e-9;
constexpr double kMemorisedLoss = 0.01;
constexpr double kBenchFloor = 0.35;
constexpr double kSigmoidGap = 0.05;
constexpr double kSignumCeiling = 0.30;

struct Checker {
    std::string criterion;
    int failures = 0;
    int checks = 0;

    void check(bool ok, const std::string& label, const std::string& detail = {}) {
        ++checks;
        if (!ok) ++failures;
        std::cout << (ok ? "PASS " : "FAIL ") << criterion << " " << label;
        if (!detail.empty()) std::cout << " (" << detail << ")";
        std::cout << '\n';
    }
    int finish() const {
        std::cout << (failures == 0 ? "PASS " : "FAIL ") << criterion << " overall: " << checks - failures << "/"
                  << checks << " checks\n";
        return failures == 0 ? 0 : 1;
    }
};

std::string num(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

// Concatenated names and bytes of every regular file under `dir`.
std::string tree_bytes(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = slurp(e.path());
    }
    std::string out;
    for (const auto& [name, bytes] : files) out += name + '\0' + bytes + '\0';
    return out;
}

std::size_t file_count(const fs::path& dir) {
    std::size_t n = 0;
    for (const auto& e : fs::recursive_directory_iterator(dir)) n += e.is_regular_file();
    return n;
}

// --- 1 ---------------------------------------------------------------------

int criterion_xor() {
    Checker c{"C1"};
    const std::vector<ActivationId> capable = {ActivationId::Sine, ActivationId::SQU, ActivationId::NCU,
                                               ActivationId::SSU,  ActivationId::GCU, ActivationId::DSU};
    const std::vector<ActivationId> incapable = {
        ActivationId::Identity, ActivationId::Signum,    ActivationId::Sigmoid, ActivationId::BipolarSigmoid,
        ActivationId::Tanh,     ActivationId::HardTanh,  ActivationId::SoftRootSign, ActivationId::ReLU,
        ActivationId::LeakyReLU, ActivationId::PReLU,    ActivationId::ELU,     ActivationId::SELU,
        ActivationId::GELU,     ActivationId::Swish,     ActivationId::SiLU,    ActivationId::Mish,
        ActivationId::Softplus, ActivationId::LiSHT,     ActivationId::Absolute};
    auto run = [&](ActivationId id, bool expect_valid) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto cert = osc::xorlab::grid_search_certificate(id, kXorBound, kXorResolution);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const auto& n = cert.neuron;
        const std::string detail = std::to_string(cert.correct) + "/4 at w=(" + num(n.w[0]) + ", " + num(n.w[1]) +
                                   "), b=" + num(n.b) + ", " + num(secs) + " s";
        c.check(cert.valid() == expect_valid,
                std::string(osc::name(id)) + (expect_valid ? " has a 4/4 certificate" : " has no 4/4 certificate"),
                detail);
        c.check(secs < kXorSecondsPerActivation, std::string(osc::name(id)) + " search under 2 minutes", num(secs) + " s");
    };
    for (auto id : capable) run(id, true);
    for (auto id : incapable) run(id, false);
    return c.finish();
}

// --- 2 ---------------------------------------------------------------------

int criterion_properties() {
    Checker c{"C2"};
    const auto report = osc::build_property_report();
    for (const auto& row : report.rows) {
        for (const auto& chk : row.checks) {
            c.check(chk.ok, std::string(osc::name(row.id)) + " " + chk.property,
                    "expected " + chk.expected + ", measured " + chk.measured);
        }
    }
    auto range_of = [](ActivationId id) { return osc::range_scan(id, osc::range_interval_for(id)); };

    const auto squ = range_of(ActivationId::SQU);
    c.check(std::abs(squ.min + 0.25) <= kRangeTol, "SQU min = -0.25", "measured " + num(squ.min));

    const auto dsu = range_of(ActivationId::DSU);
    c.check(std::abs(dsu.min + 1.04) <= kRangeTol && std::abs(dsu.max - 1.04) <= kRangeTol,
            "DSU extremes = +-1.04", "measured [" + num(dsu.min) + ", " + num(dsu.max) + "]");

    const auto ssu = range_of(ActivationId::SSU);
    c.check(std::abs(ssu.min + 0.68) <= kRangeTol && std::abs(ssu.max - std::numbers::pi) <= kRangeTol,
            "SSU range = [-0.68, pi]", "measured [" + num(ssu.min) + ", " + num(ssu.max) + "]");
    return c.finish();
}

// --- 3 ---------------------------------------------------------------------

osc::nn::NetworkConfig tiny_config(ActivationId act) {
    osc::nn::NetworkConfig cfg;
    cfg.conv_layers = 1;
    cfg.activation = act;
    cfg.seed = 3;
    cfg.in_channels = 2;
    cfg.height = 4;
    cfg.width = 4;
    cfg.classes = 3;
    cfg.dense_units = 5;
    cfg.dropout_rate = 0.0;
    return cfg;
}

double end_to_end_error(ActivationId act) {
    using namespace osc::nn;
    Model m = build_model(tiny_config(act));
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    Tensor x({3, 2, 4, 4});
    for (double& v : x.data()) v = nd(rng);
    const std::vector<int> y{0, 1, 2};
    auto loss = [&] { return softmax_cross_entropy(m.forward(x, Mode::Eval), y).loss; };

    m.zero_grad();
    const auto r = softmax_cross_entropy(m.forward(x, Mode::Eval), y);
    m.backward(r.grad);

    const double h = 1e-6;
    double worst = 0.0;
    for (Parameter* p : m.parameters()) {
        for (std::size_t i = 0; i < p->value.size(); ++i) {
            const double keep = p->value[i];
            p->value[i] = keep + h;
            const double up = loss();
            p->value[i] = keep - h;
            const double down = loss();
            p->value[i] = keep;
            const double numeric = (up - down) / (2 * h);
            const double scale = std::max(std::abs(numeric), std::abs(p->grad[i]));
            if (scale < 1e-6) continue;  // below finite-difference noise
            worst = std::max(worst, std::abs(numeric - p->grad[i]) / scale);
        }
    }
    return worst;
}

int criterion_gradients() {
    Checker c{"C3"};
    const osc::Interval iv{-6.0, 6.0, 12.0 / static_cast<double>(kDerivativePoints)};
    for (auto id : osc::all_activations()) {
        const auto g = osc::gradient_check(id, iv, kDerivativePoints, kDerivativeTol);
        c.check(g.passed && g.max_relative_error <= kDerivativeTol,
                std::string(osc::name(id)) + " derivative vs central difference",
                "max rel err " + num(g.max_relative_error) + " at z=" + num(g.worst_point) + " over " +
                    std::to_string(g.samples) + " points");
    }
    for (auto id : osc::all_activations()) {
        // Signum and similar flat units give all-zero hidden gradients; the
        // comparison still covers the logits layer.
        const double err = end_to_end_error(id);
        c.check(err <= kEndToEndTol, std::string(osc::name(id)) + " tiny-model parameter gradients",
                "max rel err " + num(err));
    }
    return c.finish();
}

// --- 4 ---------------------------------------------------------------------

bool tabulated_as_z(ActivationId id) {
    const auto& d = osc::descriptor(id);
    for (const auto& e : d.errata) {
        if (e.field == "small_value") return e.table == "z";
    }
    return d.small_value && d.small_value->c0 == 0.0 && d.small_value->c1 == 1.0;
}

int criterion_linear_regime() {
    Checker c{"C4"};
    for (auto id : osc::all_activations()) {
        if (!tabulated_as_z(id)) continue;
        const double g0 = osc::evaluate(id, 0.0);
        const double d0 = osc::derivative(id, 0.0);
        c.check(g0 == 0.0, std::string(osc::name(id)) + " g(0) = 0", "g(0)=" + num(g0));
        c.check(std::abs(d0 - 1.0) <= kSlopeTol, std::string(osc::name(id)) + " g'(0) = 1", "g'(0)=" + num(d0));
    }
    return c.finish();
}

// --- 5 ---------------------------------------------------------------------

int criterion_loss_optimizer() {
    using namespace osc::nn;
    Checker c{"C5"};
    for (double level : {0.0, 7.5, -123.25}) {
        Tensor logits({4, 10});
        for (double& v : logits.data()) v = level;
        const std::vector<int> labels{0, 3, 9, 5};
        const double loss = softmax_cross_entropy(logits, labels).loss;
        c.check(std::abs(loss - std::log(10.0)) <= kLn10Tol, "uniform logits at " + num(level) + " give ln 10",
                "loss " + num(loss));
    }

    {
        std::mt19937_64 rng(4);
        std::normal_distribution<double> nd;
        Tensor w({5, 7}), b({7});
        for (double& v : w.data()) v = nd(rng);
        for (double& v : b.data()) v = nd(rng);
        const Tensor w0 = w, b0 = b;
        const Tensor gw(w.shape()), gb(b.shape());
        Tensor* params[] = {&w, &b};
        const Tensor* grads[] = {&gw, &gb};
        AdamState state;
        adam_step(params, grads, state, 1e-3);
        const auto same = [](const Tensor& x, const Tensor& y) {
            return std::equal(x.data().begin(), x.data().end(), y.data().begin(), y.data().end());
        };
        c.check(same(w, w0) && same(b, b0), "zero-gradient Adam step is a no-op");
    }

    {
        NetworkConfig cfg;  // full-size input, bench architecture
        cfg.conv_layers = 2;
        cfg.activation = ActivationId::ReLU;
        cfg.seed = 1;
        Model m = build_model(cfg);
        Tensor x({1, 3, 32, 32});
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (double& v : x.data()) v = u(rng);
        const TensorDataset one(std::move(x), {7});
        std::size_t reached = 0;
        double loss = 0.0;
        for (std::size_t e = 1; e <= 200; ++e) {
            train_epoch(m, one, TrainOptions{64, 1e-4}, rng);
            loss = evaluate_loss(m, one);
            if (loss < kMemorisedLoss) {
                reached = e;
                break;
            }
        }
        c.check(reached != 0, "single-sample memorisation within 200 epochs",
                reached ? "loss " + num(loss) + " at epoch " + std::to_string(reached) : "loss " + num(loss));
    }
    return c.finish();
}

// --- 6 ---------------------------------------------------------------------

int criterion_data() {
    using namespace osc::data;
    Checker c{"C6"};
    bool exact = true;
    std::mt19937_64 rng(6);
    std::uniform_int_distribution<int> byte(0, 255), label(0, 9);
    for (int k = 0; k < 500 && exact; ++k) {
        RecordBytes r;
        r[0] = static_cast<std::uint8_t>(label(rng));
        for (std::size_t i = 1; i < r.size(); ++i) r[i] = static_cast<std::uint8_t>(byte(rng));
        exact = encode_record(decode_record(r)) == r;
    }
    c.check(exact, "random record round trip is bit-exact");

    {
        TempDir dir("accept_data");
        write_synthetic_archive(dir.path(), 30, 10, 6);
        const auto original = slurp(dir / "test_batch.bin");
        const auto loaded = load_cifar10(dir.path());
        std::string rebuilt;
        for (std::size_t i = 0; i < loaded.test.size(); ++i) {
            const auto r = encode_record(loaded.test.record(i));
            rebuilt.append(r.begin(), r.end());
        }
        c.check(rebuilt == original, "synthetic archive file re-encodes bit-exactly");
        bool uniform = true;
        for (auto n : loaded.train.label_histogram()) uniform &= n == 30;
        c.check(loaded.train.size() == 300 && uniform, "synthetic archive loads with uniform labels");
    }

    const char* env = std::getenv("OSC_DATA_DIR");
    if (env == nullptr || !fs::exists(env)) {
        std::cout << "NOTE C6 real archive not present (OSC_DATA_DIR unset); synthetic checks only\n";
        return c.finish();
    }
    const auto archive = load_cifar10(env);
    c.check(archive.train.size() == 50000, "real train set has 50000 records", std::to_string(archive.train.size()));
    c.check(archive.test.size() == 10000, "real test set has 10000 records", std::to_string(archive.test.size()));
    bool train_uniform = true, test_uniform = true;
    for (auto n : archive.train.label_histogram()) train_uniform &= n == 5000;
    for (auto n : archive.test.label_histogram()) test_uniform &= n == 1000;
    c.check(train_uniform, "real train labels are uniform");
    c.check(test_uniform, "real test labels are uniform");
    return c.finish();
}

// --- 7 ---------------------------------------------------------------------

int criterion_bench() {
    using namespace osc::bench;
    const char* env = std::getenv("OSC_DATA_DIR");
    if (env == nullptr || !fs::exists(env)) {
        std::cout << "UNVERIFIED C7 desk-scale benchmark needs the CIFAR-10 binary archive in OSC_DATA_DIR\n";
        return kSkip;
    }
    Checker c{"C7"};
    BenchConfig cfg;
    cfg.conv_layers = {2};
    cfg.epochs = 10;
    cfg.lr = 1e-4;
    cfg.batch = 64;
    cfg.subset = 5000;
    cfg.test_subset = 1000;
    cfg.seed = 0;
    cfg.deterministic = true;
    const auto data = prepare_data(cfg, osc::data::load_cifar10(env));

    std::map<ActivationId, double> top1;
    for (auto id : {ActivationId::ReLU, ActivationId::SQU, ActivationId::DSU, ActivationId::SSU, ActivationId::GCU,
                    ActivationId::Sigmoid, ActivationId::Signum}) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto records = run_cell(cfg, id, 2, data.train, data.test, nullptr, &std::cout);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const auto& last = records.back();
        top1[id] = last.test_top1.value_or(0.0);
        std::cout << "INFO C7 " << osc::name(id) << " epoch " << last.epoch << " top-1 " << num(top1[id]) << " status "
                  << last.status << " in " << num(secs) << " s\n";
    }
    for (auto id : {ActivationId::ReLU, ActivationId::SQU, ActivationId::DSU, ActivationId::SSU, ActivationId::GCU}) {
        c.check(top1[id] >= kBenchFloor, std::string(osc::name(id)) + " top-1 >= 0.35", num(top1[id]));
    }
    c.check(top1[ActivationId::Sigmoid] <= top1[ActivationId::ReLU] - kSigmoidGap, "Sigmoid at least 0.05 below ReLU",
            num(top1[ActivationId::Sigmoid]) + " vs " + num(top1[ActivationId::ReLU]));
    c.check(top1[ActivationId::Signum] <= kSignumCeiling, "Signum top-1 <= 0.30", num(top1[ActivationId::Signum]));
    return c.finish();
}

// --- 8 ---------------------------------------------------------------------

int criterion_determinism(const std::string& cli) {
    using namespace osc::bench;
    Checker c{"C8"};
    TempDir dir("accept_det");
    osc::data::write_synthetic_archive(dir / "data", 16, 4, 8);
    std::ostringstream log;

    auto twice = [&](const std::string& label, const std::function<int(const fs::path&)>& run) {
        const fs::path a = dir / (label + "_a"), b = dir / (label + "_b");
        fs::create_directories(a);
        fs::create_directories(b);
        const int ra = run(a), rb = run(b);
        const bool same = ra == rb && file_count(a) > 0 && tree_bytes(a) == tree_bytes(b);
        c.check(same, label + " outputs byte-identical across two runs",
                std::to_string(file_count(a)) + " files, exit " + std::to_string(ra) + "/" + std::to_string(rb));
    };

    twice("properties", [&](const fs::path& out) { return cmd_properties(out, log); });
    twice("xor", [&](const fs::path& out) {
        int rc = 0;
        for (auto id : {ActivationId::SSU, ActivationId::DSU, ActivationId::Tanh}) rc |= cmd_xor(id, out, log);
        return rc;
    });
    twice("bench", [&](const fs::path& out) {
        BenchConfig cfg;
        cfg.activations = {ActivationId::ReLU, ActivationId::GCU};
        cfg.conv_layers = {1, 2};
        cfg.epochs = 2;
        cfg.subset = 160;
        cfg.seed = 3;
        cfg.out_dir = out;
        cfg.deterministic = true;
        return cmd_bench(cfg, dir / "data", log);
    });
    twice("emit-plots", [&](const fs::path& out) {
        return cmd_emit_plots(dir / "bench_a" / "records.jsonl", out, log);
    });

    if (cli.empty()) {
        std::cout << "NOTE C8 no --cli path given; command-line runs skipped\n";
        return c.finish();
    }
    auto shell = [&](const std::string& args) {
        const std::string cmd = "\"" + cli + "\" " + args + " > /dev/null 2>&1";
        const int raw = std::system(cmd.c_str());
        return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    };
    twice("cli properties", [&](const fs::path& out) {
        return shell("properties --deterministic --out-dir \"" + out.string() + "\"");
    });
    twice("cli xor", [&](const fs::path& out) {
        return shell("xor SQU Sine --deterministic --out-dir \"" + out.string() + "\"");
    });
    twice("cli bench", [&](const fs::path& out) {
        return shell("bench --deterministic --activations SSU --conv-layers 1 --epochs 2 --subset 160 --seed 4"
                     " --data-dir \"" + (dir / "data").string() + "\" --out-dir \"" + out.string() + "\"");
    });
    twice("cli emit-plots", [&](const fs::path& out) {
        return shell("emit-plots --deterministic --records \"" + (dir / "cli bench_a" / "records.jsonl").string() +
                     "\" --out-dir \"" + out.string() + "\"");
    });
    return c.finish();
}

}  // namespace

int main(int argc, char** argv) {
    std::string which = argc > 1 ? argv[1] : "all";
    std::string cli;
    for (int i = 2; i + 1 < argc; ++i) {
        if (std::string(argv[i]) == "--cli") cli = argv[i + 1];
    }
    const std::map<std::string, std::function<int()>> criteria = {
        {"1", criterion_xor},           {"2", criterion_properties},     {"3", criterion_gradients},
        {"4", criterion_linear_regime}, {"5", criterion_loss_optimizer}, {"6", criterion_data},
        {"7", criterion_bench},         {"8", [&] { return criterion_determinism(cli); }},
    };
    try {
        if (which != "all") {
            const auto it = criteria.find(which);
            if (it == criteria.end()) {
                std::cerr << "unknown criterion " << which << '\n';
                return 2;
            }
            return it->second();
        }
        int worst = 0;
        for (const auto& [key, run] : criteria) {
            const int rc = run();
            if (rc == 1) worst = 1;
        }
        return worst;
    } catch (const std::exception& e) {
        std::cout << "FAIL error: " << e.what() << '\n';
        return 1;
    }
}
