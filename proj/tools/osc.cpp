#include <algorithm>
#include <cctype>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "osc/activation.hpp"
#include "osc/bench.hpp"
#include "osc/error.hpp"

namespace {

using namespace osc;
using namespace osc::bench;

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

ActivationId activation_from(const std::string& text) {
    for (ActivationId id : all_activations()) {
        if (lower(std::string(name(id))) == lower(text)) return id;
    }
    throw ConfigError("unknown activation '" + text + "'");
}

std::vector<ActivationId> activation_list(const std::vector<std::string>& items) {
    std::vector<ActivationId> out;
    for (const auto& item : items) {
        if (lower(item) == "all") {
            out.insert(out.end(), all_activations().begin(), all_activations().end());
        } else {
            out.push_back(activation_from(item));
        }
    }
    return out;
}

int run(int argc, char** argv) {
    CLI::App app{"Oscillatory activation toolkit: property checks, XOR certificates, CIFAR-10 benchmark"};
    app.require_subcommand(1);

    std::string out_dir = "out";
    bool deterministic = false;

    auto* props = app.add_subcommand("properties", "Measure every activation's properties against its descriptor");
    props->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
    props->add_flag("--deterministic", deterministic, "Accepted for symmetry; this command is always deterministic");

    std::vector<std::string> xor_acts;
    std::uint64_t xor_seed = xorlab::TrainSpec{}.seed;
    auto* xr = app.add_subcommand("xor", "Certify that a single neuron solves XOR");
    xr->add_option("activation", xor_acts, "Activation name(s) or 'all'");
    xr->add_option("--activations", xor_acts, "Activation name(s) or 'all'")->delimiter(',');
    xr->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
    xr->add_option("--seed", xor_seed, "Seed for training restarts")->capture_default_str();
    xr->add_flag("--deterministic", deterministic, "Accepted for symmetry; this command is always deterministic");

    BenchConfig cfg;
    std::vector<std::string> bench_acts;
    std::string data_dir;
    std::size_t subset = 0;
    std::size_t test_subset = 0;
    auto* bn = app.add_subcommand("bench", "Train the CNN matrix on CIFAR-10");
    bn->add_option("--data-dir", data_dir, "CIFAR-10 binary directory")->envname("OSC_DATA_DIR");
    bn->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
    bn->add_option("--activations", bench_acts, "Comma-separated activation names or 'all'")->delimiter(',');
    bn->add_option("--conv-layers", cfg.conv_layers, "Comma-separated conv layer counts (1-4)")
        ->delimiter(',')
        ->capture_default_str();
    bn->add_option("--epochs", cfg.epochs, "Epochs per run")->capture_default_str();
    bn->add_option("--batch", cfg.batch, "Batch size")->capture_default_str();
    bn->add_option("--lr", cfg.lr, "Adam learning rate")->capture_default_str();
    bn->add_option("--subset", subset, "Stratified training subset size (multiple of 10)");
    bn->add_option("--test-subset", test_subset, "Stratified test subset size (multiple of 10)");
    bn->add_option("--seed", cfg.seed, "Seed for init, shuffling, dropout and subsets")->capture_default_str();
    bn->add_flag("--deterministic", deterministic, "Write wall_seconds as 0 so outputs are byte-identical");

    std::string records;
    auto* ep = app.add_subcommand("emit-plots", "Write long-format CSV series from a records file");
    ep->add_option("--records", records, "records.jsonl (default: <out-dir>/records.jsonl)");
    ep->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
    ep->add_flag("--deterministic", deterministic, "Accepted for symmetry; this command is always deterministic");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    if (props->parsed()) return cmd_properties(out_dir, std::cerr);

    if (xr->parsed()) {
        if (xor_acts.empty()) throw ConfigError("xor: name at least one activation");
        xorlab::TrainSpec spec;
        spec.seed = xor_seed;
        int status = kExitOk;
        for (ActivationId id : activation_list(xor_acts)) {
            if (cmd_xor(id, out_dir, std::cerr, spec) != kExitOk) status = kExitXorFailed;
        }
        return status;
    }

    if (bn->parsed()) {
        if (data_dir.empty()) throw ConfigError("bench: pass --data-dir or set OSC_DATA_DIR");
        if (!bench_acts.empty()) cfg.activations = activation_list(bench_acts);
        if (subset) cfg.subset = subset;
        if (test_subset) cfg.test_subset = test_subset;
        cfg.out_dir = out_dir;
        cfg.deterministic = deterministic;
        return cmd_bench(cfg, data_dir, std::cerr);
    }

    if (ep->parsed()) {
        const std::string src = records.empty() ? (std::filesystem::path(out_dir) / "records.jsonl").string() : records;
        return cmd_emit_plots(src, out_dir, std::cerr);
    }
    return kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const osc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const osc::ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return kExitData;
    } catch (const osc::FormatError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
