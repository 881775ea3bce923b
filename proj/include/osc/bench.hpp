#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "osc/activation.hpp"
#include "osc/data/cifar.hpp"
#include "osc/xor_lab.hpp"

namespace osc::bench {

enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,
    kExitData = 3,
    kExitContradiction = 4,
    kExitXorFailed = 5,
};

struct BenchConfig {
    std::vector<ActivationId> activations{all_activations().begin(), all_activations().end()};
    std::vector<int> conv_layers = {1, 2, 3, 4};
    std::size_t epochs = 25;
    std::size_t batch = 64;
    double lr = 1e-4;
    std::optional<std::size_t> subset;       // stratified training subset
    std::optional<std::size_t> test_subset;  // stratified test subset
    std::uint64_t seed = 0;
    std::filesystem::path out_dir = "out";
    bool deterministic = false;

    // Throws ConfigError.
    void validate() const;
};

struct RunRecord {
    std::string activation;
    int conv_layers = 0;
    std::size_t epoch = 0;
    std::optional<double> train_loss;  // empty once a run has diverged
    std::optional<double> test_top1;
    double wall_seconds = 0.0;
    std::string status = "ok";  // "ok" or "diverged"
};

std::string to_json_line(const RunRecord& r);
// Throws ParseError carrying `line` on malformed input.
RunRecord parse_record_line(const std::string& text, std::size_t line);
std::vector<RunRecord> read_records(std::istream& is);

struct SummaryRow {
    std::string activation;
    int conv_layers = 0;
    std::size_t epochs_completed = 0;
    std::optional<double> top1_epoch20;
    std::optional<double> top1_epoch25;
    std::optional<double> final_top1;
    std::optional<double> best_top1;
    std::string status = "ok";
};

// One row per (activation, conv_layers), sorted by catalog order of the
// activation name (unknown names after, alphabetically) then depth; the input
// order of records does not matter.
std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records);
void write_summary_csv(const std::vector<SummaryRow>& rows, std::ostream& os);

// Trains one (activation, depth) cell, appending one record per epoch to
// `sink` as it goes. A diverged epoch is recorded and ends the cell.
std::vector<RunRecord> run_cell(const BenchConfig& cfg, ActivationId id, int conv_layers,
                                const data::ImageDataset& train, const data::ImageDataset& test,
                                std::ostream* sink = nullptr, std::ostream* log = nullptr);

// Applies the configured subsets to a loaded archive.
data::Cifar10 prepare_data(const BenchConfig& cfg, data::Cifar10 full);

// Writes properties.json and properties.csv; returns kExitContradiction when
// any measured property disagrees with its descriptor.
int cmd_properties(const std::filesystem::path& out_dir, std::ostream& log);

struct XorOutcome {
    xorlab::XorCertificate certificate;
    std::string method;  // "trained", "grid" or "none"
};

// Training first, grid search over [-5, 5]^3 at 0.1 as the fallback.
XorOutcome solve_xor(ActivationId id, const xorlab::TrainSpec& spec = {});

// Writes xor_<name>.json and xor_<name>_boundary.csv; kExitXorFailed when
// neither method finds a valid certificate.
int cmd_xor(ActivationId id, const std::filesystem::path& out_dir, std::ostream& log,
            const xorlab::TrainSpec& spec = {});

// Loads the archive from `data_dir`, runs the matrix, writes records.jsonl and
// summary.csv.
int cmd_bench(const BenchConfig& cfg, const std::filesystem::path& data_dir, std::ostream& log);

// Reads a records file and writes accuracy_vs_epoch.csv and
// accuracy_vs_depth.csv (final epoch per depth) in long format.
int cmd_emit_plots(const std::filesystem::path& records, const std::filesystem::path& out_dir, std::ostream& log);

// Round-trip decimal text for a double, as used in every output file.
std::string format_real(double v);

}  // namespace osc::bench
