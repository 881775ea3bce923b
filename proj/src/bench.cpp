#include "osc/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <random>
#include <tuple>

#include <json.hpp>

#include "osc/error.hpp"
#include "osc/nn/model.hpp"
#include "osc/property_report.hpp"

namespace osc::bench {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string format_real(double v) { return nlohmann::json(v).dump(); }

void BenchConfig::validate() const {
    if (activations.empty()) throw ConfigError("bench: no activations selected");
    if (conv_layers.empty()) throw ConfigError("bench: no conv layer counts selected");
    for (int c : conv_layers) {
        if (c < 1 || c > 4) throw ConfigError("bench: conv_layers " + std::to_string(c) + " outside 1..4");
    }
    if (epochs == 0) throw ConfigError("bench: epochs must be positive");
    if (batch == 0) throw ConfigError("bench: batch must be positive");
    if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("bench: lr must be positive and finite");
    if (subset && (*subset == 0 || *subset % 10 != 0)) throw ConfigError("bench: subset must be a positive multiple of 10");
    if (test_subset && (*test_subset == 0 || *test_subset % 10 != 0)) {
        throw ConfigError("bench: test subset must be a positive multiple of 10");
    }
}

std::string to_json_line(const RunRecord& r) {
    ojson j;
    j["activation"] = r.activation;
    j["conv_layers"] = r.conv_layers;
    j["epoch"] = r.epoch;
    j["train_loss"] = r.train_loss ? ojson(*r.train_loss) : ojson(nullptr);
    j["test_top1"] = r.test_top1 ? ojson(*r.test_top1) : ojson(nullptr);
    j["wall_seconds"] = r.wall_seconds;
    j["status"] = r.status;
    return j.dump();
}

namespace {

std::optional<double> optional_real(const nlohmann::json& j, const char* key, std::size_t line) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    if (!j[key].is_number()) throw ParseError(std::string("field '") + key + "' is not a number", line);
    return j[key].get<double>();
}

}  // namespace

RunRecord parse_record_line(const std::string& text, std::size_t line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what(), line);
    }
    if (!j.is_object()) throw ParseError("record is not a JSON object", line);
    RunRecord r;
    if (!j.contains("activation") || !j["activation"].is_string()) throw ParseError("missing string 'activation'", line);
    r.activation = j["activation"].get<std::string>();
    if (!j.contains("conv_layers") || !j["conv_layers"].is_number_integer()) {
        throw ParseError("missing integer 'conv_layers'", line);
    }
    r.conv_layers = j["conv_layers"].get<int>();
    if (r.conv_layers < 1 || r.conv_layers > 4) throw ParseError("'conv_layers' outside 1..4", line);
    if (!j.contains("epoch") || !j["epoch"].is_number_unsigned() || j["epoch"].get<std::size_t>() == 0) {
        throw ParseError("missing positive integer 'epoch'", line);
    }
    r.epoch = j["epoch"].get<std::size_t>();
    r.train_loss = optional_real(j, "train_loss", line);
    r.test_top1 = optional_real(j, "test_top1", line);
    if (r.test_top1 && (*r.test_top1 < 0.0 || *r.test_top1 > 1.0)) throw ParseError("'test_top1' outside [0, 1]", line);
    r.wall_seconds = optional_real(j, "wall_seconds", line).value_or(0.0);
    if (j.contains("status")) {
        if (!j["status"].is_string()) throw ParseError("'status' is not a string", line);
        r.status = j["status"].get<std::string>();
        if (r.status != "ok" && r.status != "diverged") throw ParseError("unknown status '" + r.status + "'", line);
    }
    return r;
}

std::vector<RunRecord> read_records(std::istream& is) {
    std::vector<RunRecord> out;
    std::string text;
    std::size_t line = 0;
    while (std::getline(is, text)) {
        ++line;
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        out.push_back(parse_record_line(text, line));
    }
    return out;
}

namespace {

using CellKey = std::tuple<std::size_t, std::string, int>;

CellKey cell_key(const std::string& activation, int conv_layers) {
    const auto id = parse_activation(activation);
    const std::size_t order = id ? static_cast<std::size_t>(*id) : all_activations().size();
    return {order, activation, conv_layers};
}

std::string cell(const std::optional<double>& v) { return v ? format_real(*v) : std::string(); }

}  // namespace

std::vector<SummaryRow> summarize(const std::vector<RunRecord>& records) {
    std::map<CellKey, std::vector<const RunRecord*>> cells;
    for (const auto& r : records) cells[cell_key(r.activation, r.conv_layers)].push_back(&r);

    std::vector<SummaryRow> rows;
    for (auto& [key, recs] : cells) {
        std::sort(recs.begin(), recs.end(), [](const RunRecord* a, const RunRecord* b) { return a->epoch < b->epoch; });
        SummaryRow row;
        row.activation = std::get<1>(key);
        row.conv_layers = std::get<2>(key);
        for (const RunRecord* r : recs) {
            if (r->status != "ok") {
                row.status = r->status;
                continue;
            }
            ++row.epochs_completed;
            if (!r->test_top1) continue;
            const double acc = *r->test_top1;
            if (r->epoch == 20) row.top1_epoch20 = acc;
            if (r->epoch == 25) row.top1_epoch25 = acc;
            row.final_top1 = acc;
            row.best_top1 = row.best_top1 ? std::max(*row.best_top1, acc) : acc;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_summary_csv(const std::vector<SummaryRow>& rows, std::ostream& os) {
    os << "activation,conv_layers,epochs_completed,top1_epoch20,top1_epoch25,final_top1,best_top1,status\n";
    for (const auto& r : rows) {
        os << r.activation << ',' << r.conv_layers << ',' << r.epochs_completed << ',' << cell(r.top1_epoch20) << ','
           << cell(r.top1_epoch25) << ',' << cell(r.final_top1) << ',' << cell(r.best_top1) << ',' << r.status << '\n';
    }
}

std::vector<RunRecord> run_cell(const BenchConfig& cfg, ActivationId id, int conv_layers,
                                const data::ImageDataset& train, const data::ImageDataset& test, std::ostream* sink,
                                std::ostream* log) {
    nn::NetworkConfig net;
    net.conv_layers = conv_layers;
    net.activation = id;
    net.seed = cfg.seed;
    nn::Model model = nn::build_model(net);
    std::mt19937_64 rng(cfg.seed + 1);
    const nn::TrainOptions opts{cfg.batch, cfg.lr};

    std::vector<RunRecord> out;
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        RunRecord r;
        r.activation = std::string(name(id));
        r.conv_layers = conv_layers;
        r.epoch = epoch;
        try {
            r.train_loss = nn::train_epoch(model, train, opts, rng);
            r.test_top1 = nn::evaluate_top1(model, test);
        } catch (const DivergenceError&) {
            r.train_loss.reset();
            r.status = "diverged";
        }
        const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        r.wall_seconds = cfg.deterministic ? 0.0 : elapsed;
        if (sink) *sink << to_json_line(r) << '\n' << std::flush;
        if (log) {
            *log << r.activation << " conv=" << conv_layers << " epoch " << epoch << "/" << cfg.epochs;
            if (r.status == "ok") {
                *log << " loss " << *r.train_loss << " top1 " << *r.test_top1;
            } else {
                *log << " diverged";
            }
            *log << " (" << elapsed << " s)\n" << std::flush;
        }
        out.push_back(std::move(r));
        if (out.back().status != "ok") break;
    }
    return out;
}

data::Cifar10 prepare_data(const BenchConfig& cfg, data::Cifar10 full) {
    if (cfg.subset) full.train = data::stratified_subset(full.train, *cfg.subset, cfg.seed);
    if (cfg.test_subset) full.test = data::stratified_subset(full.test, *cfg.test_subset, cfg.seed);
    return full;
}

namespace {

std::ofstream open_output(const fs::path& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw FormatError("cannot write " + path.string());
    return os;
}

}  // namespace

int cmd_properties(const fs::path& out_dir, std::ostream& log) {
    fs::create_directories(out_dir);
    const PropertyReport report = build_property_report();
    {
        auto os = open_output(out_dir / "properties.json");
        write_report_json(report, os);
    }
    {
        auto os = open_output(out_dir / "properties.csv");
        write_report_csv(report, os);
    }
    const auto bad = report.contradictions();
    for (const auto& c : bad) log << "contradiction: " << c << '\n';
    log << report.rows.size() << " activations checked, " << bad.size() << " contradictions\n";
    return bad.empty() ? kExitOk : kExitContradiction;
}

XorOutcome solve_xor(ActivationId id, const xorlab::TrainSpec& spec) {
    const auto trained = xorlab::train_single_neuron(id, spec);
    if (trained.certificate.valid()) return {trained.certificate, "trained"};
    auto grid = xorlab::grid_search_certificate(id, 5.0, 0.1);
    if (grid.valid()) return {grid, "grid"};
    return {grid, "none"};
}

int cmd_xor(ActivationId id, const fs::path& out_dir, std::ostream& log, const xorlab::TrainSpec& spec) {
    fs::create_directories(out_dir);
    const XorOutcome outcome = solve_xor(id, spec);
    const std::string stem = "xor_" + std::string(name(id));
    {
        auto os = open_output(out_dir / (stem + ".json"));
        xorlab::write_certificate_json(outcome.certificate, outcome.method, os);
    }
    {
        auto os = open_output(out_dir / (stem + "_boundary.csv"));
        xorlab::write_boundary_csv(xorlab::decision_boundary_grid(outcome.certificate.neuron, -2.0, 2.0, 81), os);
    }
    const auto& n = outcome.certificate.neuron;
    if (outcome.method == "none") {
        log << name(id) << ": training and grid search both failed; best grid point gets "
            << outcome.certificate.correct << "/4 (w = " << n.w[0] << ", " << n.w[1] << ", b = " << n.b << ")\n";
        return kExitXorFailed;
    }
    log << name(id) << ": 4/4 correct via " << outcome.method << " (w = " << n.w[0] << ", " << n.w[1]
        << ", b = " << n.b << ")\n";
    return kExitOk;
}

int cmd_bench(const BenchConfig& cfg, const fs::path& data_dir, std::ostream& log) {
    cfg.validate();
    const data::Cifar10 data = prepare_data(cfg, data::load_cifar10(data_dir));
    log << "train " << data.train.size() << " images, test " << data.test.size() << " images\n";
    fs::create_directories(cfg.out_dir);
    std::vector<RunRecord> all;
    {
        auto sink = open_output(cfg.out_dir / "records.jsonl");
        for (ActivationId id : cfg.activations) {
            for (int depth : cfg.conv_layers) {
                auto recs = run_cell(cfg, id, depth, data.train, data.test, &sink, &log);
                all.insert(all.end(), recs.begin(), recs.end());
            }
        }
    }
    auto os = open_output(cfg.out_dir / "summary.csv");
    write_summary_csv(summarize(all), os);
    return kExitOk;
}

int cmd_emit_plots(const fs::path& records, const fs::path& out_dir, std::ostream& log) {
    std::ifstream in(records, std::ios::binary);
    if (!in) throw FormatError("cannot open records file " + records.string());
    const auto recs = read_records(in);

    std::map<CellKey, std::vector<const RunRecord*>> cells;
    for (const auto& r : recs) {
        if (r.test_top1) cells[cell_key(r.activation, r.conv_layers)].push_back(&r);
    }
    fs::create_directories(out_dir);
    auto by_epoch = open_output(out_dir / "accuracy_vs_epoch.csv");
    auto by_depth = open_output(out_dir / "accuracy_vs_depth.csv");
    by_epoch << "activation,conv_layers,epoch,test_top1\n";
    by_depth << "activation,conv_layers,epoch,test_top1\n";
    std::map<std::string, int> series;
    for (auto& [key, rs] : cells) {
        std::stable_sort(rs.begin(), rs.end(), [](const RunRecord* a, const RunRecord* b) { return a->epoch < b->epoch; });
        for (const RunRecord* r : rs) {
            by_epoch << r->activation << ',' << r->conv_layers << ',' << r->epoch << ',' << format_real(*r->test_top1)
                     << '\n';
        }
        const RunRecord* last = rs.back();
        by_depth << last->activation << ',' << last->conv_layers << ',' << last->epoch << ','
                 << format_real(*last->test_top1) << '\n';
        ++series[last->activation];
    }
    log << recs.size() << " records, " << series.size() << " activation series\n";
    return kExitOk;
}

}  // namespace osc::bench
