// ddai: command-line entry point for vocabulary building, training, grid
// search, evaluation, bulk classification, expert consistency and analytics.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "ddai/analytics.hpp"
#include "ddai/experteval.hpp"
#include "ddai/inference.hpp"
#include "ddai/nn/checkpoint.hpp"
#include "ddai/trainer.hpp"

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "1.0.0";

/// One per run, written next to the run's outputs.
class RunManifest {
public:
    explicit RunManifest(std::string command) : command_(std::move(command)), start_(std::chrono::steady_clock::now()) {
        doc_["command"] = command_;
        doc_["tool_version"] = kVersion;
        doc_["config"] = ddai::Json::object();
        doc_["inputs"] = ddai::Json::object();
        doc_["outputs"] = ddai::Json::object();
    }

    template <class T>
    void config(const std::string& key, const T& value) { doc_["config"][key] = value; }
    void seed(std::uint64_t s) { doc_["seed"] = s; }
    void input(const std::string& key, const fs::path& p) { doc_["inputs"][key] = p.string(); }
    void output(const std::string& key, const fs::path& p) { doc_["outputs"][key] = p.string(); }

    void write(const fs::path& path) {
        const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_);
        doc_["wall_clock_seconds"] = elapsed.count();
        std::ofstream out(path);
        if (!out) throw ddai::IoError("cannot write " + path.string());
        out << doc_.dump(2) << '\n';
    }

private:
    std::string command_;
    std::chrono::steady_clock::time_point start_;
    ddai::Json doc_ = ddai::Json::object();
};

struct DataOptions {
    fs::path input;
    std::size_t chunk_size = ddai::kDefaultChunkSize;
    double split_ratio = 0.8;
    std::uint64_t seed = ddai::kDefaultSeed;
    std::size_t max_features = ddai::kDefaultMaxFeatures;  // 0 = unbounded
};

struct TrainOptions {
    DataOptions data;
    fs::path output_dir = "run";
    fs::path vocab;
    double learning_rate = 5e-4;
    double weight_decay = 1e-4;
    int epochs = 50;
    std::size_t batch_size = 32;
    long hidden_dim = 128;
    long num_layers = 1;
    double dropout = 0.5;
    std::size_t workers = 1;
};

void add_data_options(CLI::App* cmd, DataOptions& o) {
    cmd->add_option("--input", o.input, "Labeled line-delimited record file")->required();
    cmd->add_option("--chunk-size", o.chunk_size, "Rows per read chunk")->check(CLI::PositiveNumber);
    cmd->add_option("--split-ratio", o.split_ratio, "Train fraction of every chunk")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--seed", o.seed, "Master seed for all randomness");
    cmd->add_option("--max-features", o.max_features, "Vocabulary cap by corpus frequency (0 = no cap)");
}

void add_train_options(CLI::App* cmd, TrainOptions& o) {
    add_data_options(cmd, o.data);
    cmd->add_option("--output-dir", o.output_dir, "Directory for checkpoint, logs and manifest");
    cmd->add_option("--vocab", o.vocab, "Existing vocabulary (built from the train split when absent)")
        ->envname("DDAI_VOCAB");
    cmd->add_option("--learning-rate", o.learning_rate, "Adam learning rate");
    cmd->add_option("--weight-decay", o.weight_decay, "Coupled L2 weight decay");
    cmd->add_option("--epochs", o.epochs, "Training epochs")->check(CLI::PositiveNumber);
    cmd->add_option("--batch-size", o.batch_size, "Mini-batch size (>= 2)")->check(CLI::Range(2, 1 << 20));
    cmd->add_option("--hidden-dim", o.hidden_dim, "LSTM hidden units")->check(CLI::PositiveNumber);
    cmd->add_option("--num-layers", o.num_layers, "Stacked LSTM layers")->check(CLI::PositiveNumber);
    cmd->add_option("--dropout", o.dropout, "Dropout probability")->check(CLI::Range(0.0, 0.999999));
}

ddai::TrainConfig to_config(const TrainOptions& o) {
    ddai::TrainConfig c;
    c.learning_rate = o.learning_rate;
    c.weight_decay = o.weight_decay;
    c.epochs = o.epochs;
    c.batch_size = o.batch_size;
    c.split_ratio = o.data.split_ratio;
    c.seed = o.data.seed;
    c.hidden_dim = o.hidden_dim;
    c.num_layers = o.num_layers;
    c.dropout_p = o.dropout;
    c.max_features = o.data.max_features == 0 ? std::nullopt : std::optional<std::size_t>(o.data.max_features);
    c.chunk_size = o.data.chunk_size;
    c.validate();
    return c;
}

void record_config(RunManifest& m, const ddai::TrainConfig& c) {
    m.seed(c.seed);
    m.config("learning_rate", c.learning_rate);
    m.config("weight_decay", c.weight_decay);
    m.config("epochs", c.epochs);
    m.config("batch_size", c.batch_size);
    m.config("split_ratio", c.split_ratio);
    m.config("hidden_dim", c.hidden_dim);
    m.config("num_layers", c.num_layers);
    m.config("dropout_p", c.dropout_p);
    m.config("max_features", c.max_features ? static_cast<std::int64_t>(*c.max_features) : 0);
    m.config("chunk_size", c.chunk_size);
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ddai::IoError("cannot write " + path.string());
    out << text;
}

struct PreparedData {
    ddai::Vocabulary vocab;
    ddai::Dataset train;
    ddai::Dataset test;
};

PreparedData prepare(const ddai::TrainConfig& cfg, const DataOptions& data, const fs::path& vocab_path,
                     const fs::path& output_dir, RunManifest& manifest) {
    auto split = ddai::load_split(data.input, cfg);
    std::cerr << "loaded " << split.train.size() << " train / " << split.test.size() << " test examples\n";
    PreparedData p;
    if (!vocab_path.empty()) {
        p.vocab = ddai::Vocabulary::load(vocab_path);
        manifest.input("vocab", vocab_path);
    } else {
        p.vocab = ddai::build_training_vocabulary(split.train, cfg.max_features);
        const auto out = output_dir / "vocab.txt";
        p.vocab.save(out);
        manifest.output("vocab", out);
    }
    p.train = ddai::vectorize_examples(split.train, p.vocab);
    p.test = ddai::vectorize_examples(split.test, p.vocab);
    return p;
}

auto epoch_printer(const std::string& tag) {
    return [tag](const ddai::EpochLog& e) {
        std::fprintf(stderr, "%sepoch %d train_loss %.4f train_acc %.4f test_loss %.4f test_acc %.4f\n",
                     tag.c_str(), e.epoch, e.train_loss, e.train_accuracy, e.test_loss, e.test_accuracy);
    };
}

int cmd_build_vocab(const DataOptions& o, const fs::path& output) {
    RunManifest manifest("build-vocab");
    ddai::TrainConfig cfg;
    cfg.chunk_size = o.chunk_size;
    cfg.split_ratio = o.split_ratio;
    cfg.seed = o.seed;
    cfg.max_features = o.max_features == 0 ? std::nullopt : std::optional<std::size_t>(o.max_features);
    cfg.validate();
    auto split = ddai::load_split(o.input, cfg);
    auto vocab = ddai::build_training_vocabulary(split.train, cfg.max_features);
    vocab.save(output);
    std::cout << "vocabulary: " << vocab.size() << " tokens from " << vocab.documents() << " training documents\n";
    manifest.seed(o.seed);
    manifest.config("chunk_size", o.chunk_size);
    manifest.config("split_ratio", o.split_ratio);
    manifest.config("max_features", o.max_features);
    manifest.input("input", o.input);
    manifest.output("vocab", output);
    manifest.write(fs::path(output.string() + ".manifest.json"));
    return 0;
}

int cmd_train(const TrainOptions& o) {
    RunManifest manifest("train");
    auto cfg = to_config(o);
    fs::create_directories(o.output_dir);
    auto data = prepare(cfg, o.data, o.vocab, o.output_dir, manifest);
    auto result = ddai::train(cfg, data.train, data.test, static_cast<ddai::nn::Index>(data.vocab.size()),
                              epoch_printer(""));

    const auto ckpt = o.output_dir / "model.ckpt";
    ddai::nn::save_checkpoint(ckpt, result.model, data.vocab.hash());
    std::ofstream log(o.output_dir / "epoch_log.csv", std::ios::binary);
    ddai::write_epoch_log_csv(log, result.log);
    auto ev = ddai::evaluate(result.model, data.test);
    write_text(o.output_dir / "metrics.csv",
               std::string(ddai::kMetricsCsvHeader) + "\n" + ddai::metrics_csv_row(ev.metrics) + "\n");
    std::cout << ddai::kMetricsCsvHeader << '\n' << ddai::metrics_csv_row(ev.metrics) << '\n';

    record_config(manifest, cfg);
    manifest.input("input", o.data.input);
    manifest.output("checkpoint", ckpt);
    manifest.output("epoch_log", o.output_dir / "epoch_log.csv");
    manifest.output("metrics", o.output_dir / "metrics.csv");
    manifest.write(o.output_dir / "manifest.json");
    return 0;
}

int cmd_grid(const TrainOptions& o) {
    RunManifest manifest("grid");
    auto cfg = to_config(o);
    fs::create_directories(o.output_dir);
    auto data = prepare(cfg, o.data, o.vocab, o.output_dir, manifest);
    auto grid = ddai::run_grid(cfg, data.train, data.test, static_cast<ddai::nn::Index>(data.vocab.size()),
                               o.workers);
    for (std::size_t i = 0; i < grid.runs.size(); ++i) {
        const auto tag = "model" + std::to_string(i + 1);
        ddai::nn::save_checkpoint(o.output_dir / (tag + ".ckpt"), grid.runs[i].result.model, data.vocab.hash());
        std::ofstream log(o.output_dir / ("epoch_log_" + tag + ".csv"), std::ios::binary);
        ddai::write_epoch_log_csv(log, grid.runs[i].result.log);
        manifest.output(tag, o.output_dir / (tag + ".ckpt"));
    }
    {
        std::ofstream out(o.output_dir / "grid_summary.csv", std::ios::binary);
        ddai::write_grid_summary_csv(out, grid);
        std::ofstream cfg_out(o.output_dir / "grid_config.csv", std::ios::binary);
        ddai::write_grid_config_csv(cfg_out, grid);
    }
    ddai::write_grid_summary_csv(std::cout, grid);
    std::cout << "best: Model" << grid.best + 1 << " (learning rate " << grid.runs[grid.best].cell.learning_rate
              << ", weight decay " << grid.runs[grid.best].cell.weight_decay << ")\n";

    record_config(manifest, cfg);
    manifest.config("workers", o.workers);
    manifest.config("best_model", grid.best + 1);
    manifest.input("input", o.data.input);
    manifest.output("grid_summary", o.output_dir / "grid_summary.csv");
    manifest.write(o.output_dir / "manifest.json");
    return 0;
}

struct EvalOptions {
    fs::path model, vocab, input, output;
    std::string split = "all";
    std::size_t chunk_size = ddai::kDefaultChunkSize;
    double split_ratio = 0.8;
    std::uint64_t seed = ddai::kDefaultSeed;
};

int cmd_eval(const EvalOptions& o) {
    RunManifest manifest("eval");
    auto clf = ddai::Classifier::from_files(o.model, o.vocab);
    std::vector<ddai::LabeledExample> examples;
    if (o.split == "test") {
        ddai::TrainConfig cfg;
        cfg.chunk_size = o.chunk_size;
        cfg.split_ratio = o.split_ratio;
        cfg.seed = o.seed;
        cfg.validate();
        examples = ddai::load_split(o.input, cfg).test;
    } else {
        ddai::LabeledReader reader(o.input, o.chunk_size);
        while (auto chunk = reader.next())
            for (auto& ex : chunk->records) examples.push_back(std::move(ex));
    }
    auto data = ddai::vectorize_examples(examples, clf.vocabulary());
    auto ev = ddai::evaluate(clf.model(), data);
    const std::string csv = std::string(ddai::kMetricsCsvHeader) + "\n" + ddai::metrics_csv_row(ev.metrics) + "\n";
    std::cout << csv;
    std::fprintf(stdout, "loss %.6f  tp %llu fp %llu tn %llu fn %llu%s\n", ev.loss,
                 static_cast<unsigned long long>(ev.metrics.counts.tp),
                 static_cast<unsigned long long>(ev.metrics.counts.fp),
                 static_cast<unsigned long long>(ev.metrics.counts.tn),
                 static_cast<unsigned long long>(ev.metrics.counts.fn),
                 ev.metrics.zero_division ? "  (zero-division: undefined ratios reported as 0)" : "");
    manifest.seed(o.seed);
    manifest.config("split", o.split);
    manifest.input("model", o.model);
    manifest.input("vocab", o.vocab);
    manifest.input("input", o.input);
    if (!o.output.empty()) {
        write_text(o.output, csv);
        manifest.output("metrics", o.output);
        manifest.write(fs::path(o.output.string() + ".manifest.json"));
    }
    return 0;
}

struct ClassifyOptions {
    fs::path model, vocab, input, output;
    std::size_t chunk_size = ddai::kDefaultChunkSize;
    std::size_t workers = 1;
};

int cmd_classify(const ClassifyOptions& o) {
    RunManifest manifest("classify");
    auto clf = ddai::Classifier::from_files(o.model, o.vocab);
    ddai::StreamOptions opts;
    opts.chunk_size = o.chunk_size;
    opts.workers = o.workers;
    opts.log = &std::cerr;
    auto summary = ddai::classify_stream(o.input, o.output, clf, opts);
    manifest.config("chunk_size", o.chunk_size);
    manifest.config("workers", o.workers);
    manifest.input("model", o.model);
    manifest.input("vocab", o.vocab);
    manifest.input("input", o.input);
    manifest.output("output", o.output);
    manifest.write(fs::path(o.output.string() + ".manifest.json"));
    std::cout << ddai::summary_json(summary) << std::endl;
    return 0;
}

int cmd_expert(const fs::path& predictions, const fs::path& ballots_path, const fs::path& disagreements) {
    RunManifest manifest("expert-consistency");
    auto ballots = ddai::read_ballots(ballots_path);
    auto report = ddai::consistency_rate(ddai::read_model_labels(predictions), ddai::expert_labels(ballots));
    std::ofstream out(disagreements, std::ios::binary);
    if (!out) throw ddai::IoError("cannot write " + disagreements.string());
    ddai::write_disagreements_csv(out, report);
    std::cout << "consistency_rate " << ddai::format_rate(report.rate()) << " (" << report.agreements << "/"
              << report.total << ", " << report.disagreements.size() << " disagreements)\n";
    manifest.input("model_predictions", predictions);
    manifest.input("ballots", ballots_path);
    manifest.output("disagreements", disagreements);
    manifest.write(fs::path(disagreements.string() + ".manifest.json"));
    return 0;
}

int cmd_analytics(const fs::path& input, const fs::path& report_dir, std::size_t top_k, bool only_ai,
                  std::size_t chunk_size) {
    RunManifest manifest("analytics");
    ddai::CorpusAnalytics analytics;
    ddai::RecordReader reader(input, chunk_size, {.unique_eids = false});
    while (auto chunk = reader.next())
        for (const auto& r : chunk->records) {
            if (only_ai) {
                auto it = r.extras.find("is_ai");
                if (it == r.extras.end() || !(*it == 1 || *it == true || *it == "1")) continue;
            }
            analytics.add(r);
        }
    analytics.write_report(report_dir, top_k);
    std::cout << "analyzed " << analytics.records() << " records into " << report_dir.string() << '\n';
    manifest.config("top_k", top_k);
    manifest.config("only_ai", only_ai);
    manifest.config("chunk_size", chunk_size);
    manifest.input("input", input);
    manifest.output("report", report_dir);
    manifest.write(report_dir / "manifest.json");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ddai - AI-related paper classifier"};
    app.option_defaults()->always_capture_default();
    app.set_config("--config", "", "Key-value config file ([subcommand] sections)");
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    DataOptions vocab_opts;
    fs::path vocab_out;
    auto* build_vocab = app.add_subcommand("build-vocab", "Build the vocabulary over the training split");
    add_data_options(build_vocab, vocab_opts);
    build_vocab->add_option("--output", vocab_out, "Vocabulary file to write")->required();

    TrainOptions train_opts;
    auto* train = app.add_subcommand("train", "Train one model");
    add_train_options(train, train_opts);

    TrainOptions grid_opts;
    auto* grid = app.add_subcommand("grid", "Train the 4-cell learning-rate x weight-decay grid");
    add_train_options(grid, grid_opts);
    grid->add_option("--workers", grid_opts.workers, "Grid cells trained concurrently")->check(CLI::PositiveNumber);

    EvalOptions eval_opts;
    auto* eval = app.add_subcommand("eval", "Score a checkpoint on a labeled file");
    eval->add_option("--model", eval_opts.model, "Checkpoint")->required()->envname("DDAI_MODEL");
    eval->add_option("--vocab", eval_opts.vocab, "Vocabulary")->required()->envname("DDAI_VOCAB");
    eval->add_option("--input", eval_opts.input, "Labeled record file")->required();
    eval->add_option("--output", eval_opts.output, "Metrics CSV to write");
    eval->add_option("--split", eval_opts.split, "Rows to score: all, or the held-out test split")
        ->check(CLI::IsMember({"all", "test"}));
    eval->add_option("--chunk-size", eval_opts.chunk_size, "Rows per read chunk")->check(CLI::PositiveNumber);
    eval->add_option("--split-ratio", eval_opts.split_ratio, "Train fraction (with --split test)")
        ->check(CLI::Range(0.0, 1.0));
    eval->add_option("--seed", eval_opts.seed, "Master seed (with --split test)");

    ClassifyOptions cls_opts;
    auto* classify = app.add_subcommand("classify", "Append is_ai/p_ai to every record of a file");
    classify->add_option("--model", cls_opts.model, "Checkpoint")->required()->envname("DDAI_MODEL");
    classify->add_option("--vocab", cls_opts.vocab, "Vocabulary")->required()->envname("DDAI_VOCAB");
    classify->add_option("--input", cls_opts.input, "Record file")->required();
    classify->add_option("--output", cls_opts.output, "Output record file")->required();
    classify->add_option("--chunk-size", cls_opts.chunk_size, "Rows held in memory at once")
        ->check(CLI::PositiveNumber);
    classify->add_option("--workers", cls_opts.workers, "Classification threads")->check(CLI::PositiveNumber);

    fs::path predictions, ballots, disagreements = "disagreements.csv";
    auto* expert = app.add_subcommand("expert-consistency", "Model vs expert majority-vote agreement");
    expert->add_option("--model-predictions", predictions, "Output of classify")->required();
    expert->add_option("--ballots", ballots, "Expert ballot file")->required();
    expert->add_option("--disagreements", disagreements, "CSV of disagreeing papers");

    fs::path analytics_in, report_dir;
    std::size_t top_k = 100, analytics_chunk = ddai::kDefaultChunkSize;
    bool only_ai = false;
    auto* analytics = app.add_subcommand("analytics", "Per-year, type, language and keyword statistics");
    analytics->add_option("--input", analytics_in, "Record file")->required();
    analytics->add_option("--report", report_dir, "Output directory")->required();
    analytics->add_option("--top-k", top_k, "Keywords per period bin")->check(CLI::PositiveNumber);
    analytics->add_flag("--only-ai", only_ai, "Keep only rows with is_ai = 1");
    analytics->add_option("--chunk-size", analytics_chunk, "Rows per read chunk")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << " (see --help)\n";
        return 2;
    }

    try {
        if (*build_vocab) return cmd_build_vocab(vocab_opts, vocab_out);
        if (*train) return cmd_train(train_opts);
        if (*grid) return cmd_grid(grid_opts);
        if (*eval) return cmd_eval(eval_opts);
        if (*classify) return cmd_classify(cls_opts);
        if (*expert) return cmd_expert(predictions, ballots, disagreements);
        if (*analytics) return cmd_analytics(analytics_in, report_dir, top_k, only_ai, analytics_chunk);
    } catch (const ddai::DomainError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
