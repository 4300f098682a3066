#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "ddai/metrics.hpp"
#include "ddai/nn/model.hpp"
#include "ddai/records.hpp"
#include "ddai/seed.hpp"
#include "ddai/vectorizer.hpp"

namespace ddai {

struct TrainConfig {
    double learning_rate = 5e-4;
    double weight_decay = 1e-4;
    int epochs = 50;
    std::size_t batch_size = 32;
    double split_ratio = 0.8;
    std::uint64_t seed = kDefaultSeed;
    nn::Index hidden_dim = 128;
    nn::Index num_layers = 1;
    double dropout_p = 0.5;
    std::optional<std::size_t> max_features = kDefaultMaxFeatures;
    std::size_t chunk_size = kDefaultChunkSize;

    void validate() const;
    nn::ModelConfig model_config(nn::Index input_dim) const;
};

struct EpochLog {
    int epoch = 0;  // 1-based
    double train_loss = 0.0;
    double train_accuracy = 0.0;
    double test_loss = 0.0;
    double test_accuracy = 0.0;

    bool operator==(const EpochLog&) const = default;
};

template <class T>
struct TrainTestSplit {
    std::vector<T> train;
    std::vector<T> test;
};

/// ceil(n * ratio), guarded against representation error in `ratio`.
std::size_t train_size(std::size_t n, double ratio);

/// Seeded shuffle, then the first train_size(n, ratio) items form the train set.
template <class T>
TrainTestSplit<T> split_train_test(std::vector<T> items, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw DomainError("split ratio must be in (0, 1)");
    Rng rng(seed);
    seeded_shuffle(items.begin(), items.end(), rng);
    TrainTestSplit<T> out;
    const auto cut = static_cast<std::ptrdiff_t>(train_size(items.size(), ratio));
    out.train.assign(std::make_move_iterator(items.begin()),
                     std::make_move_iterator(items.begin() + cut));
    out.test.assign(std::make_move_iterator(items.begin() + cut),
                    std::make_move_iterator(items.end()));
    return out;
}

/// A fresh permutation of [0, n) cut into batches; a trailing batch of size 1
/// is dropped because train-mode batch norm cannot use it.
std::vector<std::vector<std::size_t>> make_batches(std::size_t n, std::size_t batch_size,
                                                   std::uint64_t epoch_seed);

/// Reads a labeled file chunk by chunk, splits every chunk with its own
/// derived seed and pools the pieces.
TrainTestSplit<LabeledExample> load_split(const std::filesystem::path& path, const TrainConfig& config);

Vocabulary build_training_vocabulary(std::span<const LabeledExample> train,
                                     std::optional<std::size_t> max_features);

struct Dataset {
    std::vector<std::int64_t> eids;
    std::vector<CountVector> inputs;
    std::vector<int> labels;

    std::size_t size() const noexcept { return inputs.size(); }
};

Dataset vectorize_examples(std::span<const LabeledExample> examples, const Vocabulary& vocab);

struct Evaluation {
    double loss = 0.0;
    MetricsReport metrics;
    std::vector<int> predictions;
};

/// Eval mode; the model is not modified.
Evaluation evaluate(const nn::LstmClassifier<float>& model, const Dataset& data,
                    std::size_t batch_size = 256);

struct TrainResult {
    nn::LstmClassifier<float> model;
    std::vector<EpochLog> log;
};

using EpochCallback = std::function<void(const EpochLog&)>;

/// Starts from a freshly initialized model (seed derived from config.seed).
TrainResult train(const TrainConfig& config, const Dataset& train_set, const Dataset& test_set,
                  nn::Index input_dim, const EpochCallback& on_epoch = {});

TrainResult train(const TrainConfig& config, const Dataset& train_set, const Dataset& test_set,
                  nn::LstmClassifier<float> initial, const EpochCallback& on_epoch = {});

struct GridCell {
    double learning_rate;
    double weight_decay;
};

/// Learning rate x weight decay grid, in model order 1..4.
inline constexpr std::array<GridCell, 4> kPaperGrid{{{5e-4, 1e-4}, {5e-4, 5e-4}, {1e-3, 1e-4}, {1e-3, 5e-4}}};

struct GridRun {
    GridCell cell;
    TrainResult result;
    MetricsReport test_metrics;
};

struct GridResult {
    std::vector<GridRun> runs;
    std::size_t best = 0;
};

/// Index of the report with the highest mean of accuracy/precision/recall/F1;
/// the first one wins ties.
std::size_t select_best(std::span<const MetricsReport> reports);

/// Cells are independent and run on up to `workers` threads.
GridResult run_grid(const TrainConfig& base, const Dataset& train_set, const Dataset& test_set,
                    nn::Index input_dim, std::size_t workers = 1,
                    std::span<const GridCell> cells = kPaperGrid);

void write_epoch_log_csv(std::ostream& out, std::span<const EpochLog> log);
/// Model,Test Accuracy,Precision,Recall,F1-Score
void write_grid_summary_csv(std::ostream& out, const GridResult& grid);
/// Model,Learning Rate,Weight Decay
void write_grid_config_csv(std::ostream& out, const GridResult& grid);

}  // namespace ddai
