#include "ddai/trainer.hpp"

#include <cstdio>
#include <numeric>
#include <thread>

#include "ddai/nn/adam.hpp"

namespace ddai {

void TrainConfig::validate() const {
    if (!(split_ratio > 0.0 && split_ratio < 1.0)) throw DomainError("split ratio must be in (0, 1)");
    if (batch_size < 2) throw DomainError("batch size must be at least 2 (batch normalization)");
    if (epochs < 1) throw DomainError("epochs must be at least 1");
    if (chunk_size < 1) throw DomainError("chunk size must be at least 1");
    if (!(learning_rate >= 0.0) || !(weight_decay >= 0.0))
        throw DomainError("learning rate and weight decay must be non-negative");
    if (max_features && *max_features == 0) throw DomainError("max_features must be positive");
    model_config(0).validate();
}

nn::ModelConfig TrainConfig::model_config(nn::Index input_dim) const {
    nn::ModelConfig cfg;
    cfg.input_dim = input_dim;
    cfg.hidden_dim = hidden_dim;
    cfg.num_layers = num_layers;
    cfg.dropout_p = dropout_p;
    return cfg;
}

std::size_t train_size(std::size_t n, double ratio) {
    const double exact = static_cast<double>(n) * ratio;
    auto size = static_cast<std::size_t>(std::ceil(exact - 1e-9));
    return std::min(size, n);
}

std::vector<std::vector<std::size_t>> make_batches(std::size_t n, std::size_t batch_size,
                                                   std::uint64_t epoch_seed) {
    if (batch_size < 2) throw DomainError("batch size must be at least 2");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(epoch_seed);
    seeded_shuffle(order.begin(), order.end(), rng);
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t start = 0; start < n; start += batch_size) {
        const auto end = std::min(n, start + batch_size);
        if (end - start < 2) break;
        batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                             order.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return batches;
}

TrainTestSplit<LabeledExample> load_split(const std::filesystem::path& path, const TrainConfig& config) {
    LabeledReader reader(path, config.chunk_size);
    TrainTestSplit<LabeledExample> pooled;
    while (auto chunk = reader.next()) {
        auto part = split_train_test(std::move(chunk->records), config.split_ratio,
                                     derive_seed(config.seed, "split", chunk->index));
        std::move(part.train.begin(), part.train.end(), std::back_inserter(pooled.train));
        std::move(part.test.begin(), part.test.end(), std::back_inserter(pooled.test));
    }
    return pooled;
}

Vocabulary build_training_vocabulary(std::span<const LabeledExample> train,
                                     std::optional<std::size_t> max_features) {
    VocabularyBuilder builder;
    for (const auto& ex : train) builder.add(assemble_text(ex.record));
    return builder.build(max_features);
}

Dataset vectorize_examples(std::span<const LabeledExample> examples, const Vocabulary& vocab) {
    Dataset d;
    d.eids.reserve(examples.size());
    d.inputs.reserve(examples.size());
    d.labels.reserve(examples.size());
    for (const auto& ex : examples) {
        d.eids.push_back(ex.record.eid);
        d.inputs.push_back(vectorize(assemble_text(ex.record), vocab));
        d.labels.push_back(ex.is_ai);
    }
    return d;
}

namespace {

struct BatchView {
    std::vector<CountVector> docs;
    std::vector<int> labels;
};

BatchView gather(const Dataset& data, std::span<const std::size_t> indices) {
    BatchView b;
    b.docs.reserve(indices.size());
    b.labels.reserve(indices.size());
    for (auto i : indices) {
        b.docs.push_back(data.inputs[i]);
        b.labels.push_back(data.labels[i]);
    }
    return b;
}

int predicted_class(const nn::Matrix<float>& logits, nn::Index col) {
    return logits(1, col) > logits(0, col) ? 1 : 0;
}

}  // namespace

Evaluation evaluate(const nn::LstmClassifier<float>& model, const Dataset& data, std::size_t batch_size) {
    Evaluation ev;
    if (data.size() == 0) return ev;
    ConfusionCounts counts;
    double loss_sum = 0.0;
    ev.predictions.reserve(data.size());
    std::vector<std::size_t> idx;
    for (std::size_t start = 0; start < data.size(); start += batch_size) {
        const auto end = std::min(data.size(), start + batch_size);
        idx.resize(end - start);
        std::iota(idx.begin(), idx.end(), start);
        auto batch = gather(data, idx);
        auto x = nn::to_sparse_batch<float>(batch.docs, model.config.input_dim);
        auto pass = nn::model_forward(model, x, nn::Mode::Eval);
        auto ce = nn::softmax_cross_entropy<float>(pass.logits, batch.labels);
        loss_sum += static_cast<double>(ce.loss) * static_cast<double>(idx.size());
        for (nn::Index c = 0; c < pass.logits.cols(); ++c) {
            const int p = predicted_class(pass.logits, c);
            ev.predictions.push_back(p);
            counts.add(p, batch.labels[static_cast<std::size_t>(c)]);
        }
    }
    ev.loss = loss_sum / static_cast<double>(data.size());
    ev.metrics = report_from_counts(counts);
    return ev;
}

TrainResult train(const TrainConfig& config, const Dataset& train_set, const Dataset& test_set,
                  nn::Index input_dim, const EpochCallback& on_epoch) {
    config.validate();
    auto model = nn::LstmClassifier<float>::initialized(config.model_config(input_dim),
                                                        derive_seed(config.seed, "init"));
    return train(config, train_set, test_set, std::move(model), on_epoch);
}

TrainResult train(const TrainConfig& config, const Dataset& train_set, const Dataset& test_set,
                  nn::LstmClassifier<float> initial, const EpochCallback& on_epoch) {
    config.validate();
    TrainResult result{std::move(initial), {}};
    auto& model = result.model;
    nn::AdamState<float> adam(model.config, {config.learning_rate, config.weight_decay});

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        Rng dropout_rng(derive_seed(config.seed, "dropout", static_cast<std::uint64_t>(epoch)));
        auto batches = make_batches(train_set.size(), config.batch_size,
                                    derive_seed(config.seed, "shuffle", static_cast<std::uint64_t>(epoch)));
        double loss_sum = 0.0;
        std::size_t seen = 0, correct = 0;
        for (std::size_t b = 0; b < batches.size(); ++b) {
            auto batch = gather(train_set, batches[b]);
            auto x = nn::to_sparse_batch<float>(batch.docs, model.config.input_dim);
            auto pass = nn::model_forward(model, x, nn::Mode::Train, &dropout_rng);
            nn::LossOutput<float> ce;
            try {
                ce = nn::softmax_cross_entropy<float>(pass.logits, batch.labels);
            } catch (const NumericError&) {
                throw DivergedError(epoch, b);
            }
            if (!std::isfinite(ce.loss)) throw DivergedError(epoch, b);
            for (nn::Index c = 0; c < pass.logits.cols(); ++c)
                correct += predicted_class(pass.logits, c) == batch.labels[static_cast<std::size_t>(c)];
            loss_sum += static_cast<double>(ce.loss) * static_cast<double>(batch.labels.size());
            seen += batch.labels.size();

            nn::commit_batch_stats(model, pass.tape);
            auto grads = nn::model_backward(model, std::move(pass.tape), ce.d_logits);
            nn::adam_step(model.params, grads, adam);
        }
        EpochLog log;
        log.epoch = epoch;
        if (seen > 0) {
            log.train_loss = loss_sum / static_cast<double>(seen);
            log.train_accuracy = static_cast<double>(correct) / static_cast<double>(seen);
        }
        auto ev = evaluate(model, test_set);
        log.test_loss = ev.loss;
        log.test_accuracy = ev.metrics.accuracy;
        result.log.push_back(log);
        if (on_epoch) on_epoch(log);
    }
    return result;
}

std::size_t select_best(std::span<const MetricsReport> reports) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < reports.size(); ++i)
        if (reports[i].mean() > reports[best].mean()) best = i;
    return best;
}

GridResult run_grid(const TrainConfig& base, const Dataset& train_set, const Dataset& test_set,
                    nn::Index input_dim, std::size_t workers, std::span<const GridCell> cells) {
    GridResult grid;
    grid.runs.resize(cells.size());
    auto run_cell = [&](std::size_t i) {
        TrainConfig cfg = base;
        cfg.learning_rate = cells[i].learning_rate;
        cfg.weight_decay = cells[i].weight_decay;
        auto result = train(cfg, train_set, test_set, input_dim);
        auto metrics = evaluate(result.model, test_set).metrics;
        grid.runs[i] = GridRun{cells[i], std::move(result), metrics};
    };
    workers = std::max<std::size_t>(1, std::min(workers, cells.size()));
    if (workers == 1) {
        for (std::size_t i = 0; i < cells.size(); ++i) run_cell(i);
    } else {
        std::vector<std::exception_ptr> errors(cells.size());
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < cells.size(); i += workers) {
                    try {
                        run_cell(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        pool.clear();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }
    std::vector<MetricsReport> reports;
    for (const auto& r : grid.runs) reports.push_back(r.test_metrics);
    grid.best = select_best(reports);
    return grid;
}

void write_epoch_log_csv(std::ostream& out, std::span<const EpochLog> log) {
    out << "epoch,train_loss,train_acc,test_loss,test_acc\n";
    char buf[160];
    for (const auto& e : log) {
        std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%.9g,%.9g\n", e.epoch, e.train_loss,
                      e.train_accuracy, e.test_loss, e.test_accuracy);
        out << buf;
    }
}

void write_grid_summary_csv(std::ostream& out, const GridResult& grid) {
    out << "Model," << kMetricsCsvHeader << '\n';
    for (std::size_t i = 0; i < grid.runs.size(); ++i)
        out << "Model" << (i + 1) << ',' << metrics_csv_row(grid.runs[i].test_metrics) << '\n';
}

void write_grid_config_csv(std::ostream& out, const GridResult& grid) {
    out << "Model,Learning Rate,Weight Decay\n";
    char buf[96];
    for (std::size_t i = 0; i < grid.runs.size(); ++i) {
        std::snprintf(buf, sizeof buf, "Model%zu,%g,%g\n", i + 1, grid.runs[i].cell.learning_rate,
                      grid.runs[i].cell.weight_decay);
        out << buf;
    }
}

}  // namespace ddai
