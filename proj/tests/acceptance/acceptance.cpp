// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "ddai/analytics.hpp"
#include "ddai/experteval.hpp"
#include "ddai/inference.hpp"
#include "ddai/metrics.hpp"
#include "ddai/nn/adam.hpp"
#include "ddai/nn/checkpoint.hpp"
#include "ddai/trainer.hpp"
#include "fixtures.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"
#include "process.hpp"

using namespace ddai;
namespace fs = std::filesystem;
using ddai::testing::ScratchDir;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ------------------------------------------------------------------ gradients

Outcome gradient_correctness() {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(derive_seed(kDefaultSeed, "acceptance-grad"));
    std::size_t probes = 0, failures = 0;
    double worst = 0.0;
    std::string worst_where;
    for (int trial = 0; trial < 40; ++trial) {
        nn::ModelConfig cfg;
        cfg.input_dim = 1 + static_cast<nn::Index>(uniform_below(rng, 11));
        cfg.hidden_dim = 1 + static_cast<nn::Index>(uniform_below(rng, 7));
        cfg.num_layers = 1;
        cfg.dropout_p = 0.0;
        const auto batch = 2 + static_cast<nn::Index>(uniform_below(rng, 4));  // train-mode batch norm needs >= 2

        auto model = nn::LstmClassifier<double>::initialized(cfg, rng());
        for (auto& t : model.params.tensors())
            for (nn::Index i = 0; i < t.values.size(); ++i) t.values(i) += 0.3 * (2.0 * uniform01(rng) - 1.0);
        std::vector<Eigen::Triplet<double>> trip;
        for (nn::Index c = 0; c < batch; ++c)
            for (nn::Index r = 0; r < cfg.input_dim; ++r)
                if (uniform_below(rng, 2) == 0) trip.emplace_back(r, c, 1.0 + static_cast<double>(uniform_below(rng, 3)));
        nn::SparseBatch<double> x(cfg.input_dim, batch);
        x.setFromTriplets(trip.begin(), trip.end());
        std::vector<int> labels;
        for (nn::Index i = 0; i < batch; ++i) labels.push_back(static_cast<int>(uniform_below(rng, 2)));

        auto pass = nn::model_forward(model, x, nn::Mode::Train);
        auto ce = nn::softmax_cross_entropy<double>(pass.logits, labels);
        auto grads = nn::model_backward(model, std::move(pass.tape), ce.d_logits);
        for (const auto& p : ddai::testing::probe_model_gradients(model, x, labels, grads, 2, rng)) {
            ++probes;
            if (p.rel_error >= 1e-4) ++failures;
            if (p.rel_error > worst) {
                worst = p.rel_error;
                worst_where = p.tensor;
            }
        }
    }
    const double secs = seconds_since(t0);
    out.require(failures == 0, std::to_string(failures) + " probes above 1e-4");
    out.require(probes >= 200, "only " + std::to_string(probes) + " probes");
    out.require(secs < 60.0, "took " + fmt("%.1f s", secs));
    out.detail = std::to_string(probes) + " probes, worst rel error " + fmt("%.2e", worst) + " (" + worst_where +
                 "), " + fmt("%.2f s", secs) + (out.detail.empty() ? "" : "; " + out.detail);
    return out;
}

// ------------------------------------------------------------------ kernels

Outcome kernel_oracles() {
    Outcome out;
    nn::Matrix<double> uniform = nn::Matrix<double>::Zero(2, 4);
    const std::vector<int> labels = {0, 1, 0, 1};
    const double ce = nn::softmax_cross_entropy<double>(uniform, labels).loss;
    out.require(std::fabs(ce - std::numbers::ln2) <= 1e-9, "softmax-CE at uniform logits " + fmt("%.12f", ce));

    nn::Matrix<double> h(1, 2);
    h << 1, 3;
    const double eps = 1e-5;
    auto bn = nn::batchnorm_forward<double>(h, nn::Vector<double>::Ones(1), nn::Vector<double>::Zero(1),
                                           nn::Mode::Train, nn::BatchNormRunning<double>::init(1), eps);
    const double expected = 1.0 / std::sqrt(1.0 + eps);
    out.require(std::fabs(bn.y(0, 0) + expected) <= 1e-6 && std::fabs(bn.y(0, 1) - expected) <= 1e-6,
                "batch norm gave [" + fmt("%.8f", bn.y(0, 0)) + ", " + fmt("%.8f", bn.y(0, 1)) + "]");

    auto layer = nn::LstmLayer<double>::zeros(5, 3);
    nn::Matrix<double> x = nn::Matrix<double>::Constant(5, 2, 4.0);
    auto lstm = nn::lstm_forward(layer, x);
    out.require(lstm.h.isZero(0.0), "zero-weight LSTM hidden state is not exactly zero");

    nn::ModelConfig cfg;
    cfg.input_dim = 1;
    cfg.hidden_dim = 1;
    auto params = nn::Parameters<double>::zeros(cfg);
    params.fc_bias(0) = 0.5;
    auto grads = nn::Parameters<double>::zeros(cfg);
    grads.fc_bias(0) = 1.0;
    nn::AdamState<double> adam(cfg, {1e-3, 0.0});
    nn::adam_step(params, grads, adam);
    const double moved = params.fc_bias(0) - 0.5;
    out.require(std::fabs(moved + 1e-3) <= 1e-6, "first Adam step moved " + fmt("%.9f", moved));
    out.detail = "CE " + fmt("%.12f", ce) + ", BN [" + fmt("%.7f", bn.y(0, 0)) + ", " + fmt("%.7f", bn.y(0, 1)) +
                 "], Adam step " + fmt("%.9f", moved) + (out.detail.empty() ? "" : "; " + out.detail);
    return out;
}

// ------------------------------------------------------------------ learning

struct Prepared {
    Vocabulary vocab;
    Dataset train, test;
};

Prepared prepare(double noise) {
    auto corpus = ddai::testing::separable_corpus(2000, 1234, noise);
    auto split = split_train_test(std::move(corpus), 0.8, kDefaultSeed);
    Prepared p;
    p.vocab = build_training_vocabulary(split.train, kDefaultMaxFeatures);
    p.train = vectorize_examples(split.train, p.vocab);
    p.test = vectorize_examples(split.test, p.vocab);
    return p;
}

Outcome learning_sanity() {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    TrainConfig cfg;  // defaults: hidden 128, dropout 0.5, batch 32
    cfg.epochs = 10;

    auto clean = prepare(0.0);
    auto grid = run_grid(cfg, clean.train, clean.test, static_cast<nn::Index>(clean.vocab.size()), 4);
    std::string accs;
    for (std::size_t i = 0; i < grid.runs.size(); ++i) {
        const double acc = grid.runs[i].result.log.back().test_accuracy;
        accs += (i ? ", " : "") + fmt("%.4f", acc);
        out.require(acc >= 0.99, "Model" + std::to_string(i + 1) + " test accuracy " + fmt("%.4f", acc));
    }

    auto noisy = prepare(0.10);
    auto noisy_cfg = cfg;
    noisy_cfg.learning_rate = kPaperGrid[0].learning_rate;
    noisy_cfg.weight_decay = kPaperGrid[0].weight_decay;
    auto noisy_run = train(noisy_cfg, noisy.train, noisy.test, static_cast<nn::Index>(noisy.vocab.size()));
    const double noisy_acc = noisy_run.log.back().test_accuracy;
    out.require(noisy_acc >= 0.85, "10% noise accuracy " + fmt("%.4f", noisy_acc));

    const double secs = seconds_since(t0);
    out.require(secs < 300.0, "took " + fmt("%.1f s", secs));
    out.detail = "grid test accuracy [" + accs + "], 10% noise " + fmt("%.4f", noisy_acc) + ", " +
                 fmt("%.1f s", secs) + (out.detail.empty() ? "" : "; " + out.detail);
    return out;
}

// ------------------------------------------------------------------ metrics

Outcome metric_oracle() {
    Outcome out;
    Rng rng(derive_seed(kDefaultSeed, "acceptance-metrics"));
    std::vector<int> pred, gold;
    for (int i = 0; i < 1000; ++i) {
        pred.push_back(static_cast<int>(uniform_below(rng, 2)));
        gold.push_back(static_cast<int>(uniform_below(rng, 2)));
    }
    const auto brute = ddai::testing::brute_confusion(pred, gold);
    const auto r = score(pred, gold);
    const double acc = static_cast<double>(brute.tp + brute.tn) / 1000.0;
    const double prec = static_cast<double>(brute.tp) / static_cast<double>(brute.tp + brute.fp);
    const double rec = static_cast<double>(brute.tp) / static_cast<double>(brute.tp + brute.fn);
    const double f1 = 2.0 * prec * rec / (prec + rec);
    out.require(r.counts.tp == static_cast<std::uint64_t>(brute.tp) && r.counts.fp == static_cast<std::uint64_t>(brute.fp) &&
                    r.counts.tn == static_cast<std::uint64_t>(brute.tn) && r.counts.fn == static_cast<std::uint64_t>(brute.fn),
                "confusion counts differ");
    out.require(r.accuracy == acc && r.precision == prec && r.recall == rec && r.f1 == f1, "metric values differ");

    std::ostringstream csv;
    csv << kMetricsCsvHeader << '\n' << metrics_csv_row(r) << '\n';
    std::istringstream in(csv.str());
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    out.require(header == "Test Accuracy,Precision,Recall,F1-Score", "CSV header " + header);
    out.require(std::count(row.begin(), row.end(), ',') == 3, "CSV row " + row);
    out.detail = "tp/fp/tn/fn " + std::to_string(brute.tp) + "/" + std::to_string(brute.fp) + "/" +
                 std::to_string(brute.tn) + "/" + std::to_string(brute.fn) + ", row " + row +
                 (out.detail.empty() ? "" : "; " + out.detail);
    return out;
}

// ------------------------------------------------------------------ expert consistency

Outcome expert_arithmetic() {
    Outcome out;
    ScratchDir dir("acceptance-eed");
    Rng rng(derive_seed(kDefaultSeed, "acceptance-eed"));
    // every ballot shape appears; 132 randomly chosen items get the opposite model label
    std::vector<std::size_t> order(500);
    std::iota(order.begin(), order.end(), std::size_t{0});
    seeded_shuffle(order.begin(), order.end(), rng);
    std::vector<bool> flip(500, false);
    for (std::size_t i = 0; i < 132; ++i) flip[order[i]] = true;
    {
        std::ofstream ballots(dir / "ballots.jsonl");
        std::ofstream model(dir / "model.jsonl");
        for (std::size_t i = 0; i < 500; ++i) {
            const int a = static_cast<int>(uniform_below(rng, 2)), b = static_cast<int>(uniform_below(rng, 2)),
                      c = static_cast<int>(uniform_below(rng, 2));
            const int truth = a + b + c >= 2 ? 1 : 0;
            const auto eid = 85000000000LL + static_cast<long long>(i);
            ballots << "{\"eid\": " << eid << ", \"expert_1\": " << a << ", \"expert_2\": " << b
                    << ", \"expert_3\": " << c << ", \"journal\": \"J" << i % 7 << "\"}\n";
            model << "{\"eid\": " << eid << ", \"is_ai\": " << (flip[i] ? 1 - truth : truth) << "}\n";
        }
    }
    auto report = consistency_rate(read_model_labels(dir / "model.jsonl"), expert_labels(read_ballots(dir / "ballots.jsonl")));
    out.require(report.total == 500, "total " + std::to_string(report.total));
    out.require(report.disagreements.size() == 132, std::to_string(report.disagreements.size()) + " disagreements");
    out.require(report.rate() == 0.736, "rate " + fmt("%.17g", report.rate()));
    out.require(format_rate(report.rate()) == "0.7360", "formatted " + format_rate(report.rate()));

    int table_errors = 0;
    for (int mask = 0; mask < 8; ++mask) {
        const std::array<int, 3> v = {mask & 1, (mask >> 1) & 1, (mask >> 2) & 1};
        const int enumerated = (v[0] && v[1]) || (v[0] && v[2]) || (v[1] && v[2]) ? 1 : 0;
        if (majority_vote(ExpertBallot{0, v, ""}) != enumerated) ++table_errors;
    }
    out.require(table_errors == 0, std::to_string(table_errors) + " truth-table rows wrong");
    out.detail = "rate " + format_rate(report.rate()) + " (" + std::to_string(report.agreements) + "/" +
                 std::to_string(report.total) + "), truth table 8/8" + (out.detail.empty() ? "" : "; " + out.detail);
    return out;
}

// ------------------------------------------------------------------ streaming

void write_stream_corpus(const fs::path& path, std::size_t n) {
    Rng rng(77);
    const auto a = ddai::testing::word_pool("neuro", 150);
    const auto b = ddai::testing::word_pool("agri", 150);
    std::ofstream out(path, std::ios::binary);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& pool = i % 2 ? a : b;
        PaperRecord r;
        r.eid = static_cast<std::int64_t>(2000000 + i);
        for (int k = 0; k < 6; ++k) r.paper_title += (k ? " " : "") + ddai::testing::pick(pool, rng);
        for (int k = 0; k < 25; ++k) r.paper_summary += (k ? " " : "") + ddai::testing::pick(pool, rng);
        r.author_keywords = {ddai::testing::pick(pool, rng), ddai::testing::pick(pool, rng)};
        r.pub_year = 2000 + static_cast<int>(i % 24);
        out << to_json_line(r) << '\n';
    }
}

bool same_eid_order(const fs::path& input, const fs::path& output, std::size_t expected) {
    LineReader in(input), res(output);
    std::size_t n = 0;
    for (;;) {
        auto a = in.next();
        auto b = res.next();
        if (!a || !b) return !a && !b && n == expected;
        if (parse_record_line(*a).eid != parse_record_line(*b).eid) return false;
        ++n;
    }
}

Outcome streaming_bound() {
    Outcome out;
    ScratchDir dir("acceptance-stream");
    std::vector<std::string> texts;
    for (const auto& ex : ddai::testing::separable_corpus(400, 3)) texts.push_back(assemble_text(ex.record));
    auto vocab = build_vocabulary(texts);
    nn::ModelConfig cfg;
    cfg.input_dim = static_cast<nn::Index>(vocab.size());
    auto model = nn::LstmClassifier<float>::initialized(cfg, 5);
    vocab.save(dir / "vocab.txt");
    nn::save_checkpoint(dir / "model.ckpt", model, vocab.hash());

    write_stream_corpus(dir / "100k.jsonl", 100000);
    write_stream_corpus(dir / "200k.jsonl", 200000);
    auto classify = [&](const std::string& in, const std::string& outname, std::size_t chunk) {
        return ddai::testing::spawn_measured({DDAI_CLI_PATH, "classify", "--model", (dir / "model.ckpt").string(),
                                              "--vocab", (dir / "vocab.txt").string(), "--input", (dir / in).string(),
                                              "--output", (dir / outname).string(), "--chunk-size",
                                              std::to_string(chunk), "--workers", "2"});
    };
    auto small = classify("100k.jsonl", "100k.out", 20000);
    auto large = classify("200k.jsonl", "200k.out", 20000);
    auto fine = classify("100k.jsonl", "100k.fine.out", 1000);
    out.require(small.exit_code == 0 && large.exit_code == 0 && fine.exit_code == 0, "classify failed");
    const double growth = static_cast<double>(large.max_rss_kib) / static_cast<double>(std::max(1L, small.max_rss_kib));
    out.require(growth <= 1.10, "peak RSS grew by " + fmt("%.3f", growth));
    out.require(same_eid_order(dir / "100k.jsonl", dir / "100k.out", 100000) &&
                    same_eid_order(dir / "200k.jsonl", dir / "200k.out", 200000),
                "output order differs from input");
    const bool invariant = ddai::testing::read_file(dir / "100k.out") == ddai::testing::read_file(dir / "100k.fine.out");
    out.require(invariant, "chunk sizes 1000 and 20000 disagree");
    out.detail = "peak RSS " + std::to_string(small.max_rss_kib) + " KiB (100k) vs " +
                 std::to_string(large.max_rss_kib) + " KiB (200k), ratio " + fmt("%.3f", growth) +
                 ", order preserved, chunk-size invariant" + (out.detail.empty() ? "" : "; " + out.detail);
    return out;
}

// ------------------------------------------------------------------ determinism

Outcome determinism() {
    Outcome out;
    ScratchDir dir("acceptance-det");
    ddai::testing::write_labeled(dir / "labeled.jsonl", ddai::testing::separable_corpus(600, 99, 0.05));
    auto run = [&](const std::string& tag) {
        const auto base = ddai::testing::quote(DDAI_CLI_PATH);
        const auto d = dir / tag;
        fs::create_directories(d);
        auto q = [](const fs::path& p) { return ddai::testing::quote(p.string()); };
        const auto data = " --input " + q(dir / "labeled.jsonl") + " --seed 1234 --chunk-size 250";
        const std::vector<std::string> steps = {
            base + " build-vocab" + data + " --output " + q(d / "vocab.txt"),
            base + " train" + data + " --vocab " + q(d / "vocab.txt") + " --output-dir " + q(d) +
                " --epochs 3 --hidden-dim 32",
            base + " eval --model " + q(d / "model.ckpt") + " --vocab " + q(d / "vocab.txt") + " --input " +
                q(dir / "labeled.jsonl") + " --output " + q(d / "eval.csv"),
            base + " classify --model " + q(d / "model.ckpt") + " --vocab " + q(d / "vocab.txt") + " --input " +
                q(dir / "labeled.jsonl") + " --output " + q(d / "classified.jsonl") + " --workers 3 --chunk-size 100",
        };
        for (const auto& s : steps)
            if (ddai::testing::run_shell(s).exit_code != 0) return false;
        return true;
    };
    out.require(run("a") && run("b"), "a pipeline step failed");
    std::string same;
    for (auto f : {"vocab.txt", "model.ckpt", "epoch_log.csv", "eval.csv", "classified.jsonl"}) {
        const auto a = ddai::testing::read_file(dir / "a" / f);
        const auto b = ddai::testing::read_file(dir / "b" / f);
        out.require(!a.empty() && a == b, std::string(f) + " differs");
        if (!a.empty() && a == b) same += (same.empty() ? "" : ", ") + std::string(f);
    }
    out.detail = "byte-identical: " + same + (out.detail.empty() ? "" : "; " + out.detail);
    return out;
}

// ------------------------------------------------------------------ analytics

Outcome analytics_oracles() {
    Outcome out;
    const auto records = ddai::testing::analytics_fixture(1000, 31);
    const auto bins = default_period_bins();

    const auto table = keyword_frequencies(records, bins);
    const auto brute_kw = ddai::testing::brute_keywords(records);
    bool kw_ok = table.counts().size() == brute_kw.size();
    for (const auto& [key, n] : brute_kw) kw_ok = kw_ok && table.count(key.first, key.second) == n;
    out.require(kw_ok, "keyword frequencies differ");

    const auto yearly = yearly_counts(records);
    const auto brute_y = ddai::testing::brute_yearly(records);
    bool y_ok = yearly.size() == brute_y.size();
    for (const auto& [y, c] : brute_y) {
        auto it = yearly.find(y);
        y_ok = y_ok && it != yearly.end() && it->second.documents == c.first && it->second.distinct_authors == c.second;
    }
    out.require(y_ok, "yearly counts differ");

    const auto dist = type_language_distribution(records);
    out.require(dist.types == ddai::testing::brute_types(records), "type distribution differs");
    out.require(dist.languages == ddai::testing::brute_languages(records), "language distribution differs");

    const auto networks = normalize_keyword("Networks");
    out.require(networks == "network", "\"Networks\" normalized to \"" + networks + "\"");
    out.detail = std::to_string(brute_kw.size()) + " (bin, keyword) cells, " + std::to_string(brute_y.size()) +
                 " years, " + std::to_string(dist.languages.size()) + " languages; \"Networks\" -> \"" + networks +
                 "\"" + (out.detail.empty() ? "" : "; " + out.detail);
    return out;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"gradient-correctness", gradient_correctness},
        {"kernel-oracles", kernel_oracles},
        {"learning-sanity", learning_sanity},
        {"metric-oracle", metric_oracle},
        {"expert-consistency-arithmetic", expert_arithmetic},
        {"streaming-bound", streaming_bound},
        {"determinism", determinism},
        {"analytics-oracles", analytics_oracles},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
        failed += o.pass ? 0 : 1;
    }
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
    return failed == 0 ? 0 : 1;
}
