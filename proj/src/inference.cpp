#include "ddai/inference.hpp"

#include <cmath>
#include <fstream>
#include <optional>
#include <thread>
#include <vector>

#include "ddai/nn/checkpoint.hpp"

namespace ddai {

Classifier::Classifier(nn::LstmClassifier<float> model, Vocabulary vocab)
    : model_(std::move(model)), vocab_(std::move(vocab)) {
    if (model_.config.input_dim != static_cast<nn::Index>(vocab_.size()))
        throw CompatibilityError("model input_dim " + std::to_string(model_.config.input_dim) +
                                 " differs from vocabulary size " + std::to_string(vocab_.size()));
}

Classifier Classifier::from_files(const std::filesystem::path& checkpoint,
                                  const std::filesystem::path& vocabulary) {
    auto vocab = Vocabulary::load(vocabulary);
    auto ckpt = nn::load_checkpoint(checkpoint, vocab.hash());
    return Classifier(std::move(ckpt.model), std::move(vocab));
}

Prediction Classifier::predict(const PaperRecord& record) const {
    return predict_one(record, model_, vocab_);
}

Prediction predict_one(const PaperRecord& record, const nn::LstmClassifier<float>& model,
                       const Vocabulary& vocab) {
    if (model.config.input_dim != static_cast<nn::Index>(vocab.size()))
        throw CompatibilityError("model input_dim differs from vocabulary size");
    CountVector doc = vectorize(assemble_text(record), vocab);
    auto x = nn::to_sparse_batch<float>(std::span<const CountVector>(&doc, 1), model.config.input_dim);
    auto pass = nn::model_forward(model, x, nn::Mode::Eval);
    const double l0 = pass.logits(0, 0);
    const double l1 = pass.logits(1, 0);
    return {record.eid, l1 > l0 ? 1 : 0, 1.0 / (1.0 + std::exp(l0 - l1))};
}

namespace {

struct RowResult {
    std::optional<std::string> line;  // serialized output, or nullopt if skipped
    std::string error;
    bool positive = false;
};

RowResult classify_line(const Classifier& clf, const std::string& line, std::size_t line_no) {
    RowResult r;
    try {
        auto record = parse_record_line(line, line_no);
        auto pred = clf.predict(record);
        Json out = to_json(record);
        out["is_ai"] = pred.is_ai;
        out["p_ai"] = pred.p_ai;
        r.line = out.dump();
        r.positive = pred.is_ai == 1;
    } catch (const ParseError& e) {
        r.error = e.what();
    }
    return r;
}

}  // namespace

StreamSummary classify_stream(const std::filesystem::path& input, const std::filesystem::path& output,
                              const Classifier& classifier, const StreamOptions& options) {
    if (options.chunk_size == 0) throw DomainError("chunk_size must be at least 1");
    LineReader reader(input);
    std::ofstream out(output, std::ios::binary);
    if (!out) throw IoError("cannot write " + output.string());

    const std::size_t workers = std::max<std::size_t>(1, options.workers);
    StreamSummary summary;
    std::vector<std::string> lines;
    std::vector<std::size_t> line_numbers;
    std::vector<RowResult> results;
    lines.reserve(options.chunk_size);

    for (;;) {
        lines.clear();
        line_numbers.clear();
        while (lines.size() < options.chunk_size) {
            auto line = reader.next();
            if (!line) break;
            lines.emplace_back(*line);
            line_numbers.push_back(reader.line_number());
        }
        if (lines.empty()) break;

        results.assign(lines.size(), RowResult{});
        auto work = [&](std::size_t begin, std::size_t step) {
            for (std::size_t i = begin; i < lines.size(); i += step)
                results[i] = classify_line(classifier, lines[i], line_numbers[i]);
        };
        if (workers == 1 || lines.size() < 2 * workers) {
            work(0, 1);
        } else {
            std::vector<std::jthread> pool;
            for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
        }

        for (auto& r : results) {
            if (!r.line) {
                ++summary.skipped;
                if (options.log) *options.log << "skipped " << r.error << '\n';
                continue;
            }
            out << *r.line << '\n';
            ++summary.total;
            summary.positives += r.positive ? 1 : 0;
        }
        if (!out) throw IoError("write failed: " + output.string());
    }
    return summary;
}

std::string summary_json(const StreamSummary& s) {
    Json j = Json::object();
    j["total"] = s.total;
    j["positives"] = s.positives;
    j["skipped"] = s.skipped;
    return j.dump();
}

}  // namespace ddai
