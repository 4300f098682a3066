#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <ostream>

#include "ddai/nn/model.hpp"
#include "ddai/records.hpp"
#include "ddai/vectorizer.hpp"

namespace ddai {

struct Prediction {
    std::int64_t eid = 0;
    int is_ai = 0;
    double p_ai = 0.0;

    bool operator==(const Prediction&) const = default;
};

/// Immutable model + vocabulary pair; safe to share across threads.
class Classifier {
public:
    /// Throws CompatibilityError if the model input width differs from the vocabulary size.
    Classifier(nn::LstmClassifier<float> model, Vocabulary vocab);

    /// Loads both files and checks the checkpoint's vocabulary hash.
    static Classifier from_files(const std::filesystem::path& checkpoint,
                                 const std::filesystem::path& vocabulary);

    /// p_ai = softmax(logits)[1]; is_ai = 1 only if logit 1 strictly exceeds logit 0.
    Prediction predict(const PaperRecord& record) const;

    const nn::LstmClassifier<float>& model() const noexcept { return model_; }
    const Vocabulary& vocabulary() const noexcept { return vocab_; }

private:
    nn::LstmClassifier<float> model_;
    Vocabulary vocab_;
};

Prediction predict_one(const PaperRecord& record, const nn::LstmClassifier<float>& model,
                       const Vocabulary& vocab);

struct StreamOptions {
    std::size_t chunk_size = kDefaultChunkSize;
    std::size_t workers = 1;
    /// Receives one line per skipped row; nullptr silences it.
    std::ostream* log = nullptr;
};

struct StreamSummary {
    std::size_t total = 0;      // rows written
    std::size_t positives = 0;  // rows written with is_ai = 1
    std::size_t skipped = 0;    // unparseable rows

    bool operator==(const StreamSummary&) const = default;
};

/// Classifies `input` chunk by chunk, writing every parseable row with
/// `is_ai` and `p_ai` appended, in input order. Memory is bounded by the
/// chunk size.
StreamSummary classify_stream(const std::filesystem::path& input, const std::filesystem::path& output,
                              const Classifier& classifier, const StreamOptions& options = {});

/// {"total":..,"positives":..,"skipped":..}
std::string summary_json(const StreamSummary& summary);

}  // namespace ddai
