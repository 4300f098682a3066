#include "ddai/metrics.hpp"

#include <cstdio>

#include "ddai/errors.hpp"

namespace ddai {

void ConfusionCounts::add(int prediction, int label) {
    if ((prediction != 0 && prediction != 1) || (label != 0 && label != 1))
        throw DomainError("predictions and labels must be 0 or 1");
    if (prediction == 1)
        ++(label == 1 ? tp : fp);
    else
        ++(label == 1 ? fn : tn);
}

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) noexcept {
    tp += o.tp;
    fp += o.fp;
    tn += o.tn;
    fn += o.fn;
    return *this;
}

MetricsReport report_from_counts(const ConfusionCounts& c) {
    MetricsReport r;
    r.counts = c;
    const auto total = c.total();
    if (total == 0) throw DomainError("cannot score an empty set");
    auto ratio = [&r](std::uint64_t num, std::uint64_t den) {
        if (den == 0) {
            r.zero_division = true;
            return 0.0;
        }
        return static_cast<double>(num) / static_cast<double>(den);
    };
    r.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(total);
    r.precision = ratio(c.tp, c.tp + c.fp);
    r.recall = ratio(c.tp, c.tp + c.fn);
    if (r.precision + r.recall == 0.0) {
        r.zero_division = true;
        r.f1 = 0.0;
    } else {
        r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
    }
    return r;
}

MetricsReport score(std::span<const int> predictions, std::span<const int> labels) {
    if (predictions.size() != labels.size())
        throw DomainError("score: " + std::to_string(predictions.size()) + " predictions vs " +
                          std::to_string(labels.size()) + " labels");
    if (predictions.empty()) throw DomainError("score: empty input");
    ConfusionCounts c;
    for (std::size_t i = 0; i < predictions.size(); ++i) c.add(predictions[i], labels[i]);
    return report_from_counts(c);
}

std::string metrics_csv_row(const MetricsReport& r) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%.4f,%.4f,%.4f,%.4f", r.accuracy, r.precision, r.recall, r.f1);
    return buf;
}

}  // namespace ddai
