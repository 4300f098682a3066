#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>

namespace ddai {

/// Confusion counts with is_ai = 1 as the positive class. Counts from
/// disjoint shards add.
struct ConfusionCounts {
    std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;

    void add(int prediction, int label);
    std::uint64_t total() const noexcept { return tp + fp + tn + fn; }
    ConfusionCounts& operator+=(const ConfusionCounts& o) noexcept;
    bool operator==(const ConfusionCounts&) const = default;
};

struct MetricsReport {
    ConfusionCounts counts;
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    /// Set when precision, recall or F1 had a zero denominator and was reported as 0.
    bool zero_division = false;

    double mean() const noexcept { return (accuracy + precision + recall + f1) / 4.0; }
};

MetricsReport report_from_counts(const ConfusionCounts& counts);

/// Throws DomainError on length mismatch, empty input or labels outside {0,1}.
MetricsReport score(std::span<const int> predictions, std::span<const int> labels);

inline constexpr const char* kMetricsCsvHeader = "Test Accuracy,Precision,Recall,F1-Score";

/// The four metrics as one CSV row, in header order, no newline.
std::string metrics_csv_row(const MetricsReport& report);

}  // namespace ddai
