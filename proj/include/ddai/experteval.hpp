#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace ddai {

/// Three independent expert labels for one paper.
struct ExpertBallot {
    std::int64_t eid = 0;
    std::array<int, 3> votes{};
    std::string journal;  // optional
};

/// 1 iff at least two of the three votes are 1.
int majority_vote(const ExpertBallot& ballot);
/// Throws DomainError unless there are exactly three votes in {0,1}.
int majority_vote(std::span<const int> votes);

struct Disagreement {
    std::int64_t eid = 0;
    int model_label = 0;
    int expert_label = 0;

    bool operator==(const Disagreement&) const = default;
};

struct ConsistencyReport {
    std::size_t agreements = 0;
    std::size_t total = 0;
    std::vector<Disagreement> disagreements;  // ascending eid

    double rate() const noexcept {
        return total == 0 ? 0.0 : static_cast<double>(agreements) / static_cast<double>(total);
    }
};

using LabelMap = std::map<std::int64_t, int>;

/// Both maps must cover the same, nonempty eid set.
ConsistencyReport consistency_rate(const LabelMap& model_labels, const LabelMap& expert_labels);

/// Majority label per ballot.
LabelMap expert_labels(std::span<const ExpertBallot> ballots);

/// Line-delimited ballots: {"eid":..,"expert_1":0|1,"expert_2":..,"expert_3":..,"journal":".."}.
std::vector<ExpertBallot> read_ballots(const std::filesystem::path& path);

/// eid -> is_ai from a classification output file.
LabelMap read_model_labels(const std::filesystem::path& path);

/// Four decimal places, e.g. "0.7360".
std::string format_rate(double rate);

/// eid,model_is_ai,expert_is_ai
void write_disagreements_csv(std::ostream& out, const ConsistencyReport& report);

}  // namespace ddai
