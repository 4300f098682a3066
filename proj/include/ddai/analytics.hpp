#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "ddai/records.hpp"

namespace ddai {

/// Inclusive year range.
struct PeriodBin {
    int start_year = 0;
    int end_year = 0;
    std::string label;

    bool contains(int year) const noexcept { return year >= start_year && year <= end_year; }
    bool operator==(const PeriodBin&) const = default;
};

/// Decade bins from 1956 to 2023. The 1976 bin ends at 1985 so that 1986
/// falls in exactly one bin.
std::vector<PeriodBin> default_period_bins();

/// Throws DomainError unless each bin has start <= end and bins are ordered
/// and disjoint.
void validate_bins(std::span<const PeriodBin> bins);

/// Lowercase, trim, collapse inner whitespace and singularize the last word:
/// "...ies" -> "...y" for words longer than 4, otherwise drop one trailing "s"
/// unless the word ends in "ss", "us" or "is". Empty result means "drop".
std::string normalize_keyword(std::string_view keyword);

class KeywordFrequencyTable {
public:
    using Key = std::pair<std::string, std::string>;  // (bin label, keyword)

    void add(const std::string& bin, const std::string& keyword, std::uint64_t n = 1);
    std::uint64_t count(const std::string& bin, const std::string& keyword) const;
    std::uint64_t total() const;
    const std::map<Key, std::uint64_t>& counts() const noexcept { return counts_; }

    /// Highest counts first, ties by keyword text.
    std::vector<std::pair<std::string, std::uint64_t>> top_k(const std::string& bin, std::size_t k) const;

    KeywordFrequencyTable& merge(const KeywordFrequencyTable& other);
    bool operator==(const KeywordFrequencyTable&) const = default;

private:
    std::map<Key, std::uint64_t> counts_;
};

/// Streaming form of keyword_frequencies.
class KeywordCounter {
public:
    explicit KeywordCounter(std::vector<PeriodBin> bins);
    void add(const PaperRecord& record);
    const KeywordFrequencyTable& table() const noexcept { return table_; }
    const std::vector<PeriodBin>& bins() const noexcept { return bins_; }
    void merge(const KeywordCounter& other) { table_.merge(other.table_); }

private:
    std::vector<PeriodBin> bins_;
    KeywordFrequencyTable table_;
};

KeywordFrequencyTable keyword_frequencies(std::span<const PaperRecord> records,
                                          std::span<const PeriodBin> bins);

struct YearCount {
    std::uint64_t documents = 0;
    std::uint64_t distinct_authors = 0;
    bool operator==(const YearCount&) const = default;
};

/// Per-year document counts and distinct authors. Authors are keyed by
/// authors_ids, or by exact name for records without ids. Unknown years (0)
/// are not counted.
class YearlyCounter {
public:
    void add(const PaperRecord& record);
    void merge(const YearlyCounter& other);
    std::map<int, YearCount> result() const;

private:
    struct Year {
        std::uint64_t documents = 0;
        std::unordered_set<std::string> authors;
    };
    std::map<int, Year> years_;
};

std::map<int, YearCount> yearly_counts(std::span<const PaperRecord> records);

enum class PaperCategory { ConferencePaper, Article, Editorial, Review, Others };

inline constexpr std::array<PaperCategory, 5> kPaperCategories = {
    PaperCategory::ConferencePaper, PaperCategory::Article, PaperCategory::Editorial,
    PaperCategory::Review, PaperCategory::Others};

/// Types listed under "Others" in the corpus documentation. Anything not in
/// the four main categories lands in Others as well.
inline constexpr std::array<std::string_view, 12> kOtherPaperTypes = {
    "Abstract", "Report",  "Article in Press", "Book", "Book Chapter", "Business Article",
    "Conference Review", "Data Paper", "Erratum", "Note", "Retraction", "Short Survey"};

std::string_view category_name(PaperCategory c) noexcept;
/// Case-insensitive, whitespace-trimmed.
PaperCategory categorize_paper_type(std::string_view paper_type);

inline constexpr std::string_view kUndefinedLanguage = "undefined";

struct TypeLanguageDistribution {
    std::map<std::string, std::uint64_t> types;      // category name -> count
    std::map<std::string, std::uint64_t> languages;  // verbatim, "" -> "undefined"

    void add(const PaperRecord& record);
    void merge(const TypeLanguageDistribution& other);
    bool operator==(const TypeLanguageDistribution&) const = default;
};

TypeLanguageDistribution type_language_distribution(std::span<const PaperRecord> records);

/// All corpus statistics in one streaming pass.
class CorpusAnalytics {
public:
    explicit CorpusAnalytics(std::vector<PeriodBin> bins = default_period_bins());

    void add(const PaperRecord& record);
    void merge(const CorpusAnalytics& other);
    std::size_t records() const noexcept { return records_; }

    const KeywordCounter& keywords() const noexcept { return keywords_; }
    const YearlyCounter& yearly() const noexcept { return yearly_; }
    const TypeLanguageDistribution& distribution() const noexcept { return distribution_; }

    /// per_year.csv, types.csv, languages.csv and keywords_<bin>.csv (top_k rows each).
    void write_report(const std::filesystem::path& dir, std::size_t top_k = 100) const;

private:
    std::size_t records_ = 0;
    KeywordCounter keywords_;
    YearlyCounter yearly_;
    TypeLanguageDistribution distribution_;
};

}  // namespace ddai
