#include "ddai/analytics.hpp"

#include <algorithm>
#include <fstream>

#include "ddai/errors.hpp"

namespace ddai {

std::vector<PeriodBin> default_period_bins() {
    const std::array<std::pair<int, int>, 7> ranges = {
        {{1956, 1965}, {1966, 1975}, {1976, 1985}, {1986, 1995}, {1996, 2005}, {2006, 2015}, {2016, 2023}}};
    std::vector<PeriodBin> bins;
    for (auto [a, b] : ranges) bins.push_back({a, b, std::to_string(a) + "-" + std::to_string(b)});
    return bins;
}

void validate_bins(std::span<const PeriodBin> bins) {
    for (std::size_t i = 0; i < bins.size(); ++i) {
        if (bins[i].start_year > bins[i].end_year)
            throw DomainError("period bin " + bins[i].label + " ends before it starts");
        if (i > 0 && bins[i].start_year <= bins[i - 1].end_year)
            throw DomainError("period bins " + bins[i - 1].label + " and " + bins[i].label +
                              " overlap or are out of order");
    }
}

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::string trim_lower(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (is_space(c)) {
            if (!out.empty() && out.back() != ' ') out.push_back(' ');
        } else {
            out.push_back(ascii_lower(c));
        }
    }
    if (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

}  // namespace

std::string normalize_keyword(std::string_view keyword) {
    std::string out = trim_lower(keyword);
    if (out.empty()) return out;
    const auto word_start = out.rfind(' ') == std::string::npos ? 0 : out.rfind(' ') + 1;
    std::string_view word = std::string_view(out).substr(word_start);
    if (word.size() > 4 && ends_with(word, "ies")) {
        out.replace(out.size() - 3, 3, "y");
    } else if (word.size() > 1 && ends_with(word, "s") && !ends_with(word, "ss") &&
               !ends_with(word, "us") && !ends_with(word, "is")) {
        out.pop_back();
    }
    return out;
}

void KeywordFrequencyTable::add(const std::string& bin, const std::string& keyword, std::uint64_t n) {
    if (n == 0) return;
    counts_[{bin, keyword}] += n;
}

std::uint64_t KeywordFrequencyTable::count(const std::string& bin, const std::string& keyword) const {
    auto it = counts_.find({bin, keyword});
    return it == counts_.end() ? 0 : it->second;
}

std::uint64_t KeywordFrequencyTable::total() const {
    std::uint64_t n = 0;
    for (const auto& [_, c] : counts_) n += c;
    return n;
}

std::vector<std::pair<std::string, std::uint64_t>> KeywordFrequencyTable::top_k(const std::string& bin,
                                                                                std::size_t k) const {
    std::vector<std::pair<std::string, std::uint64_t>> rows;
    for (auto it = counts_.lower_bound({bin, std::string{}}); it != counts_.end() && it->first.first == bin; ++it)
        rows.emplace_back(it->first.second, it->second);
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    if (rows.size() > k) rows.resize(k);
    return rows;
}

KeywordFrequencyTable& KeywordFrequencyTable::merge(const KeywordFrequencyTable& other) {
    for (const auto& [key, n] : other.counts_) counts_[key] += n;
    return *this;
}

KeywordCounter::KeywordCounter(std::vector<PeriodBin> bins) : bins_(std::move(bins)) { validate_bins(bins_); }

void KeywordCounter::add(const PaperRecord& record) {
    auto bin = std::find_if(bins_.begin(), bins_.end(),
                            [&](const PeriodBin& b) { return b.contains(record.pub_year); });
    if (bin == bins_.end()) return;
    for (const auto& kw : record.author_keywords) {
        auto norm = normalize_keyword(kw);
        if (!norm.empty()) table_.add(bin->label, norm);
    }
}

KeywordFrequencyTable keyword_frequencies(std::span<const PaperRecord> records, std::span<const PeriodBin> bins) {
    KeywordCounter counter({bins.begin(), bins.end()});
    for (const auto& r : records) counter.add(r);
    return counter.table();
}

void YearlyCounter::add(const PaperRecord& record) {
    if (record.pub_year == 0) return;
    auto& year = years_[record.pub_year];
    ++year.documents;
    if (!record.authors_ids.empty()) {
        for (const auto& id : record.authors_ids) year.authors.insert("id:" + id);
    } else {
        for (const auto& name : record.authors_names) year.authors.insert("name:" + name);
    }
}

void YearlyCounter::merge(const YearlyCounter& other) {
    for (const auto& [y, data] : other.years_) {
        auto& mine = years_[y];
        mine.documents += data.documents;
        mine.authors.insert(data.authors.begin(), data.authors.end());
    }
}

std::map<int, YearCount> YearlyCounter::result() const {
    std::map<int, YearCount> out;
    for (const auto& [y, data] : years_) out[y] = {data.documents, data.authors.size()};
    return out;
}

std::map<int, YearCount> yearly_counts(std::span<const PaperRecord> records) {
    YearlyCounter counter;
    for (const auto& r : records) counter.add(r);
    return counter.result();
}

std::string_view category_name(PaperCategory c) noexcept {
    switch (c) {
        case PaperCategory::ConferencePaper: return "Conference Paper";
        case PaperCategory::Article: return "Article";
        case PaperCategory::Editorial: return "Editorial";
        case PaperCategory::Review: return "Review";
        case PaperCategory::Others: break;
    }
    return "Others";
}

PaperCategory categorize_paper_type(std::string_view paper_type) {
    const auto norm = trim_lower(paper_type);
    for (auto c : kPaperCategories) {
        if (c == PaperCategory::Others) continue;
        if (norm == trim_lower(category_name(c))) return c;
    }
    return PaperCategory::Others;
}

void TypeLanguageDistribution::add(const PaperRecord& record) {
    if (types.empty())
        for (auto c : kPaperCategories) types[std::string(category_name(c))] = 0;
    ++types[std::string(category_name(categorize_paper_type(record.paper_type)))];
    ++languages[record.language.empty() ? std::string(kUndefinedLanguage) : record.language];
}

void TypeLanguageDistribution::merge(const TypeLanguageDistribution& other) {
    for (const auto& [k, n] : other.types) types[k] += n;
    for (const auto& [k, n] : other.languages) languages[k] += n;
}

TypeLanguageDistribution type_language_distribution(std::span<const PaperRecord> records) {
    TypeLanguageDistribution d;
    for (auto c : kPaperCategories) d.types[std::string(category_name(c))] = 0;
    for (const auto& r : records) d.add(r);
    return d;
}

CorpusAnalytics::CorpusAnalytics(std::vector<PeriodBin> bins) : keywords_(std::move(bins)) {
    for (auto c : kPaperCategories) distribution_.types[std::string(category_name(c))] = 0;
}

void CorpusAnalytics::add(const PaperRecord& record) {
    ++records_;
    keywords_.add(record);
    yearly_.add(record);
    distribution_.add(record);
}

void CorpusAnalytics::merge(const CorpusAnalytics& other) {
    records_ += other.records_;
    keywords_.merge(other.keywords_);
    yearly_.merge(other.yearly_);
    distribution_.merge(other.distribution_);
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

}  // namespace

void CorpusAnalytics::write_report(const std::filesystem::path& dir, std::size_t top_k) const {
    std::filesystem::create_directories(dir);
    {
        auto out = open_csv(dir / "per_year.csv");
        out << "year,documents,distinct_authors\n";
        for (const auto& [y, c] : yearly_.result()) out << y << ',' << c.documents << ',' << c.distinct_authors << '\n';
    }
    {
        auto out = open_csv(dir / "types.csv");
        out << "category,count\n";
        for (auto c : kPaperCategories) {
            const std::string name(category_name(c));
            auto it = distribution_.types.find(name);
            out << name << ',' << (it == distribution_.types.end() ? 0 : it->second) << '\n';
        }
    }
    {
        std::vector<std::pair<std::string, std::uint64_t>> rows(distribution_.languages.begin(),
                                                                 distribution_.languages.end());
        std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
        auto out = open_csv(dir / "languages.csv");
        out << "language,count\n";
        for (const auto& [lang, n] : rows) out << csv_field(lang) << ',' << n << '\n';
    }
    for (const auto& bin : keywords_.bins()) {
        auto out = open_csv(dir / ("keywords_" + bin.label + ".csv"));
        out << "keyword,count\n";
        for (const auto& [kw, n] : keywords_.table().top_k(bin.label, top_k)) out << csv_field(kw) << ',' << n << '\n';
    }
}

}  // namespace ddai
