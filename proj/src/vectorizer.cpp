#include "ddai/vectorizer.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

namespace ddai {

std::string assemble_text(const PaperRecord& record) {
    std::string out;
    auto append = [&out](const std::string& part) {
        if (part.empty()) return;
        if (!out.empty()) out.push_back(' ');
        out += part;
    };
    append(record.paper_title);
    append(record.paper_summary);
    for (const auto& kw : record.author_keywords) append(kw);
    return out;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    for_each_token(text, [&out](std::string_view tok) { out.emplace_back(tok); });
    return out;
}

std::int64_t CountVector::total() const {
    std::int64_t sum = 0;
    for (const auto& e : entries) sum += e.count;
    return sum;
}

Vocabulary::Vocabulary(std::vector<std::string> tokens, std::optional<std::size_t> max_features,
                       std::size_t documents)
    : tokens_(std::move(tokens)), max_features_(max_features), documents_(documents) {
    for (std::size_t i = 1; i < tokens_.size(); ++i)
        if (!(tokens_[i - 1] < tokens_[i]))
            throw DomainError("vocabulary tokens must be strictly ascending at index " +
                              std::to_string(i));
    if (tokens_.size() > static_cast<std::size_t>(INT32_MAX))
        throw DomainError("vocabulary too large");
}

std::optional<std::int32_t> Vocabulary::index_of(std::string_view token) const {
    auto it = std::lower_bound(tokens_.begin(), tokens_.end(), token,
                               [](const std::string& a, std::string_view b) { return a < b; });
    if (it == tokens_.end() || *it != token) return std::nullopt;
    return static_cast<std::int32_t>(it - tokens_.begin());
}

std::uint64_t Vocabulary::hash() const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&h](unsigned char c) {
        h ^= c;
        h *= 0x100000001b3ull;
    };
    for (const auto& t : tokens_) {
        for (char c : t) mix(static_cast<unsigned char>(c));
        mix('\n');
    }
    return h;
}

void Vocabulary::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "#ddai-vocab max_features="
        << (max_features_ ? std::to_string(*max_features_) : std::string("none"))
        << " documents=" << documents_ << '\n';
    for (const auto& t : tokens_) out << t << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

namespace {

void header_value(std::string_view header, std::string_view key, bool allow_none,
                  std::optional<std::size_t>& out) {
    auto pos = header.find(key);
    if (pos == std::string_view::npos) throw ParseError(1, std::string(key), "vocabulary header lacks " + std::string(key));
    auto value = header.substr(pos + key.size());
    value = value.substr(0, value.find(' '));
    if (allow_none && value == "none") {
        out.reset();
        return;
    }
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || ptr != value.data() + value.size())
        throw ParseError(1, std::string(key), "bad vocabulary header value for " + std::string(key));
    out = v;
}

}  // namespace

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string header;
    if (!std::getline(in, header) || header.rfind("#ddai-vocab", 0) != 0)
        throw ParseError(1, "", "not a vocabulary file: " + path.string());
    std::optional<std::size_t> max_features, documents;
    header_value(header, "max_features=", true, max_features);
    header_value(header, "documents=", false, documents);

    std::vector<std::string> tokens;
    std::string line;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) throw ParseError(line_no, "token", "empty token");
        if (!tokens.empty() && !(tokens.back() < line))
            throw ParseError(line_no, "token", "tokens out of order");
        tokens.push_back(std::move(line));
    }
    return Vocabulary(std::move(tokens), max_features, *documents);
}

void VocabularyBuilder::add(std::string_view text) {
    ++documents_;
    for_each_token(text, [this](std::string_view tok) {
        auto it = counts_.find(tok);
        if (it == counts_.end())
            counts_.emplace(std::string(tok), 1);
        else
            ++it->second;
    });
}

Vocabulary VocabularyBuilder::build(std::optional<std::size_t> max_features) const {
    std::vector<std::string> kept;
    if (!max_features || counts_.size() <= *max_features) {
        kept.reserve(counts_.size());
        for (const auto& [tok, n] : counts_) kept.push_back(tok);
        return Vocabulary(std::move(kept), max_features, documents_);
    }
    // std::map iteration is already lexicographic, so a stable sort by
    // descending frequency breaks ties by token text.
    std::vector<std::pair<const std::string*, std::int64_t>> ranked;
    ranked.reserve(counts_.size());
    for (const auto& [tok, n] : counts_) ranked.emplace_back(&tok, n);
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    ranked.resize(*max_features);
    kept.reserve(ranked.size());
    for (const auto& [tok, n] : ranked) kept.push_back(*tok);
    std::sort(kept.begin(), kept.end());
    return Vocabulary(std::move(kept), max_features, documents_);
}

Vocabulary build_vocabulary(std::span<const std::string> corpus,
                            std::optional<std::size_t> max_features) {
    VocabularyBuilder builder;
    for (const auto& text : corpus) builder.add(text);
    return builder.build(max_features);
}

CountVector vectorize(std::string_view text, const Vocabulary& vocab) {
    std::vector<std::int32_t> hits;
    for_each_token(text, [&](std::string_view tok) {
        if (auto idx = vocab.index_of(tok)) hits.push_back(*idx);
    });
    std::sort(hits.begin(), hits.end());
    CountVector out;
    for (auto idx : hits) {
        if (!out.entries.empty() && out.entries.back().index == idx)
            ++out.entries.back().count;
        else
            out.entries.push_back({idx, 1});
    }
    return out;
}

}  // namespace ddai
