#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ddai/records.hpp"

namespace ddai {

inline constexpr std::size_t kDefaultMaxFeatures = 65536;

/// Title, summary and keywords joined by single spaces; empty parts are skipped.
std::string assemble_text(const PaperRecord& record);

/// Calls `emit(std::string_view)` for every token of `text`: lowercased maximal
/// alphanumeric runs of at least two characters. Bytes >= 0x80 count as
/// alphanumeric so UTF-8 words survive; length is measured in code points.
template <class Emit>
void for_each_token(std::string_view text, Emit&& emit) {
    std::string token;
    std::size_t code_points = 0;
    auto flush = [&] {
        if (code_points >= 2) emit(std::string_view(token));
        token.clear();
        code_points = 0;
    };
    for (char ch : text) {
        auto c = static_cast<unsigned char>(ch);
        if (c >= 0x80) {
            token.push_back(ch);
            if ((c & 0xC0) != 0x80) ++code_points;
        } else if ((c >= '0' && c <= '9') || (c >= 'a' && c <= 'z')) {
            token.push_back(ch);
            ++code_points;
        } else if (c >= 'A' && c <= 'Z') {
            token.push_back(static_cast<char>(c - 'A' + 'a'));
            ++code_points;
        } else {
            flush();
        }
    }
    flush();
}

std::vector<std::string> tokenize(std::string_view text);

/// Sparse token counts of one document. Indices strictly increasing, counts >= 1.
struct CountVector {
    struct Entry {
        std::int32_t index = 0;
        std::int32_t count = 0;
        bool operator==(const Entry&) const = default;
    };
    std::vector<Entry> entries;

    std::int64_t total() const;
    bool operator==(const CountVector&) const = default;
};

/// Frozen token -> index map. Index order is ascending byte-lexicographic
/// order of the token text, with no gaps.
class Vocabulary {
public:
    Vocabulary() = default;

    /// `tokens` must be strictly ascending.
    Vocabulary(std::vector<std::string> tokens, std::optional<std::size_t> max_features,
               std::size_t documents);

    std::size_t size() const noexcept { return tokens_.size(); }
    bool empty() const noexcept { return tokens_.empty(); }
    std::optional<std::int32_t> index_of(std::string_view token) const;
    const std::string& token(std::size_t index) const { return tokens_.at(index); }
    const std::vector<std::string>& tokens() const noexcept { return tokens_; }
    std::optional<std::size_t> max_features() const noexcept { return max_features_; }
    std::size_t documents() const noexcept { return documents_; }

    /// FNV-1a over the newline-terminated tokens. Stored in checkpoints.
    std::uint64_t hash() const noexcept;

    /// Header line, then one token per line: the k-th token line holds index k-1.
    void save(const std::filesystem::path& path) const;
    static Vocabulary load(const std::filesystem::path& path);

    bool operator==(const Vocabulary& other) const {
        return tokens_ == other.tokens_ && max_features_ == other.max_features_ &&
               documents_ == other.documents_;
    }

private:
    std::vector<std::string> tokens_;
    std::optional<std::size_t> max_features_;
    std::size_t documents_ = 0;
};

/// Single-writer accumulation of corpus-wide term frequencies.
class VocabularyBuilder {
public:
    void add(std::string_view text);
    std::size_t documents() const noexcept { return documents_; }

    /// Keeps every token, or the `max_features` most frequent (ties broken by
    /// token text), indexed lexicographically.
    Vocabulary build(std::optional<std::size_t> max_features) const;

private:
    std::map<std::string, std::int64_t, std::less<>> counts_;
    std::size_t documents_ = 0;
};

Vocabulary build_vocabulary(std::span<const std::string> corpus,
                            std::optional<std::size_t> max_features = std::nullopt);

/// Out-of-vocabulary tokens are dropped.
CountVector vectorize(std::string_view text, const Vocabulary& vocab);

}  // namespace ddai
