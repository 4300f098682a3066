#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "json.hpp"

#include "ddai/errors.hpp"

namespace ddai {

using Json = nlohmann::ordered_json;

inline constexpr std::size_t kDefaultChunkSize = 20000;
inline constexpr int kMinPubYear = 1850;
inline constexpr int kMaxPubYear = 2100;

/// One scholarly paper's metadata row. Field names on disk follow the
/// upstream schema (`paper_authors_name`, `author_keyword_json`, ...).
struct PaperRecord {
    std::int64_t eid = 0;
    std::string paper_title;
    std::string source_title;
    std::string paper_summary;
    std::vector<std::string> author_keywords;
    int pub_year = 0;  // 0 = unknown
    std::int64_t cited_num = 0;
    std::string paper_type;
    std::string language;
    std::vector<std::string> authors_names;
    std::vector<std::string> authors_ids;
    /// Fields the pipeline does not interpret, kept in input order and re-emitted.
    Json extras = Json::object();

    bool operator==(const PaperRecord&) const = default;
};

struct LabeledExample {
    PaperRecord record;
    int is_ai = 0;

    bool operator==(const LabeledExample&) const = default;
};

template <class T>
struct Chunk {
    std::size_t index = 0;
    std::vector<T> records;
};

using RecordChunk = Chunk<PaperRecord>;
using LabeledChunk = Chunk<LabeledExample>;

/// Validates and normalizes a parsed row. Missing summary/keywords become
/// empty, missing numbers become 0. `line` is only used in error messages.
PaperRecord coerce_record(const Json& raw, std::size_t line = 0);

/// Throws DomainError unless label is 0 or 1.
LabeledExample attach_label(PaperRecord record, int label);

/// Reads the `is_ai` field of a raw row (int, bool or "0"/"1").
LabeledExample coerce_labeled(const Json& raw, std::size_t line = 0);

PaperRecord parse_record_line(std::string_view line, std::size_t line_no = 0);
LabeledExample parse_labeled_line(std::string_view line, std::size_t line_no = 0);

Json to_json(const PaperRecord& record);
Json to_json(const LabeledExample& example);

/// Single-line serialization, no trailing newline.
std::string to_json_line(const PaperRecord& record);
std::string to_json_line(const LabeledExample& example);

/// Line-by-line reader that tracks 1-based line numbers and skips blank lines.
class LineReader {
public:
    explicit LineReader(const std::filesystem::path& path);

    /// Next non-blank line, or nullopt at end of file.
    std::optional<std::string_view> next();
    std::size_t line_number() const noexcept { return line_no_; }

private:
    std::ifstream in_;
    std::string buffer_;
    std::size_t line_no_ = 0;
};

struct ReaderOptions {
    /// Reject a second row with an already-seen eid. Costs memory proportional
    /// to the number of distinct eids, so bulk streaming turns it off.
    bool unique_eids = true;
};

/// Streams a line-delimited record file in chunks of at most `chunk_size`
/// records. Only one chunk is materialized at a time.
template <class T>
class ChunkReader {
public:
    ChunkReader(const std::filesystem::path& path, std::size_t chunk_size = kDefaultChunkSize,
                ReaderOptions options = {})
        : lines_(path), chunk_size_(chunk_size), options_(options) {
        if (chunk_size_ == 0) throw DomainError("chunk_size must be at least 1");
    }

    std::optional<Chunk<T>> next() {
        Chunk<T> chunk;
        chunk.index = next_index_;
        while (chunk.records.size() < chunk_size_) {
            auto line = lines_.next();
            if (!line) break;
            chunk.records.push_back(parse(*line, lines_.line_number()));
        }
        if (chunk.records.empty()) return std::nullopt;
        ++next_index_;
        return chunk;
    }

private:
    T parse(std::string_view line, std::size_t line_no) {
        T item = [&] {
            if constexpr (std::is_same_v<T, LabeledExample>)
                return parse_labeled_line(line, line_no);
            else
                return parse_record_line(line, line_no);
        }();
        if (options_.unique_eids) {
            std::int64_t eid;
            if constexpr (std::is_same_v<T, LabeledExample>)
                eid = item.record.eid;
            else
                eid = item.eid;
            if (!seen_.insert(eid).second)
                throw ParseError(line_no, "eid", "duplicate eid " + std::to_string(eid));
        }
        return item;
    }

    LineReader lines_;
    std::size_t chunk_size_;
    ReaderOptions options_;
    std::size_t next_index_ = 0;
    std::unordered_set<std::int64_t> seen_;
};

using RecordReader = ChunkReader<PaperRecord>;
using LabeledReader = ChunkReader<LabeledExample>;

/// Writes one record per line.
void write_records(const std::filesystem::path& path, std::span<const PaperRecord> records);
void write_records(const std::filesystem::path& path, std::span<const LabeledExample> records);

/// Reads the whole file. Convenience for small inputs and tests.
std::vector<PaperRecord> read_all_records(const std::filesystem::path& path);
std::vector<LabeledExample> read_all_labeled(const std::filesystem::path& path);

}  // namespace ddai
