#include "ddai/records.hpp"

#include <array>
#include <charconv>
#include <cmath>

namespace ddai {
namespace {

constexpr std::array<std::string_view, 11> kKnownFields = {
    "eid",           "paper_title",        "source_title",     "paper_summary",
    "paper_authors_name", "paper_authors_id", "author_keyword_json", "pub_year",
    "cited_num",     "paper_type",         "language"};

bool is_known(std::string_view key) {
    for (auto k : kKnownFields)
        if (k == key) return true;
    return false;
}

bool absent(const Json& raw, const char* key) {
    auto it = raw.find(key);
    return it == raw.end() || it->is_null();
}

std::string as_text(const Json& value) {
    if (value.is_null()) return {};
    if (value.is_string()) return value.get<std::string>();
    return value.dump();
}

std::string text_field(const Json& raw, const char* key) {
    auto it = raw.find(key);
    return it == raw.end() ? std::string{} : as_text(*it);
}

std::optional<std::int64_t> parse_integer(const Json& value) {
    if (value.is_number_integer()) return value.get<std::int64_t>();
    if (value.is_number_unsigned()) {
        auto u = value.get<std::uint64_t>();
        if (u > static_cast<std::uint64_t>(INT64_MAX)) return std::nullopt;
        return static_cast<std::int64_t>(u);
    }
    if (value.is_number_float()) {
        double d = value.get<double>();
        if (!std::isfinite(d) || std::trunc(d) != d || std::fabs(d) > 9.0e18) return std::nullopt;
        return static_cast<std::int64_t>(d);
    }
    if (value.is_string()) {
        const auto& s = value.get_ref<const std::string&>();
        std::int64_t out = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
        if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
        return out;
    }
    return std::nullopt;
}

std::int64_t integer_field(const Json& raw, const char* key, std::size_t line) {
    auto it = raw.find(key);
    if (it == raw.end() || it->is_null()) return 0;
    if (it->is_string() && it->get_ref<const std::string&>().empty()) return 0;
    auto v = parse_integer(*it);
    if (!v) throw ParseError(line, key, std::string(key) + ": not an integer: " + it->dump());
    return *v;
}

std::vector<std::string> list_field(const Json& raw, const char* key, std::size_t line) {
    auto it = raw.find(key);
    if (it == raw.end() || it->is_null()) return {};
    Json list;
    if (it->is_array()) {
        list = *it;
    } else if (it->is_string()) {
        const auto& s = it->get_ref<const std::string&>();
        if (s.find_first_not_of(" \t\r\n") == std::string::npos) return {};
        try {
            list = Json::parse(s);
        } catch (const Json::parse_error&) {
            throw ParseError(line, key, std::string(key) + ": not a JSON list");
        }
        if (list.is_null()) return {};
    } else {
        throw ParseError(line, key, std::string(key) + ": expected a list");
    }
    if (!list.is_array()) throw ParseError(line, key, std::string(key) + ": expected a list");
    std::vector<std::string> out;
    out.reserve(list.size());
    for (const auto& item : list)
        if (!item.is_null()) out.push_back(as_text(item));
    return out;
}

std::string dump_list(const std::vector<std::string>& items) {
    Json list = Json::array();
    for (const auto& s : items) list.push_back(s);
    return list.dump();
}

Json parse_object(std::string_view line, std::size_t line_no) {
    Json raw;
    try {
        raw = Json::parse(line);
    } catch (const Json::parse_error& e) {
        throw ParseError(line_no, "", std::string("invalid JSON: ") + e.what());
    }
    if (!raw.is_object()) throw ParseError(line_no, "", "row is not a JSON object");
    return raw;
}

}  // namespace

PaperRecord coerce_record(const Json& raw, std::size_t line) {
    if (!raw.is_object()) throw ParseError(line, "", "row is not a JSON object");
    if (absent(raw, "eid")) throw ParseError(line, "eid", "missing eid");
    if (absent(raw, "paper_title")) throw ParseError(line, "paper_title", "missing paper_title");

    PaperRecord rec;
    auto eid = parse_integer(raw.at("eid"));
    if (!eid) throw ParseError(line, "eid", "eid: not an integer: " + raw.at("eid").dump());
    rec.eid = *eid;
    rec.paper_title = text_field(raw, "paper_title");
    rec.source_title = text_field(raw, "source_title");
    rec.paper_summary = text_field(raw, "paper_summary");
    rec.author_keywords = list_field(raw, "author_keyword_json", line);
    rec.authors_names = list_field(raw, "paper_authors_name", line);
    rec.authors_ids = list_field(raw, "paper_authors_id", line);

    auto year = integer_field(raw, "pub_year", line);
    if (year != 0 && (year < kMinPubYear || year > kMaxPubYear))
        throw ParseError(line, "pub_year", "pub_year out of range: " + std::to_string(year));
    rec.pub_year = static_cast<int>(year);

    rec.cited_num = integer_field(raw, "cited_num", line);
    if (rec.cited_num < 0)
        throw ParseError(line, "cited_num", "cited_num is negative: " + std::to_string(rec.cited_num));

    rec.paper_type = text_field(raw, "paper_type");
    rec.language = text_field(raw, "language");

    for (auto it = raw.begin(); it != raw.end(); ++it)
        if (!is_known(it.key())) rec.extras[it.key()] = it.value();
    return rec;
}

LabeledExample attach_label(PaperRecord record, int label) {
    if (label != 0 && label != 1)
        throw DomainError("is_ai label must be 0 or 1, got " + std::to_string(label));
    return LabeledExample{std::move(record), label};
}

LabeledExample coerce_labeled(const Json& raw, std::size_t line) {
    auto rec = coerce_record(raw, line);
    auto it = rec.extras.find("is_ai");
    if (it == rec.extras.end() || it->is_null()) throw ParseError(line, "is_ai", "missing is_ai");
    std::optional<std::int64_t> label;
    if (it->is_boolean())
        label = it->get<bool>() ? 1 : 0;
    else
        label = parse_integer(*it);
    if (!label || (*label != 0 && *label != 1))
        throw ParseError(line, "is_ai", "is_ai must be 0 or 1, got " + it->dump());
    rec.extras.erase("is_ai");
    return attach_label(std::move(rec), static_cast<int>(*label));
}

PaperRecord parse_record_line(std::string_view line, std::size_t line_no) {
    return coerce_record(parse_object(line, line_no), line_no);
}

LabeledExample parse_labeled_line(std::string_view line, std::size_t line_no) {
    return coerce_labeled(parse_object(line, line_no), line_no);
}

Json to_json(const PaperRecord& r) {
    Json out = Json::object();
    out["eid"] = r.eid;
    out["paper_title"] = r.paper_title;
    out["source_title"] = r.source_title;
    out["paper_summary"] = r.paper_summary;
    out["paper_authors_name"] = dump_list(r.authors_names);
    out["paper_authors_id"] = dump_list(r.authors_ids);
    out["author_keyword_json"] = dump_list(r.author_keywords);
    out["pub_year"] = r.pub_year;
    out["cited_num"] = r.cited_num;
    out["paper_type"] = r.paper_type;
    out["language"] = r.language;
    for (auto it = r.extras.begin(); it != r.extras.end(); ++it) out[it.key()] = it.value();
    return out;
}

Json to_json(const LabeledExample& e) {
    Json out = to_json(e.record);
    out["is_ai"] = e.is_ai;
    return out;
}

std::string to_json_line(const PaperRecord& record) { return to_json(record).dump(); }
std::string to_json_line(const LabeledExample& example) { return to_json(example).dump(); }

LineReader::LineReader(const std::filesystem::path& path) : in_(path, std::ios::binary) {
    if (!in_) throw IoError("cannot open " + path.string());
}

std::optional<std::string_view> LineReader::next() {
    while (std::getline(in_, buffer_)) {
        ++line_no_;
        if (!buffer_.empty() && buffer_.back() == '\r') buffer_.pop_back();
        if (buffer_.find_first_not_of(" \t") == std::string::npos) continue;
        return std::string_view(buffer_);
    }
    if (in_.bad()) throw IoError("read error after line " + std::to_string(line_no_));
    return std::nullopt;
}

namespace {

template <class T>
void write_lines(const std::filesystem::path& path, std::span<const T> items) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto& item : items) out << to_json_line(item) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

template <class T>
std::vector<T> read_all(const std::filesystem::path& path) {
    ChunkReader<T> reader(path);
    std::vector<T> out;
    while (auto chunk = reader.next())
        for (auto& r : chunk->records) out.push_back(std::move(r));
    return out;
}

}  // namespace

void write_records(const std::filesystem::path& path, std::span<const PaperRecord> records) {
    write_lines(path, records);
}

void write_records(const std::filesystem::path& path, std::span<const LabeledExample> records) {
    write_lines(path, records);
}

std::vector<PaperRecord> read_all_records(const std::filesystem::path& path) {
    return read_all<PaperRecord>(path);
}

std::vector<LabeledExample> read_all_labeled(const std::filesystem::path& path) {
    return read_all<LabeledExample>(path);
}

}  // namespace ddai
