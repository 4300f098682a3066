#pragma once

// Synthetic corpora and scratch directories shared by the test binaries.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "ddai/records.hpp"
#include "ddai/seed.hpp"

namespace ddai::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class ScratchDir {
public:
    explicit ScratchDir(const std::string& tag) {
        Rng rng(std::random_device{}());
        path_ = std::filesystem::temp_directory_path() / ("ddai-" + tag + "-" + std::to_string(rng() % 1000000000));
        std::filesystem::create_directories(path_);
    }
    ~ScratchDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

inline void write_labeled(const std::filesystem::path& p, const std::vector<LabeledExample>& examples) {
    std::ofstream out(p, std::ios::binary);
    for (const auto& ex : examples) {
        auto j = to_json(ex.record);
        j["is_ai"] = ex.is_ai;
        out << j.dump() << '\n';
    }
}

inline std::string pick(const std::vector<std::string>& pool, Rng& rng) {
    return pool[uniform_below(rng, pool.size())];
}

inline std::vector<std::string> word_pool(const std::string& stem, int n) {
    std::vector<std::string> out;
    for (int i = 0; i < n; ++i) out.push_back(stem + std::to_string(i));
    return out;
}

/// Two classes with disjoint token sets: AI docs draw from "neuro*"
/// words, the rest from "agri*" words. `noise` flips each label with that
/// probability after generation.
inline std::vector<LabeledExample> separable_corpus(std::size_t n, std::uint64_t seed, double noise = 0.0,
                                                    int words_per_class = 150) {
    Rng rng(seed);
    const auto ai_words = word_pool("neuro", words_per_class);
    const auto other_words = word_pool("agri", words_per_class);
    std::vector<LabeledExample> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int label = static_cast<int>(i % 2);
        const auto& pool = label == 1 ? ai_words : other_words;
        PaperRecord r;
        r.eid = static_cast<std::int64_t>(1000 + i);
        auto sentence = [&](int len) {
            std::string s;
            for (int k = 0; k < len; ++k) s += (k ? " " : "") + pick(pool, rng);
            return s;
        };
        r.paper_title = sentence(4 + static_cast<int>(uniform_below(rng, 5)));
        if (uniform_below(rng, 10) != 0) r.paper_summary = sentence(10 + static_cast<int>(uniform_below(rng, 20)));
        const auto kws = uniform_below(rng, 4);
        for (std::uint64_t k = 0; k < kws; ++k) r.author_keywords.push_back(pick(pool, rng));
        r.pub_year = 1990 + static_cast<int>(uniform_below(rng, 34));
        r.paper_type = label == 1 ? "Conference Paper" : "Article";
        r.language = "English";
        int y = label;
        if (noise > 0.0 && uniform01(rng) < noise) y = 1 - y;
        out.push_back({std::move(r), y});
    }
    return out;
}

/// Varied metadata for analytics oracles: years (some unknown or outside
/// every bin), shared author ids, name-only authors, mixed-case plural
/// keywords, assorted paper types and languages.
inline std::vector<PaperRecord> analytics_fixture(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    const std::vector<std::string> keywords = {
        "Neural Networks", "neural network", "Deep Learning", "Support Vector Machines", "Ontologies",
        "ontology",        "Fuzzy Sets",     "process",       "Analysis",               "Genetic Algorithms",
        "  Robotics ",     "Bayes",          "Agents",        "agent",                  "Status"};
    const std::vector<std::string> types = {"Conference Paper", "Article", "Editorial", "Review", "Book Chapter",
                                            "Erratum", "Note", "article", "", "Short Survey"};
    const std::vector<std::string> languages = {"English", "English", "Chinese", "German", "", "Russian", "French"};
    std::vector<PaperRecord> out;
    for (std::size_t i = 0; i < n; ++i) {
        PaperRecord r;
        r.eid = static_cast<std::int64_t>(i + 1);
        r.paper_title = "paper " + std::to_string(i);
        const auto roll = uniform_below(rng, 20);
        r.pub_year = roll == 0 ? 0 : roll == 1 ? 1940 + static_cast<int>(uniform_below(rng, 15))
                                               : 1956 + static_cast<int>(uniform_below(rng, 70));
        const auto kws = uniform_below(rng, 5);
        for (std::uint64_t k = 0; k < kws; ++k) r.author_keywords.push_back(pick(keywords, rng));
        const auto authors = 1 + uniform_below(rng, 4);
        const bool ids = uniform_below(rng, 5) != 0;
        for (std::uint64_t a = 0; a < authors; ++a) {
            const auto who = uniform_below(rng, 300);
            r.authors_names.push_back("Author " + std::to_string(who));
            if (ids) r.authors_ids.push_back(std::to_string(7000000 + who));
        }
        r.paper_type = pick(types, rng);
        r.language = pick(languages, rng);
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace ddai::testing
