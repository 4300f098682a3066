#include "ddai/experteval.hpp"

#include <cstdio>

#include "ddai/errors.hpp"
#include "ddai/records.hpp"

namespace ddai {

int majority_vote(std::span<const int> votes) {
    if (votes.size() != 3)
        throw DomainError("a ballot needs exactly 3 votes, got " + std::to_string(votes.size()));
    int yes = 0;
    for (int v : votes) {
        if (v != 0 && v != 1) throw DomainError("votes must be 0 or 1, got " + std::to_string(v));
        yes += v;
    }
    return yes >= 2 ? 1 : 0;
}

int majority_vote(const ExpertBallot& ballot) { return majority_vote(std::span<const int>(ballot.votes)); }

ConsistencyReport consistency_rate(const LabelMap& model_labels, const LabelMap& expert_labels) {
    if (expert_labels.empty()) throw DomainError("consistency_rate: no expert labels");
    std::vector<std::int64_t> only_model, only_expert;
    for (const auto& [eid, _] : model_labels)
        if (!expert_labels.contains(eid)) only_model.push_back(eid);
    for (const auto& [eid, _] : expert_labels)
        if (!model_labels.contains(eid)) only_expert.push_back(eid);
    if (!only_model.empty() || !only_expert.empty()) {
        auto list = [](const std::vector<std::int64_t>& ids) {
            std::string s;
            for (std::size_t i = 0; i < ids.size() && i < 5; ++i) s += (i ? "," : "") + std::to_string(ids[i]);
            if (ids.size() > 5) s += ",...";
            return s;
        };
        throw DomainError("eid sets differ: " + std::to_string(only_model.size()) +
                          " only in model predictions [" + list(only_model) + "], " +
                          std::to_string(only_expert.size()) + " only in ballots [" +
                          list(only_expert) + "]");
    }
    ConsistencyReport report;
    report.total = expert_labels.size();
    for (const auto& [eid, expert] : expert_labels) {
        const int model = model_labels.at(eid);
        if (model == expert)
            ++report.agreements;
        else
            report.disagreements.push_back({eid, model, expert});
    }
    return report;
}

LabelMap expert_labels(std::span<const ExpertBallot> ballots) {
    LabelMap out;
    for (const auto& b : ballots)
        if (!out.emplace(b.eid, majority_vote(b)).second)
            throw DomainError("duplicate ballot for eid " + std::to_string(b.eid));
    return out;
}

namespace {

int binary_field(const Json& row, const char* key, std::size_t line) {
    auto it = row.find(key);
    if (it == row.end() || it->is_null()) throw ParseError(line, key, std::string("missing ") + key);
    int v = -1;
    if (it->is_boolean())
        v = it->get<bool>() ? 1 : 0;
    else if (it->is_number_integer())
        v = it->get<int>();
    else if (it->is_string() && (*it == "0" || *it == "1"))
        v = it->get<std::string>() == "1";
    if (v != 0 && v != 1) throw ParseError(line, key, std::string(key) + " must be 0 or 1");
    return v;
}

std::int64_t eid_field(const Json& row, std::size_t line) {
    auto it = row.find("eid");
    if (it == row.end() || it->is_null()) throw ParseError(line, "eid", "missing eid");
    if (it->is_number_integer()) return it->get<std::int64_t>();
    if (it->is_string()) {
        try {
            std::size_t pos = 0;
            const auto& s = it->get_ref<const std::string&>();
            auto v = std::stoll(s, &pos);
            if (pos == s.size()) return v;
        } catch (const std::exception&) {
        }
    }
    throw ParseError(line, "eid", "eid: not an integer");
}

Json parse_row(std::string_view text, std::size_t line) {
    try {
        auto j = Json::parse(text);
        if (!j.is_object()) throw ParseError(line, "", "row is not a JSON object");
        return j;
    } catch (const Json::parse_error& e) {
        throw ParseError(line, "", std::string("invalid JSON: ") + e.what());
    }
}

}  // namespace

std::vector<ExpertBallot> read_ballots(const std::filesystem::path& path) {
    LineReader reader(path);
    std::vector<ExpertBallot> out;
    while (auto text = reader.next()) {
        const auto line = reader.line_number();
        auto row = parse_row(*text, line);
        ExpertBallot b;
        b.eid = eid_field(row, line);
        b.votes = {binary_field(row, "expert_1", line), binary_field(row, "expert_2", line),
                   binary_field(row, "expert_3", line)};
        if (auto it = row.find("journal"); it != row.end() && it->is_string()) b.journal = it->get<std::string>();
        out.push_back(std::move(b));
    }
    return out;
}

LabelMap read_model_labels(const std::filesystem::path& path) {
    LineReader reader(path);
    LabelMap out;
    while (auto text = reader.next()) {
        const auto line = reader.line_number();
        auto row = parse_row(*text, line);
        const auto eid = eid_field(row, line);
        if (!out.emplace(eid, binary_field(row, "is_ai", line)).second)
            throw ParseError(line, "eid", "duplicate eid " + std::to_string(eid));
    }
    return out;
}

std::string format_rate(double rate) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", rate);
    return buf;
}

void write_disagreements_csv(std::ostream& out, const ConsistencyReport& report) {
    out << "eid,model_is_ai,expert_is_ai\n";
    for (const auto& d : report.disagreements)
        out << d.eid << ',' << d.model_label << ',' << d.expert_label << '\n';
}

}  // namespace ddai
