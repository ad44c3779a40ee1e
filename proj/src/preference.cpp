#include "svsr/preference.hpp"

#include <algorithm>

#include "svsr/error.hpp"
#include "svsr/io.hpp"

namespace svsr {

void PreferenceBuffer::update(const std::vector<PreferencePair>& new_pairs) {
    for (const auto& p : new_pairs) {
        pairs_.push_back(p);
        if (pairs_.size() <= capacity_) continue;
        if (policy_ == EvictionPolicy::Fifo) {
            pairs_.pop_front();
        } else {
            auto victim = std::min_element(
                pairs_.begin(), pairs_.end(),
                [](const PreferencePair& a, const PreferencePair& b) {
                    return a.teacher_margin < b.teacher_margin;
                });
            pairs_.erase(victim);
        }
    }
}

namespace {

const char* source_name(PairSource s) {
    return s == PairSource::Seed ? "seed" : "online";
}

PairSource source_from(const std::string& s) {
    if (s == "seed") return PairSource::Seed;
    if (s == "online") return PairSource::Online;
    throw Error(ErrorCode::Io, "unknown pair source '" + s + "'");
}

nlohmann::json row_to_json(const PairRow& r) {
    return {{"problem_id", r.problem_id},
            {"win_text", r.win_text},
            {"lose_text", r.lose_text},
            {"teacher_margin", r.teacher_margin},
            {"source", source_name(r.source)},
            {"created_iter", r.created_iter}};
}

PairRow row_from_json(const nlohmann::json& j) {
    PairRow r;
    r.problem_id = j.at("problem_id").get<std::string>();
    r.win_text = j.at("win_text").get<std::string>();
    r.lose_text = j.at("lose_text").get<std::string>();
    r.teacher_margin = j.at("teacher_margin").get<double>();
    r.source = source_from(j.at("source").get<std::string>());
    r.created_iter = j.at("created_iter").get<int>();
    return r;
}

} // namespace

std::vector<PairRow> read_pair_rows(const std::string& path) {
    std::vector<PairRow> rows;
    for (const auto& j : read_jsonl(path)) rows.push_back(row_from_json(j));
    return rows;
}

void write_pair_rows(const std::string& path, const std::vector<PairRow>& rows) {
    std::vector<nlohmann::json> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(row_to_json(r));
    write_jsonl(path, out);
}

std::vector<PreferencePair> read_pairs(const std::string& path, AutomatonMode mode,
                                       int k_max, bool skip_invalid,
                                       std::size_t* skipped) {
    std::vector<PreferencePair> pairs;
    std::size_t dropped = 0;
    for (const auto& row : read_pair_rows(path)) {
        const auto win = parse(row.win_text, mode, k_max, row.problem_id);
        const auto lose = parse(row.lose_text, mode, k_max, row.problem_id);
        const auto* win_t = std::get_if<Trajectory>(&win);
        const auto* lose_t = std::get_if<Trajectory>(&lose);
        const bool usable = win_t && lose_t && validate(*win_t, mode, k_max).ok &&
                            validate(*lose_t, mode, k_max).ok;
        if (!usable) {
            if (!skip_invalid)
                throw Error(ErrorCode::Io,
                            "unparseable preference pair for " + row.problem_id +
                                " in " + path);
            ++dropped;
            continue;
        }
        pairs.push_back(PreferencePair{row.problem_id, *win_t, *lose_t,
                                       row.teacher_margin, row.source,
                                       row.created_iter});
    }
    if (skipped) *skipped = dropped;
    return pairs;
}

void write_pairs(const std::string& path, const std::vector<PreferencePair>& pairs) {
    std::vector<PairRow> rows;
    rows.reserve(pairs.size());
    for (const auto& p : pairs)
        rows.push_back(PairRow{p.problem_id, render(p.y_win), render(p.y_lose),
                               p.teacher_margin, p.source, p.created_iter});
    write_pair_rows(path, rows);
}

} // namespace svsr
