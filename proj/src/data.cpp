#include "svsr/data.hpp"

#include <algorithm>
#include <map>

#include "svsr/error.hpp"
#include "svsr/io.hpp"
#include "svsr/preference.hpp"

namespace svsr {

double estimate_accuracy(const Problem& p, GeneratorOracle& gen, int m, Rng& rng) {
    if (m < 1) throw Error(ErrorCode::InvalidArgument, "sample count must be >= 1");
    Trajectory empty;
    int correct = 0;
    for (int i = 0; i < m; ++i) {
        const Step s = gen.solve(p, empty, rng);
        if (s.answer && grade(p, *s.answer)) ++correct;
    }
    return static_cast<double>(correct) / m;
}

int assign_level(double acc) {
    if (!(acc >= 0.0 && acc <= 1.0))
        throw Error(ErrorCode::InvalidArgument, "accuracy must be in [0,1]");
    if (acc >= 0.8) return 1;
    if (acc >= 0.6) return 2;
    if (acc >= 0.4) return 3;
    if (acc >= 0.2) return 4;
    return 5;
}

int target_cycles(int level) {
    if (level < 1 || level > 5)
        throw Error(ErrorCode::InvalidArgument, "level must be in 1..5");
    return level - 1;
}

namespace {

VerifyStrategy draw_strategy(Rng& rng) {
    std::bernoulli_distribution coin(0.5);
    return coin(rng) ? VerifyStrategy::DirectDerivation
                     : VerifyStrategy::Contradiction;
}

// Re-draws from the oracle until the graded correctness matches
// `want_correct`; empty on budget exhaustion.
std::optional<Step> draw_answer_step(const Problem& p, GeneratorOracle& gen,
                                     const Trajectory& history, bool rectifying,
                                     bool want_correct, Rng& rng, int budget) {
    for (int i = 0; i < budget; ++i) {
        Step s = rectifying ? gen.rectify(p, history, rng) : gen.solve(p, history, rng);
        if (!s.answer) continue;
        if (grade(p, *s.answer) == want_correct) return s;
    }
    return {};
}

SftRecord make_record(const Problem& p, Trajectory traj, RecordLabel label, int level,
                      std::string text = "") {
    SftRecord rec;
    rec.problem_id = p.id;
    rec.level = level;
    rec.k = traj.rectify_count();
    rec.final_answer = traj.final_answer();
    rec.label = label;
    rec.trajectory_text = text.empty() ? render(traj) : std::move(text);
    rec.trajectory = std::move(traj);
    return rec;
}

} // namespace

std::optional<SftRecord> build_chosen(const Problem& p, GeneratorOracle& gen,
                                      int k_target, int level, Rng& rng,
                                      int max_retries, int k_max) {
    if (k_target > k_max)
        throw Error(ErrorCode::InvalidArgument, "k_target exceeds k_max");
    for (int attempt = 0; attempt < max_retries; ++attempt) {
        Trajectory traj;
        traj.problem_id = p.id;
        bool failed = false;
        for (int cycle = 0; cycle <= k_target && !failed; ++cycle) {
            const bool final_cycle = cycle == k_target;
            const auto step = draw_answer_step(p, gen, traj, /*rectifying=*/cycle > 0,
                                               /*want_correct=*/final_cycle, rng,
                                               max_retries);
            if (!step) {
                failed = true;
                break;
            }
            traj.steps.push_back(*step);
            traj.steps.push_back(verify_step(
                final_cycle ? Verdict::Correct : Verdict::Incorrect,
                draw_strategy(rng)));
        }
        if (failed) continue;
        // Format filter: discard anything that does not survive the
        // grammar and automaton.
        if (!validate(traj, AutomatonMode::Canonical, k_max).ok) continue;
        const auto round_trip = parse(render(traj), AutomatonMode::Canonical, k_max, p.id);
        if (!std::holds_alternative<Trajectory>(round_trip)) continue;
        return make_record(p, std::move(traj), RecordLabel::Chosen, level);
    }
    return {};
}

SftRecord build_rejected(const Problem& p, GeneratorOracle& gen, int level, Rng& rng) {
    std::bernoulli_distribution corrupt(0.5);
    if (!corrupt(rng)) {
        // Wrong final answer blessed by a forced CORRECT verdict.
        Trajectory traj;
        traj.problem_id = p.id;
        Trajectory empty;
        const auto wrong = draw_answer_step(p, gen, empty, false, false, rng, 256);
        // A problem where the oracle cannot produce a wrong answer would
        // need p_correct = 1 and A = 1; fall back to the first non-gt token.
        std::string wrong_answer;
        if (wrong) {
            wrong_answer = *wrong->answer;
        } else {
            for (const auto& a : p.answer_space)
                if (a != p.gt_answer) { wrong_answer = a; break; }
        }
        traj.steps.push_back(solve_step(wrong_answer, "attempt"));
        traj.steps.push_back(verify_step(Verdict::Correct, draw_strategy(rng), "check"));
        return make_record(p, std::move(traj), RecordLabel::Rejected, level);
    }
    // Format-corrupted variant: a correct-shaped trace with one
    // scaffolding phrase dropped, so the text no longer parses.
    Trajectory traj;
    traj.problem_id = p.id;
    traj.steps.push_back(solve_step(p.gt_answer, "attempt"));
    traj.steps.push_back(verify_step(Verdict::Correct, draw_strategy(rng), "check"));
    std::string text = render(traj);
    const auto pos = text.find(kRecheckPhrase);
    if (pos != std::string::npos)
        text.erase(pos, std::string(kRecheckPhrase).size() + 1); // phrase + newline
    return make_record(p, std::move(traj), RecordLabel::Rejected, level, text);
}

namespace {

nlohmann::json record_to_json(const SftRecord& r) {
    return {{"problem_id", r.problem_id},
            {"label", r.label == RecordLabel::Chosen ? "chosen" : "rejected"},
            {"level", r.level},
            {"k", r.k},
            {"trajectory_text", r.trajectory_text},
            {"final_answer", r.final_answer}};
}

} // namespace

void emit_datasets(const std::vector<SftRecord>& records,
                   const std::vector<Problem>& problems, const DatasetFiles& files) {
    std::map<std::string, const Problem*> by_id;
    for (const auto& p : problems) by_id[p.id] = &p;

    std::vector<nlohmann::json> sft_rows;
    std::map<std::string, const SftRecord*> chosen, rejected;
    for (const auto& r : records) {
        if (r.label == RecordLabel::Chosen) {
            sft_rows.push_back(record_to_json(r));
            chosen.emplace(r.problem_id, &r);
        } else {
            rejected.emplace(r.problem_id, &r);
        }
    }
    write_jsonl(files.sft_path, sft_rows);

    std::vector<PairRow> pair_rows;
    for (const auto& [pid, win] : chosen) {
        const auto it = rejected.find(pid);
        if (it == rejected.end()) continue;
        const auto pit = by_id.find(pid);
        if (pit == by_id.end())
            throw Error(ErrorCode::InvalidArgument, "record for unknown problem " + pid);
        const double margin =
            teacher_score(*pit->second, win->trajectory).total -
            teacher_score_text(*pit->second, it->second->trajectory_text).total;
        pair_rows.push_back(PairRow{pid, win->trajectory_text,
                                    it->second->trajectory_text, margin,
                                    PairSource::Seed, 0});
    }
    write_pair_rows(files.seed_pairs_path, pair_rows);
}

std::vector<SftRecord> read_sft_records(const std::string& path, AutomatonMode mode,
                                        int k_max) {
    std::vector<SftRecord> records;
    for (const auto& j : read_jsonl(path)) {
        SftRecord r;
        r.problem_id = j.at("problem_id").get<std::string>();
        const auto label = j.at("label").get<std::string>();
        r.label = label == "chosen" ? RecordLabel::Chosen : RecordLabel::Rejected;
        r.level = j.at("level").get<int>();
        r.k = j.at("k").get<int>();
        r.trajectory_text = j.at("trajectory_text").get<std::string>();
        r.final_answer = j.at("final_answer").get<std::string>();
        const auto parsed = parse(r.trajectory_text, mode, k_max, r.problem_id);
        if (const auto* t = std::get_if<Trajectory>(&parsed)) {
            r.trajectory = *t;
        } else if (r.label == RecordLabel::Chosen) {
            throw Error(ErrorCode::Io, "unparseable chosen record for " + r.problem_id +
                                           " in " + path);
        }
        records.push_back(std::move(r));
    }
    return records;
}

} // namespace svsr
