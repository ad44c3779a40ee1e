#include "svsr/metrics.hpp"

#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "svsr/error.hpp"

namespace svsr {

namespace {

void check_entry(const CorpusEntry& e) {
    if (!e.problem || !e.trajectory)
        throw Error(ErrorCode::InvalidArgument, "null corpus entry");
}

} // namespace

std::pair<Ratio, Ratio> verification_metrics(const std::vector<CorpusEntry>& corpus) {
    Ratio accuracy, recall;
    for (const auto& e : corpus) {
        check_entry(e);
        std::string prev_answer;
        for (const auto& step : e.trajectory->steps) {
            if (step.kind != StepKind::Verify) {
                if (step.answer) prev_answer = *step.answer;
                continue;
            }
            const bool truth = grade(*e.problem, prev_answer);
            const bool claimed = *step.verdict == Verdict::Correct;
            ++accuracy.denominator;
            if (truth == claimed) ++accuracy.numerator;
            if (!truth) {
                ++recall.denominator;
                if (!claimed) ++recall.numerator;
            }
        }
    }
    return {accuracy, recall};
}

std::pair<Ratio, Ratio> rectification_metrics(const std::vector<CorpusEntry>& corpus) {
    Ratio e2c, c2e;
    for (const auto& e : corpus) {
        check_entry(e);
        std::string prev_answer;
        for (const auto& step : e.trajectory->steps) {
            if (step.kind == StepKind::Verify) continue;
            if (step.kind == StepKind::Rectify && !prev_answer.empty()) {
                const bool was_right = grade(*e.problem, prev_answer);
                const bool now_right = grade(*e.problem, *step.answer);
                if (was_right) {
                    ++c2e.denominator;
                    if (!now_right) ++c2e.numerator;
                } else {
                    ++e2c.denominator;
                    if (now_right) ++e2c.numerator;
                }
            }
            prev_answer = *step.answer;
        }
    }
    return {e2c, c2e};
}

std::vector<LevelProfile> difficulty_profile(const std::vector<CorpusEntry>& corpus) {
    std::map<int, LevelProfile> by_level;
    for (const auto& e : corpus) {
        check_entry(e);
        LevelProfile& lp = by_level[e.problem->level];
        lp.level = e.problem->level;
        ++lp.trajectories;
        lp.rectify_steps += e.trajectory->rectify_count();
        const std::string final_ans = e.trajectory->final_answer();
        if (!final_ans.empty() && grade(*e.problem, final_ans)) ++lp.correct_finals;
    }
    std::vector<LevelProfile> out;
    for (auto& [level, lp] : by_level) {
        lp.answer_accuracy = static_cast<double>(lp.correct_finals) / lp.trajectories;
        lp.mean_loops = static_cast<double>(lp.rectify_steps) / lp.trajectories;
        lp.mean_attempts = lp.mean_loops + 1.0;
        out.push_back(lp);
    }
    return out;
}

BehaviorReport behavior_report(const std::vector<CorpusEntry>& corpus) {
    BehaviorReport r;
    std::tie(r.verification_accuracy, r.error_recall) = verification_metrics(corpus);
    std::tie(r.error_to_correct, r.correct_to_error) = rectification_metrics(corpus);
    r.levels = difficulty_profile(corpus);
    return r;
}

namespace {

nlohmann::json ratio_to_json(const Ratio& r) {
    nlohmann::json j;
    j["numerator"] = r.numerator;
    j["denominator"] = r.denominator;
    if (const auto v = r.value())
        j["value"] = *v;
    else
        j["value"] = nullptr; // undefined, never coerced to 0
    return j;
}

Ratio ratio_from_json(const nlohmann::json& j) {
    Ratio r;
    r.numerator = j.at("numerator").get<std::size_t>();
    r.denominator = j.at("denominator").get<std::size_t>();
    return r;
}

} // namespace

std::string report_to_json(const BehaviorReport& report) {
    nlohmann::ordered_json j;
    j["verification_accuracy"] = ratio_to_json(report.verification_accuracy);
    j["error_recall"] = ratio_to_json(report.error_recall);
    j["error_to_correct"] = ratio_to_json(report.error_to_correct);
    j["correct_to_error"] = ratio_to_json(report.correct_to_error);
    j["levels"] = nlohmann::json::array();
    for (const auto& lp : report.levels) {
        j["levels"].push_back({{"level", lp.level},
                               {"trajectories", lp.trajectories},
                               {"correct_finals", lp.correct_finals},
                               {"rectify_steps", lp.rectify_steps},
                               {"answer_accuracy", lp.answer_accuracy},
                               {"mean_attempts", lp.mean_attempts},
                               {"mean_loops", lp.mean_loops}});
    }
    return j.dump(2) + "\n";
}

BehaviorReport report_from_json(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Io, std::string("bad report: ") + e.what());
    }
    BehaviorReport r;
    r.verification_accuracy = ratio_from_json(j.at("verification_accuracy"));
    r.error_recall = ratio_from_json(j.at("error_recall"));
    r.error_to_correct = ratio_from_json(j.at("error_to_correct"));
    r.correct_to_error = ratio_from_json(j.at("correct_to_error"));
    for (const auto& lj : j.at("levels")) {
        LevelProfile lp;
        lp.level = lj.at("level").get<int>();
        lp.trajectories = lj.at("trajectories").get<std::size_t>();
        lp.correct_finals = lj.at("correct_finals").get<std::size_t>();
        lp.rectify_steps = lj.at("rectify_steps").get<std::size_t>();
        lp.answer_accuracy = lj.at("answer_accuracy").get<double>();
        lp.mean_attempts = lj.at("mean_attempts").get<double>();
        lp.mean_loops = lj.at("mean_loops").get<double>();
        r.levels.push_back(lp);
    }
    return r;
}

std::string report_to_csv(const BehaviorReport& report) {
    std::ostringstream out;
    out << "row,level,trajectories,answer_accuracy,mean_attempts,mean_loops,"
           "verification_accuracy,error_recall,error_to_correct,correct_to_error\n";
    auto fmt = [](const Ratio& r) {
        const auto v = r.value();
        return v ? std::to_string(*v) : std::string(); // blank = undefined
    };
    for (const auto& lp : report.levels)
        out << "level," << lp.level << "," << lp.trajectories << ","
            << lp.answer_accuracy << "," << lp.mean_attempts << "," << lp.mean_loops
            << ",,,,\n";
    out << "summary,,,,,," << fmt(report.verification_accuracy) << ","
        << fmt(report.error_recall) << "," << fmt(report.error_to_correct) << ","
        << fmt(report.correct_to_error) << "\n";
    return out.str();
}

} // namespace svsr
