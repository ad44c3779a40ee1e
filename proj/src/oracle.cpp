#include "svsr/oracle.hpp"

#include <algorithm>

#include "svsr/error.hpp"

namespace svsr {

std::string SimulatedOracle::draw_answer(const Problem& p, Rng& rng) const {
    if (p.level < 1 || p.level > 5)
        throw Error(ErrorCode::InvalidArgument, "problem level out of range");
    const double p_correct = cfg_.solver_accuracy[p.level - 1];
    std::bernoulli_distribution correct(p_correct);
    if (correct(rng)) return p.gt_answer;
    // Uniform over the wrong answers.
    std::vector<const std::string*> wrong;
    for (const auto& a : p.answer_space)
        if (a != p.gt_answer) wrong.push_back(&a);
    if (wrong.empty()) return p.gt_answer;
    std::uniform_int_distribution<std::size_t> pick(0, wrong.size() - 1);
    return *wrong[pick(rng)];
}

Verdict SimulatedOracle::draw_verdict(const Problem& p, const std::string& answer,
                                      VerifyStrategy strategy, Rng& rng) const {
    const VerdictConfusion& conf = strategy == VerifyStrategy::DirectDerivation
                                       ? cfg_.direct_confusion
                                       : cfg_.contradiction_confusion;
    const double p_correct_verdict =
        grade(p, answer) ? conf.correct_given_right : conf.correct_given_wrong;
    std::bernoulli_distribution say_correct(p_correct_verdict);
    return say_correct(rng) ? Verdict::Correct : Verdict::Incorrect;
}

Step SimulatedOracle::solve(const Problem& p, const Trajectory&, Rng& rng) {
    return solve_step(draw_answer(p, rng), "attempt");
}

Step SimulatedOracle::verify(const Problem& p, const std::string& answer,
                             VerifyStrategy strategy, Rng& rng) {
    return verify_step(draw_verdict(p, answer, strategy, rng), strategy, "check");
}

Step SimulatedOracle::rectify(const Problem& p, const Trajectory&, Rng& rng) {
    return rectify_step(draw_answer(p, rng), "revised attempt");
}

TeacherScore teacher_score(const Problem& p, const Trajectory& y, AutomatonMode mode,
                           int k_max) {
    TeacherScore s;
    const std::string final_ans = y.final_answer();
    const bool in_space =
        std::find(p.answer_space.begin(), p.answer_space.end(), final_ans) !=
        p.answer_space.end();
    s.correctness = in_space && grade(p, final_ans) ? 1 : 0;
    s.format_valid = validate(y, mode, k_max).ok ? 1 : 0;

    int verifies = 0, truthful = 0;
    std::string prev_answer;
    for (const auto& step : y.steps) {
        if (step.kind != StepKind::Verify) {
            if (step.answer) prev_answer = *step.answer;
            continue;
        }
        if (!step.verdict) continue;
        ++verifies;
        const bool prev_in_space =
            std::find(p.answer_space.begin(), p.answer_space.end(), prev_answer) !=
            p.answer_space.end();
        const bool truth = prev_in_space && grade(p, prev_answer);
        const bool claimed = *step.verdict == Verdict::Correct;
        if (truth == claimed) ++truthful;
    }
    s.verification_quality =
        verifies > 0 ? static_cast<double>(truthful) / verifies : 0.0;
    s.total = kTeacherCorrectnessWeight * s.correctness +
              kTeacherFormatWeight * s.format_valid +
              kTeacherVerificationWeight * s.verification_quality;
    return s;
}

TeacherScore teacher_score_text(const Problem& p, const std::string& trace,
                                AutomatonMode mode, int k_max) {
    const auto parsed = parse(trace, mode, k_max, p.id);
    if (std::holds_alternative<ParseError>(parsed)) return TeacherScore{};
    return teacher_score(p, std::get<Trajectory>(parsed), mode, k_max);
}

} // namespace svsr
