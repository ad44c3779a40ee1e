#include "svsr/env.hpp"

#include <algorithm>

#include "svsr/error.hpp"
#include "svsr/rng.hpp"

namespace svsr {

void check_valid(const EnvConfig& cfg) {
    if (cfg.answer_space_size < 2)
        throw Error(ErrorCode::Config, "env.answer_space_size must be >= 2");
    for (int c : cfg.counts_per_level)
        if (c < 0) throw Error(ErrorCode::Config, "env.counts_per_level must be >= 0");
    auto check_p = [](double p, const char* name) {
        if (!(p >= 0.0 && p <= 1.0))
            throw Error(ErrorCode::Config, std::string(name) + " must be in [0,1]");
    };
    for (double p : cfg.solver_accuracy) check_p(p, "env.solver_accuracy");
    for (const auto* conf : {&cfg.direct_confusion, &cfg.contradiction_confusion}) {
        check_p(conf->correct_given_right, "env confusion probability");
        check_p(conf->correct_given_wrong, "env confusion probability");
    }
}

std::vector<Problem> gen_problems(const EnvConfig& cfg) {
    check_valid(cfg);
    Rng rng = make_rng(cfg.seed, 17);
    std::vector<std::string> answer_space;
    answer_space.reserve(cfg.answer_space_size);
    for (int a = 0; a < cfg.answer_space_size; ++a)
        answer_space.push_back(std::to_string(a));

    std::vector<Problem> problems;
    std::uniform_int_distribution<int> pick_answer(0, cfg.answer_space_size - 1);
    std::uniform_int_distribution<int> pick_coeff(1, 97);
    int serial = 0;
    for (int level = 1; level <= 5; ++level) {
        for (int n = 0; n < cfg.counts_per_level[level - 1]; ++n) {
            Problem p;
            p.id = "p" + std::to_string(serial++);
            p.level = level;
            p.answer_space = answer_space;
            p.gt_answer = answer_space[pick_answer(rng)];
            // Statement text is decoration; the engine never evaluates it.
            const int c = pick_coeff(rng);
            p.statement = "Compute (" + std::to_string(c) + " * x + " + p.id.substr(1) +
                          ") mod " + std::to_string(cfg.answer_space_size) +
                          " for the given x (level " + std::to_string(level) + ").";
            problems.push_back(std::move(p));
        }
    }
    return problems;
}

bool grade(const Problem& p, const std::string& answer) {
    if (std::find(p.answer_space.begin(), p.answer_space.end(), answer) ==
        p.answer_space.end())
        throw Error(ErrorCode::InvalidArgument,
                    "grade: answer '" + answer + "' outside answer space of " + p.id);
    return answer == p.gt_answer;
}

} // namespace svsr
