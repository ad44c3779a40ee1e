#pragma once

// Deterministic toy problem domain with known ground truth.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace svsr {

struct Problem {
    std::string id;
    std::string statement;
    std::vector<std::string> answer_space;
    std::string gt_answer;
    int level = 1; // 1 (easiest) .. 5 (hardest)
    std::optional<std::string> attachment_ref;

    bool operator==(const Problem&) const = default;
};

// Verdict distribution of one verification strategy, conditioned on the
// true correctness of the answer under review.
struct VerdictConfusion {
    double correct_given_right = 1.0; // P(verdict CORRECT | answer right)
    double correct_given_wrong = 0.0; // P(verdict CORRECT | answer wrong)
};

struct EnvConfig {
    int answer_space_size = 5;
    std::array<int, 5> counts_per_level{10, 10, 10, 10, 10};
    // Per-level probability that a single solve attempt is correct.
    std::array<double, 5> solver_accuracy{0.9, 0.75, 0.6, 0.4, 0.2};
    VerdictConfusion direct_confusion{0.95, 0.40};
    VerdictConfusion contradiction_confusion{0.85, 0.15};
    std::uint64_t seed = 0;
};

void check_valid(const EnvConfig& cfg); // throws Error on bad values

// Deterministic under cfg.seed; per-level counts honored; ground-truth
// answers assigned uniformly over the answer space.
std::vector<Problem> gen_problems(const EnvConfig& cfg);

// True iff answer equals the ground truth. Throws if the answer is not
// in the problem's answer space.
bool grade(const Problem& p, const std::string& answer);

} // namespace svsr
