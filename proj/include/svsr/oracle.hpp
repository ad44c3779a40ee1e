#pragma once

// Generator and teacher oracles. The simulated generator samples from
// exactly known distributions; the remote generator talks to a
// chat-completions-compatible endpoint (see remote.hpp).

#include <string>
#include <vector>

#include "svsr/env.hpp"
#include "svsr/rng.hpp"
#include "svsr/trajectory.hpp"

namespace svsr {

// Pluggable generator. The caller owns randomness; remote
// implementations ignore the rng handle.
class GeneratorOracle {
public:
    virtual ~GeneratorOracle() = default;
    virtual Step solve(const Problem& p, const Trajectory& history, Rng& rng) = 0;
    virtual Step verify(const Problem& p, const std::string& answer,
                        VerifyStrategy strategy, Rng& rng) = 0;
    virtual Step rectify(const Problem& p, const Trajectory& history, Rng& rng) = 0;
};

// Draws the ground truth with the problem level's configured accuracy,
// otherwise a uniformly random wrong answer; verdicts follow the
// per-strategy confusion rows.
class SimulatedOracle : public GeneratorOracle {
public:
    explicit SimulatedOracle(EnvConfig cfg) : cfg_(std::move(cfg)) {}

    Step solve(const Problem& p, const Trajectory& history, Rng& rng) override;
    Step verify(const Problem& p, const std::string& answer, VerifyStrategy strategy,
                Rng& rng) override;
    Step rectify(const Problem& p, const Trajectory& history, Rng& rng) override;

    // Exposed for direct distribution tests.
    std::string draw_answer(const Problem& p, Rng& rng) const;
    Verdict draw_verdict(const Problem& p, const std::string& answer,
                         VerifyStrategy strategy, Rng& rng) const;

private:
    EnvConfig cfg_;
};

struct TeacherScore {
    int correctness = 0;   // final answer matches ground truth
    int format_valid = 0;  // trajectory validates
    double verification_quality = 0.0; // fraction of truthful verdicts
    double total = 0.0;    // 0.6*c + 0.2*f + 0.2*vq
};

inline constexpr double kTeacherCorrectnessWeight = 0.6;
inline constexpr double kTeacherFormatWeight = 0.2;
inline constexpr double kTeacherVerificationWeight = 0.2;

// Deterministic scoring of a structured trajectory.
TeacherScore teacher_score(const Problem& p, const Trajectory& y,
                           AutomatonMode mode = AutomatonMode::Canonical,
                           int k_max = kDefaultKMax);

// Scores serialized text: unparseable traces get an all-zero score.
TeacherScore teacher_score_text(const Problem& p, const std::string& trace,
                                AutomatonMode mode = AutomatonMode::Canonical,
                                int k_max = kDefaultKMax);

} // namespace svsr
