#pragma once

// Log-linear autoregressive policy over trajectory decisions. Every
// decision is a softmax over a small candidate set (answer tokens at
// solve/rectify, verdicts at verify), so trajectory probabilities,
// gradients, and the full language are exactly computable.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "svsr/env.hpp"
#include "svsr/rng.hpp"
#include "svsr/trajectory.hpp"

namespace svsr {

using Weights = std::vector<double>;

enum class DecisionState { SolveAnswer, RectifyAnswer, Verdict };

struct DecisionPoint {
    DecisionState state = DecisionState::SolveAnswer;
    int level = 1;            // problem difficulty bucket, 1..5
    bool prev_correct = false; // verdict decisions only
    int n_candidates = 0;
};

struct SftExample {
    const Problem* problem = nullptr;
    const Trajectory* trajectory = nullptr;
};

struct LossValue {
    double loss = 0.0;
    Weights grad;
    std::size_t decisions = 0;
};

class Policy {
public:
    Policy(int answer_space_size, int k_max = kDefaultKMax);

    int answer_space_size() const { return A_; }
    int k_max() const { return k_max_; }
    std::size_t dim() const { return dim_; }
    const std::vector<std::string>& feature_names() const { return names_; }

    Weights zero_weights() const { return Weights(dim_, 0.0); }

    // Sparse feature vector of (decision, candidate) as index list;
    // verdict candidates: 0 = CORRECT, 1 = INCORRECT.
    std::vector<std::size_t> active_features(const DecisionPoint& dp,
                                             int candidate) const;

    // Softmax probabilities over the candidates of a decision point.
    std::vector<double> probs(const Weights& w, const DecisionPoint& dp) const;

    // Decision sequence realized by a trajectory (CANONICAL mode).
    std::vector<std::pair<DecisionPoint, int>> decisions(const Problem& p,
                                                         const Trajectory& y) const;

    double logprob(const Weights& w, const Problem& p, const Trajectory& y) const;
    Weights grad_logprob(const Weights& w, const Problem& p,
                         const Trajectory& y) const;

    // Ancestral sampling through the CANONICAL automaton; verify
    // strategies are exogenous (uniform), not policy-controlled.
    Trajectory sample(const Weights& w, const Problem& p, Rng& rng) const;

    // Exact language of the capped CANONICAL automaton (strategies fixed
    // to direct derivation). Throws if the language exceeds the guard.
    std::vector<Trajectory> enumerate(const Problem& p) const;
    static constexpr std::size_t kEnumerationGuard = 100000;
    // Closed-form trajectory count from the automaton recurrence.
    static std::size_t language_size(int answer_space_size, int k_max);

    // Masked autoregressive cross-entropy over chosen records.
    // Decisions inside verify/rectify steps are weighted by mask_weight;
    // mask_weight = 1 is the plain unweighted objective.
    LossValue sft_loss(const Weights& w, const std::vector<SftExample>& dataset,
                       double mask_weight = 1.0) const;

    std::string weights_to_json(const Weights& w) const;
    Weights weights_from_json(const std::string& json_text) const;

private:
    int A_;
    int k_max_;
    std::size_t dim_;
    std::vector<std::string> names_;
};

// Plain gradient descent update; throws on non-finite gradient.
void gd_step(Weights& w, const Weights& grad, double lr);

} // namespace svsr
