#include "svsr/policy.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "svsr/error.hpp"

namespace svsr {

namespace {

constexpr int kLevels = 5;

int answer_index(const Problem& p, const std::string& answer) {
    const auto it = std::find(p.answer_space.begin(), p.answer_space.end(), answer);
    if (it == p.answer_space.end())
        throw Error(ErrorCode::InvalidArgument,
                    "answer '" + answer + "' not in answer space of " + p.id);
    return static_cast<int>(it - p.answer_space.begin());
}

int clamp_level(int level) { return std::clamp(level, 1, kLevels); }

} // namespace

Policy::Policy(int answer_space_size, int k_max) : A_(answer_space_size), k_max_(k_max) {
    if (A_ < 1) throw Error(ErrorCode::InvalidArgument, "answer space must be non-empty");
    if (k_max_ < 0) throw Error(ErrorCode::InvalidArgument, "k_max must be >= 0");
    // Layout: answer identity | verdict identity | state x answer |
    // state x verdict | level x answer | level x verdict | prev x verdict.
    dim_ = static_cast<std::size_t>(8 * A_ + 18);
    names_.reserve(dim_);
    const char* verdicts[2] = {"CORRECT", "INCORRECT"};
    for (int a = 0; a < A_; ++a) names_.push_back("ans:" + std::to_string(a));
    for (const char* v : verdicts) names_.push_back(std::string("verdict:") + v);
    for (const char* st : {"solve", "rectify"})
        for (int a = 0; a < A_; ++a)
            names_.push_back(std::string("state:") + st + "|ans:" + std::to_string(a));
    for (const char* v : verdicts) names_.push_back(std::string("state:verify|verdict:") + v);
    for (int l = 1; l <= kLevels; ++l)
        for (int a = 0; a < A_; ++a)
            names_.push_back("level:" + std::to_string(l) + "|ans:" + std::to_string(a));
    for (int l = 1; l <= kLevels; ++l)
        for (const char* v : verdicts)
            names_.push_back("level:" + std::to_string(l) + "|verdict:" + v);
    for (const char* pc : {"wrong", "right"})
        for (const char* v : verdicts)
            names_.push_back(std::string("prev:") + pc + "|verdict:" + v);
}

std::vector<std::size_t> Policy::active_features(const DecisionPoint& dp,
                                                 int candidate) const {
    const std::size_t off_ans = 0;
    const std::size_t off_verdict = off_ans + A_;
    const std::size_t off_state_ans = off_verdict + 2;
    const std::size_t off_state_verdict = off_state_ans + 2 * A_;
    const std::size_t off_level_ans = off_state_verdict + 2;
    const std::size_t off_level_verdict = off_level_ans + kLevels * A_;
    const std::size_t off_prev_verdict = off_level_verdict + kLevels * 2;
    const int level = clamp_level(dp.level);

    std::vector<std::size_t> idx;
    if (dp.state == DecisionState::Verdict) {
        if (candidate < 0 || candidate >= 2)
            throw Error(ErrorCode::InvalidArgument, "verdict candidate out of range");
        idx = {off_verdict + candidate,
               off_state_verdict + candidate,
               off_level_verdict + (level - 1) * 2 + candidate,
               off_prev_verdict + (dp.prev_correct ? 1 : 0) * 2 + candidate};
    } else {
        if (candidate < 0 || candidate >= A_)
            throw Error(ErrorCode::InvalidArgument, "answer candidate out of range");
        const int state = dp.state == DecisionState::SolveAnswer ? 0 : 1;
        idx = {off_ans + candidate,
               off_state_ans + state * A_ + candidate,
               off_level_ans + (level - 1) * A_ + candidate};
    }
    return idx;
}

std::vector<double> Policy::probs(const Weights& w, const DecisionPoint& dp) const {
    if (w.size() != dim_) throw Error(ErrorCode::InvalidArgument, "weight dimension mismatch");
    const int n = dp.state == DecisionState::Verdict ? 2 : A_;
    std::vector<double> logits(n, 0.0);
    for (int c = 0; c < n; ++c)
        for (std::size_t f : active_features(dp, c)) logits[c] += w[f];
    const double m = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (double& l : logits) {
        l = std::exp(l - m);
        z += l;
    }
    for (double& l : logits) l /= z;
    return logits;
}

std::vector<std::pair<DecisionPoint, int>> Policy::decisions(const Problem& p,
                                                             const Trajectory& y) const {
    if (auto v = validate(y, AutomatonMode::Canonical, k_max_); !v)
        throw Error(ErrorCode::InvalidArgument,
                    "trajectory invalid for policy evaluation: " + v.error->message);
    if (static_cast<int>(p.answer_space.size()) != A_)
        throw Error(ErrorCode::InvalidArgument, "answer space size mismatch for " + p.id);

    std::vector<std::pair<DecisionPoint, int>> out;
    std::string prev_answer;
    for (const auto& step : y.steps) {
        DecisionPoint dp;
        dp.level = clamp_level(p.level);
        switch (step.kind) {
            case StepKind::Solve:
            case StepKind::Rectify:
                dp.state = step.kind == StepKind::Solve ? DecisionState::SolveAnswer
                                                        : DecisionState::RectifyAnswer;
                dp.n_candidates = A_;
                out.emplace_back(dp, answer_index(p, *step.answer));
                prev_answer = *step.answer;
                break;
            case StepKind::Verify:
                dp.state = DecisionState::Verdict;
                dp.prev_correct = grade(p, prev_answer);
                dp.n_candidates = 2;
                out.emplace_back(dp, *step.verdict == Verdict::Correct ? 0 : 1);
                break;
        }
    }
    return out;
}

double Policy::logprob(const Weights& w, const Problem& p, const Trajectory& y) const {
    double lp = 0.0;
    for (const auto& [dp, chosen] : decisions(p, y)) {
        const auto pr = probs(w, dp);
        lp += std::log(pr[chosen]);
    }
    return lp;
}

Weights Policy::grad_logprob(const Weights& w, const Problem& p,
                             const Trajectory& y) const {
    Weights g(dim_, 0.0);
    for (const auto& [dp, chosen] : decisions(p, y)) {
        const auto pr = probs(w, dp);
        for (std::size_t f : active_features(dp, chosen)) g[f] += 1.0;
        for (int c = 0; c < dp.n_candidates; ++c)
            for (std::size_t f : active_features(dp, c)) g[f] -= pr[c];
    }
    return g;
}

namespace {

int sample_index(const std::vector<double>& pr, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double x = u(rng);
    for (std::size_t i = 0; i + 1 < pr.size(); ++i) {
        if (x < pr[i]) return static_cast<int>(i);
        x -= pr[i];
    }
    return static_cast<int>(pr.size() - 1);
}

} // namespace

Trajectory Policy::sample(const Weights& w, const Problem& p, Rng& rng) const {
    if (static_cast<int>(p.answer_space.size()) != A_)
        throw Error(ErrorCode::InvalidArgument, "answer space size mismatch for " + p.id);
    Trajectory y;
    y.problem_id = p.id;
    std::bernoulli_distribution coin(0.5);
    const int level = clamp_level(p.level);

    auto draw_answer = [&](DecisionState state) {
        DecisionPoint dp{state, level, false, A_};
        return p.answer_space[sample_index(probs(w, dp), rng)];
    };
    auto draw_verdict = [&](const std::string& prev) {
        DecisionPoint dp{DecisionState::Verdict, level, grade(p, prev), 2};
        return sample_index(probs(w, dp), rng) == 0 ? Verdict::Correct
                                                    : Verdict::Incorrect;
    };
    auto strategy = [&] {
        return coin(rng) ? VerifyStrategy::DirectDerivation
                         : VerifyStrategy::Contradiction;
    };

    std::string answer = draw_answer(DecisionState::SolveAnswer);
    y.steps.push_back(solve_step(answer));
    int rectifies = 0;
    for (;;) {
        const Verdict v = draw_verdict(answer);
        y.steps.push_back(verify_step(v, strategy()));
        if (v == Verdict::Correct) break;
        if (rectifies >= k_max_) break; // truncated-complete at the cap
        answer = draw_answer(DecisionState::RectifyAnswer);
        y.steps.push_back(rectify_step(answer));
        ++rectifies;
    }
    return y;
}

std::size_t Policy::language_size(int answer_space_size, int k_max) {
    // At each answer node: A choices; each continues with either a
    // CORRECT verdict (terminal) or an INCORRECT one, which recurses
    // while rectification budget remains and is terminal at the cap.
    std::size_t n = 2; // both verdict branches are terminal at the cap
    for (int r = 0; r < k_max; ++r)
        n = 1 + static_cast<std::size_t>(answer_space_size) * n;
    return static_cast<std::size_t>(answer_space_size) * n;
}

std::vector<Trajectory> Policy::enumerate(const Problem& p) const {
    if (static_cast<int>(p.answer_space.size()) != A_)
        throw Error(ErrorCode::InvalidArgument, "answer space size mismatch for " + p.id);
    const std::size_t total = language_size(A_, k_max_);
    if (total > kEnumerationGuard)
        throw Error(ErrorCode::InvalidArgument,
                    "enumeration guard exceeded: " + std::to_string(total) +
                        " trajectories");
    std::vector<Trajectory> out;
    out.reserve(total);
    Trajectory cur;
    cur.problem_id = p.id;

    auto emit_with_verdict = [&](Verdict v) {
        cur.steps.push_back(verify_step(v, VerifyStrategy::DirectDerivation));
        out.push_back(cur);
        cur.steps.pop_back();
    };

    // Depth-first over answer choices and verdict branches.
    auto walk = [&](auto&& self, int rectifies) -> void {
        emit_with_verdict(Verdict::Correct);
        if (rectifies >= k_max_) {
            emit_with_verdict(Verdict::Incorrect);
            return;
        }
        cur.steps.push_back(verify_step(Verdict::Incorrect,
                                        VerifyStrategy::DirectDerivation));
        for (const auto& a : p.answer_space) {
            cur.steps.push_back(rectify_step(a));
            self(self, rectifies + 1);
            cur.steps.pop_back();
        }
        cur.steps.pop_back();
    };

    for (const auto& a : p.answer_space) {
        cur.steps.push_back(solve_step(a));
        walk(walk, 0);
        cur.steps.pop_back();
    }
    return out;
}

LossValue Policy::sft_loss(const Weights& w, const std::vector<SftExample>& dataset,
                           double mask_weight) const {
    if (dataset.empty()) throw Error(ErrorCode::InvalidArgument, "empty SFT dataset");
    if (mask_weight < 0.0)
        throw Error(ErrorCode::InvalidArgument, "mask weight must be >= 0");
    LossValue lv;
    lv.grad.assign(dim_, 0.0);
    for (const auto& ex : dataset) {
        for (const auto& [dp, chosen] : decisions(*ex.problem, *ex.trajectory)) {
            // Mask bit is 1 on verify/rectify decisions, 0 on the
            // initial-reasoning (solve) decisions.
            const bool masked = dp.state != DecisionState::SolveAnswer;
            const double wt = masked ? mask_weight : 1.0;
            const auto pr = probs(w, dp);
            lv.loss -= wt * std::log(pr[chosen]);
            for (std::size_t f : active_features(dp, chosen)) lv.grad[f] -= wt;
            for (int c = 0; c < dp.n_candidates; ++c)
                for (std::size_t f : active_features(dp, c)) lv.grad[f] += wt * pr[c];
            ++lv.decisions;
        }
    }
    return lv;
}

std::string Policy::weights_to_json(const Weights& w) const {
    if (w.size() != dim_) throw Error(ErrorCode::InvalidArgument, "weight dimension mismatch");
    nlohmann::ordered_json j;
    for (std::size_t i = 0; i < dim_; ++i) j[names_[i]] = w[i];
    return j.dump(2) + "\n";
}

Weights Policy::weights_from_json(const std::string& json_text) const {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Io, std::string("bad parameter file: ") + e.what());
    }
    if (!j.is_object() || j.size() != dim_)
        throw Error(ErrorCode::Io, "parameter file does not match the feature space");
    Weights w(dim_, 0.0);
    for (std::size_t i = 0; i < dim_; ++i) {
        if (!j.contains(names_[i]))
            throw Error(ErrorCode::Io, "parameter file missing feature " + names_[i]);
        w[i] = j[names_[i]].get<double>();
        if (!std::isfinite(w[i]))
            throw Error(ErrorCode::Io, "non-finite weight for " + names_[i]);
    }
    return w;
}

void gd_step(Weights& w, const Weights& grad, double lr) {
    if (lr <= 0.0) throw Error(ErrorCode::InvalidArgument, "learning rate must be > 0");
    if (w.size() != grad.size())
        throw Error(ErrorCode::InvalidArgument, "gradient dimension mismatch");
    for (double g : grad)
        if (!std::isfinite(g))
            throw Error(ErrorCode::Internal, "non-finite gradient");
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * grad[i];
}

} // namespace svsr
