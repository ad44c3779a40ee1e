#include "svsr/trajectory.hpp"

#include <sstream>
#include <stdexcept>

namespace svsr {

const char* to_string(StepKind k) {
    switch (k) {
        case StepKind::Solve: return "solve";
        case StepKind::Verify: return "verify";
        case StepKind::Rectify: return "rectify";
    }
    return "?";
}

const char* to_string(Verdict v) {
    return v == Verdict::Correct ? "CORRECT" : "INCORRECT";
}

const char* to_string(VerifyStrategy s) {
    return s == VerifyStrategy::DirectDerivation ? "direct" : "contradiction";
}

Step solve_step(std::string answer, std::string text) {
    return Step{StepKind::Solve, std::move(text), std::move(answer), {}, {}};
}

Step rectify_step(std::string answer, std::string text) {
    return Step{StepKind::Rectify, std::move(text), std::move(answer), {}, {}};
}

Step verify_step(Verdict v, VerifyStrategy s, std::string text) {
    return Step{StepKind::Verify, std::move(text), {}, v, s};
}

std::string Trajectory::final_answer() const {
    for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
        if (it->kind != StepKind::Verify && it->answer) return *it->answer;
    }
    return "";
}

int Trajectory::rectify_count() const {
    int k = 0;
    for (const auto& s : steps)
        if (s.kind == StepKind::Rectify) ++k;
    return k;
}

std::set<NextSymbol> next_allowed(StepKind kind, std::optional<Verdict> verdict,
                                  AutomatonMode mode, bool at_cap,
                                  bool after_rectify) {
    switch (kind) {
        case StepKind::Solve:
        case StepKind::Rectify:
            return {NextSymbol::Verify};
        case StepKind::Verify:
            if (!verdict)
                throw std::invalid_argument("next_allowed: verify step requires a verdict");
            if (*verdict == Verdict::Incorrect)
                return at_cap ? std::set<NextSymbol>{NextSymbol::End}
                              : std::set<NextSymbol>{NextSymbol::Rectify};
            // CORRECT
            if (mode == AutomatonMode::Canonical) return {NextSymbol::End};
            // Literal: loop back to solve, except a verified rectification ends.
            return after_rectify ? std::set<NextSymbol>{NextSymbol::End}
                                 : std::set<NextSymbol>{NextSymbol::Solve};
    }
    return {};
}

namespace {

NextSymbol as_symbol(StepKind k) {
    switch (k) {
        case StepKind::Solve: return NextSymbol::Solve;
        case StepKind::Verify: return NextSymbol::Verify;
        case StepKind::Rectify: return NextSymbol::Rectify;
    }
    return NextSymbol::End;
}

std::optional<std::string> check_fields(const Step& s) {
    const bool wants_answer = s.kind != StepKind::Verify;
    if (wants_answer && !s.answer) return "missing answer on solve/rectify step";
    if (!wants_answer && s.answer) return "unexpected answer on verify step";
    if (s.kind == StepKind::Verify && !s.verdict) return "missing verdict on verify step";
    if (s.kind != StepKind::Verify && s.verdict) return "unexpected verdict on non-verify step";
    if (s.kind != StepKind::Verify && s.strategy) return "unexpected strategy on non-verify step";
    return {};
}

ValidationResult run_validate(const Trajectory& traj, AutomatonMode mode, int k_max,
                              bool require_terminal) {
    if (traj.steps.empty())
        return {false, TransitionError{0, {NextSymbol::Solve}, NextSymbol::End,
                                       "empty trajectory"}};
    if (traj.steps[0].kind != StepKind::Solve)
        return {false, TransitionError{0, {NextSymbol::Solve},
                                       as_symbol(traj.steps[0].kind),
                                       "trajectory must start with a solve step"}};
    int rectifies = 0;
    for (std::size_t i = 0; i < traj.steps.size(); ++i) {
        const Step& s = traj.steps[i];
        if (auto err = check_fields(s))
            return {false, TransitionError{i, {}, as_symbol(s.kind), *err}};
        if (s.kind == StepKind::Rectify) ++rectifies;
        const bool at_cap = rectifies >= k_max;
        const bool after_rectify = i > 0 && traj.steps[i - 1].kind == StepKind::Rectify;
        const auto allowed = next_allowed(s.kind, s.verdict, mode, at_cap, after_rectify);
        if (i + 1 < traj.steps.size()) {
            const NextSymbol next = as_symbol(traj.steps[i + 1].kind);
            if (!allowed.contains(next))
                return {false, TransitionError{i + 1, allowed, next,
                                               "illegal transition"}};
        } else if (require_terminal && !allowed.contains(NextSymbol::End)) {
            return {false, TransitionError{i, allowed, NextSymbol::End,
                                           "trajectory does not terminate legally"}};
        }
    }
    return {true, {}};
}

} // namespace

ValidationResult validate(const Trajectory& traj, AutomatonMode mode, int k_max) {
    return run_validate(traj, mode, k_max, /*require_terminal=*/true);
}

ValidationResult validate_prefix(const Trajectory& traj, AutomatonMode mode, int k_max) {
    return run_validate(traj, mode, k_max, /*require_terminal=*/false);
}

std::vector<std::uint8_t> mask(const Trajectory& traj) {
    std::vector<std::uint8_t> bits;
    bits.reserve(traj.steps.size());
    for (const auto& s : traj.steps)
        bits.push_back(s.kind == StepKind::Verify || s.kind == StepKind::Rectify ? 1 : 0);
    return bits;
}

// -- Grammar -----------------------------------------------------------

namespace {

constexpr const char* kAnswerMarker = "Answer:";
constexpr const char* kVerdictMarker = "Verdict:";

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    std::istringstream is(text);
    while (std::getline(is, cur)) lines.push_back(cur);
    return lines;
}

struct ElementParse {
    std::optional<Step> step;
    std::optional<std::string> error;
};

// Splits element content "rationale Marker: value" into (text, value).
bool split_content(const std::string& content, const char* marker,
                   std::string& text, std::string& value) {
    const auto pos = content.rfind(marker);
    if (pos == std::string::npos) return false;
    text = content.substr(0, pos);
    if (!text.empty() && text.back() == ' ') text.pop_back();
    value = trim(content.substr(pos + std::string(marker).size()));
    return !value.empty();
}

ElementParse parse_element(const std::string& line) {
    auto fail = [](std::string why) { return ElementParse{{}, std::move(why)}; };
    auto body_of = [&](const std::string& open, const std::string& close)
        -> std::optional<std::string> {
        if (line.rfind(open, 0) != 0) return {};
        if (!line.ends_with(close)) return {};
        return line.substr(open.size(), line.size() - open.size() - close.size());
    };

    if (auto body = body_of("<solve>", "</solve>")) {
        std::string text, ans;
        if (!split_content(*body, kAnswerMarker, text, ans))
            return fail("solve element missing 'Answer:' field");
        return {solve_step(ans, text), {}};
    }
    if (auto body = body_of("<rectify>", "</rectify>")) {
        std::string text, ans;
        if (!split_content(*body, kAnswerMarker, text, ans))
            return fail("rectify element missing 'Answer:' field");
        return {rectify_step(ans, text), {}};
    }
    for (VerifyStrategy strat :
         {VerifyStrategy::DirectDerivation, VerifyStrategy::Contradiction}) {
        const std::string open =
            std::string("<verify strategy=\"") + to_string(strat) + "\">";
        if (auto body = body_of(open, "</verify>")) {
            std::string text, verdict;
            if (!split_content(*body, kVerdictMarker, text, verdict))
                return fail("verify element missing 'Verdict:' field");
            if (verdict == "CORRECT")
                return {verify_step(Verdict::Correct, strat, text), {}};
            if (verdict == "INCORRECT")
                return {verify_step(Verdict::Incorrect, strat, text), {}};
            return fail("unknown verdict '" + verdict + "'");
        }
    }
    if (line.rfind("<verify", 0) == 0)
        return fail("malformed verify tag (strategy must be \"direct\" or \"contradiction\")");
    return fail("unknown element '" + line + "'");
}

} // namespace

ParseResult parse(const std::string& text, AutomatonMode mode, int k_max,
                  std::string problem_id) {
    Trajectory traj;
    traj.problem_id = std::move(problem_id);
    const auto lines = split_lines(text);
    std::size_t i = 0;
    while (i < lines.size()) {
        if (trim(lines[i]).empty()) { ++i; continue; }
        std::string line = lines[i];
        // Connective phrase, then the element it announces.
        if (line == kRecheckPhrase || line == kRetryPhrase) {
            const bool expects_verify = line == kRecheckPhrase;
            ++i;
            if (i >= lines.size())
                return ParseError{i, "connective phrase not followed by an element"};
            auto el = parse_element(lines[i]);
            if (!el.step) return ParseError{i + 1, *el.error};
            const bool is_verify = el.step->kind == StepKind::Verify;
            if (expects_verify != is_verify)
                return ParseError{i + 1, "connective phrase does not match element kind"};
            traj.steps.push_back(std::move(*el.step));
            ++i;
            continue;
        }
        auto el = parse_element(line);
        if (!el.step) return ParseError{i + 1, *el.error};
        if (el.step->kind == StepKind::Verify)
            return ParseError{i + 1,
                              std::string("verify element missing connective '") +
                                  kRecheckPhrase + "'"};
        if (el.step->kind == StepKind::Rectify)
            return ParseError{i + 1,
                              std::string("rectify element missing connective '") +
                                  kRetryPhrase + "'"};
        traj.steps.push_back(std::move(*el.step));
        ++i;
    }
    if (traj.steps.empty()) return ParseError{1, "no elements found"};
    if (auto v = validate_prefix(traj, mode, k_max); !v) {
        const auto& e = *v.error;
        return ParseError{e.index + 1, "illegal transition: " + e.message};
    }
    return traj;
}

std::variant<Step, ParseError> parse_step(const std::string& text) {
    std::vector<Step> steps;
    const auto lines = split_lines(text);
    std::size_t lineno = 0;
    for (const auto& raw : lines) {
        ++lineno;
        const std::string line = trim(raw);
        if (line.empty() || line == kRecheckPhrase || line == kRetryPhrase) continue;
        auto el = parse_element(raw);
        if (!el.step) return ParseError{lineno, *el.error};
        steps.push_back(std::move(*el.step));
    }
    if (steps.empty()) return ParseError{1, "no element found"};
    if (steps.size() > 1) return ParseError{1, "expected exactly one element"};
    return steps.front();
}

std::string render_step(const Step& step, bool with_connective) {
    std::string out;
    switch (step.kind) {
        case StepKind::Solve:
            out = "<solve>" + (step.text.empty() ? "" : step.text + " ") +
                  kAnswerMarker + " " + *step.answer + "</solve>";
            break;
        case StepKind::Rectify:
            if (with_connective) out = std::string(kRetryPhrase) + "\n";
            out += "<rectify>" + (step.text.empty() ? "" : step.text + " ") +
                   kAnswerMarker + " " + *step.answer + "</rectify>";
            break;
        case StepKind::Verify: {
            if (with_connective) out = std::string(kRecheckPhrase) + "\n";
            const VerifyStrategy strat =
                step.strategy.value_or(VerifyStrategy::DirectDerivation);
            out += std::string("<verify strategy=\"") + to_string(strat) + "\">" +
                   (step.text.empty() ? "" : step.text + " ") + kVerdictMarker + " " +
                   to_string(*step.verdict) + "</verify>";
            break;
        }
    }
    return out;
}

std::string render(const Trajectory& traj) {
    std::string out;
    for (std::size_t i = 0; i < traj.steps.size(); ++i) {
        if (i) out += "\n";
        out += render_step(traj.steps[i]);
    }
    return out;
}

} // namespace svsr
