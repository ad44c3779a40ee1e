#pragma once

// Structured self-correction trajectories: step types, the transition
// automaton, per-step masks, and the tagged text grammar.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace svsr {

enum class StepKind { Solve, Verify, Rectify };
enum class Verdict { Correct, Incorrect };
enum class VerifyStrategy { DirectDerivation, Contradiction };

// CANONICAL: solve -> verify -> {end | rectify -> verify -> ...}.
// LITERAL: the transition table as written in the source equation,
// where a CORRECT verification loops back to solve unless it
// immediately follows a rectification.
enum class AutomatonMode { Canonical, Literal };

// Successor symbol of the automaton. End is terminal, never stored.
enum class NextSymbol { Solve, Verify, Rectify, End };

const char* to_string(StepKind k);
const char* to_string(Verdict v);
const char* to_string(VerifyStrategy s);

struct Step {
    StepKind kind;
    std::string text;
    std::optional<std::string> answer;      // Solve/Rectify only
    std::optional<Verdict> verdict;         // Verify only
    std::optional<VerifyStrategy> strategy; // Verify only

    bool operator==(const Step&) const = default;
};

Step solve_step(std::string answer, std::string text = "");
Step rectify_step(std::string answer, std::string text = "");
Step verify_step(Verdict v, VerifyStrategy s, std::string text = "");

struct Trajectory {
    std::string problem_id;
    std::vector<Step> steps;

    // Answer of the last Solve/Rectify step; empty if none.
    std::string final_answer() const;
    // Number of Rectify steps.
    int rectify_count() const;

    bool operator==(const Trajectory&) const = default;
};

constexpr int kDefaultKMax = 4;

// Allowed successors of a step. `verdict` is required for Verify steps.
// `at_cap` means the rectification budget is exhausted; `after_rectify`
// means the step immediately follows a Rectify (only consulted by
// LITERAL mode, whose end condition depends on it).
std::set<NextSymbol> next_allowed(StepKind kind, std::optional<Verdict> verdict,
                                  AutomatonMode mode, bool at_cap,
                                  bool after_rectify = false);

struct TransitionError {
    std::size_t index = 0;
    std::set<NextSymbol> expected;
    NextSymbol found = NextSymbol::End;
    std::string message;
};

struct ValidationResult {
    bool ok = false;
    std::optional<TransitionError> error;

    explicit operator bool() const { return ok; }
};

// Full validation: starts at Solve, every adjacent transition legal,
// step fields match their kind, and the trajectory terminates legally
// (last step is a Verify whose successor set contains End).
ValidationResult validate(const Trajectory& traj, AutomatonMode mode,
                          int k_max = kDefaultKMax);

// Same transition checks without the terminal requirement; accepts any
// legal prefix of the automaton language.
ValidationResult validate_prefix(const Trajectory& traj, AutomatonMode mode,
                                 int k_max = kDefaultKMax);

// Per-step bit vector: 1 exactly on Verify/Rectify steps.
std::vector<std::uint8_t> mask(const Trajectory& traj);

// -- Text grammar ------------------------------------------------------
//
//   <solve>rationale Answer: tok</solve>
//   Wait, let me recheck my solution.
//   <verify strategy="direct">rationale Verdict: CORRECT</verify>
//   Let me try again.
//   <rectify>rationale Answer: tok</rectify>
//
// The connective lines are mandatory before every verify/rectify.

inline constexpr const char* kRecheckPhrase = "Wait, let me recheck my solution.";
inline constexpr const char* kRetryPhrase = "Let me try again.";

struct ParseError {
    std::size_t line = 0; // 1-based line of the offending input
    std::string reason;
};

using ParseResult = std::variant<Trajectory, ParseError>;

// Parses a serialized trace. Transition legality is checked as a prefix
// of the automaton language in `mode`; completeness is the caller's
// concern (a single remote-generated step is a legal parse).
ParseResult parse(const std::string& text, AutomatonMode mode = AutomatonMode::Canonical,
                  int k_max = kDefaultKMax, std::string problem_id = "");

// Parses a trace expected to contain exactly one step element.
std::variant<Step, ParseError> parse_step(const std::string& text);

// Canonical rendering; parse(render(y)) == y for every valid y.
std::string render(const Trajectory& traj);
std::string render_step(const Step& step, bool with_connective = true);

} // namespace svsr
