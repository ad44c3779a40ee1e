#pragma once

// Behavioral metrics over trajectory corpora with known ground truth.
// Ratios with zero denominators are reported as undefined, never 0.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "svsr/env.hpp"
#include "svsr/trajectory.hpp"

namespace svsr {

struct CorpusEntry {
    const Problem* problem = nullptr;
    const Trajectory* trajectory = nullptr;
};

struct Ratio {
    std::size_t numerator = 0;
    std::size_t denominator = 0;

    std::optional<double> value() const {
        if (denominator == 0) return {};
        return static_cast<double>(numerator) / denominator;
    }
};

struct LevelProfile {
    int level = 1;
    std::size_t trajectories = 0;
    std::size_t correct_finals = 0;
    std::size_t rectify_steps = 0;
    double answer_accuracy = 0.0;
    double mean_attempts = 0.0; // rectifications + 1, averaged
    double mean_loops = 0.0;    // raw correction-loop count
};

struct BehaviorReport {
    Ratio verification_accuracy; // verdicts matching truth / verify steps
    Ratio error_recall;          // flagged wrong / truly wrong
    Ratio error_to_correct;      // fixed / rectifies on wrong answers
    Ratio correct_to_error;      // broke / rectifies on right answers
    std::vector<LevelProfile> levels; // populated levels only, ascending
};

std::pair<Ratio, Ratio> verification_metrics(const std::vector<CorpusEntry>& corpus);
std::pair<Ratio, Ratio> rectification_metrics(const std::vector<CorpusEntry>& corpus);
std::vector<LevelProfile> difficulty_profile(const std::vector<CorpusEntry>& corpus);

BehaviorReport behavior_report(const std::vector<CorpusEntry>& corpus);

std::string report_to_json(const BehaviorReport& report);
std::string report_to_csv(const BehaviorReport& report);
BehaviorReport report_from_json(const std::string& json_text);

} // namespace svsr
