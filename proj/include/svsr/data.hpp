#pragma once

// Stage 1: builds the cold-start SFT corpus and the seed preference
// pairs from a generator oracle.

#include <optional>
#include <string>
#include <vector>

#include "svsr/env.hpp"
#include "svsr/oracle.hpp"
#include "svsr/rng.hpp"
#include "svsr/trajectory.hpp"

namespace svsr {

enum class RecordLabel { Chosen, Rejected };

struct SftRecord {
    std::string problem_id;
    Trajectory trajectory;
    std::string trajectory_text; // render output; may be deliberately corrupted
    RecordLabel label = RecordLabel::Chosen;
    int level = 1;
    int k = 0; // rectification count
    std::string final_answer;
};

struct ConstructionFailure {
    std::string problem_id;
    std::string reason;
};

// Fraction of m independent solve() calls graded correct.
double estimate_accuracy(const Problem& p, GeneratorOracle& gen, int m, Rng& rng);

// Accuracy quintiles: [0.8,1.0] -> 1, [0.6,0.8) -> 2, [0.4,0.6) -> 3,
// [0.2,0.4) -> 4, [0,0.2) -> 5.
int assign_level(double accuracy);

// Correction-cycle budget per difficulty level: 1 -> 0, ..., 5 -> 4.
int target_cycles(int level);

// Chosen trajectory with exactly k_target rectifications, accurate
// verdicts, correct final answer, and uniformly alternated verify
// strategies. Wrong intermediate answers are re-drawn from the oracle.
std::optional<SftRecord> build_chosen(const Problem& p, GeneratorOracle& gen,
                                      int k_target, int level, Rng& rng,
                                      int max_retries = 64,
                                      int k_max = kDefaultKMax);

// Dispreferred counterpart: either a wrong final answer blessed by a
// forced CORRECT verdict, or a rendering with one scaffolding phrase
// dropped (uniform choice between the two modes).
SftRecord build_rejected(const Problem& p, GeneratorOracle& gen, int level, Rng& rng);

struct DatasetFiles {
    std::string sft_path;
    std::string seed_pairs_path;
};

// sft.jsonl holds chosen records only; seed_pairs.jsonl pairs each
// chosen record with a rejected record of the same problem.
void emit_datasets(const std::vector<SftRecord>& records,
                   const std::vector<Problem>& problems, const DatasetFiles& files);

std::vector<SftRecord> read_sft_records(const std::string& path,
                                        AutomatonMode mode = AutomatonMode::Canonical,
                                        int k_max = kDefaultKMax);

} // namespace svsr
