#pragma once

// Stage 3: DPO loss/gradient, semi-online iterative loop over the
// preference buffer, and the static offline baseline.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "svsr/env.hpp"
#include "svsr/oracle.hpp"
#include "svsr/policy.hpp"
#include "svsr/preference.hpp"

namespace svsr {

enum class DpoMode { SemiOnline, Offline };

struct DpoConfig {
    double beta = 0.5;
    double lr = 0.1;
    int batch_size = 8;
    int steps_per_iter = 200;  // S
    int iterations = 5;        // T
    int regen_frequency = 25;  // M; data refreshed every M optimization steps
    int candidates_per_prompt = 4; // N
    int prompts_per_iter = 50;
    double tau = 0.2; // ambiguity margin threshold
    DpoMode mode = DpoMode::SemiOnline;
    std::size_t buffer_capacity = 256;
    EvictionPolicy eviction = EvictionPolicy::Adaptive;
    double heldout_fraction = 0.2;
    int jobs = 1;
    std::uint64_t seed = 0;
};

void check_valid(const DpoConfig& cfg);

struct DpoLoss {
    double loss = 0.0;
    Weights grad;
    double z = 0.0; // beta-scaled log-ratio margin
};

// loss = -ln sigmoid(z), z = beta * ((logpi(win) - logref(win)) -
// (logpi(lose) - logref(lose))). Reference weights are held fixed.
DpoLoss dpo_loss(const Policy& policy, const Weights& params, const Weights& ref_params,
                 const Problem& p, const PreferencePair& pair, double beta);

// N independent policy samples.
std::vector<Trajectory> generate_candidates(const Policy& policy, const Weights& params,
                                            const Problem& p, int n, Rng& rng);

enum class RejectReason { Ambiguous, Degenerate };

using LabelResult = std::variant<PreferencePair, RejectReason>;

// Best-vs-worst by teacher total score (ties broken by lower index);
// rejected when the margin falls below tau.
LabelResult label_pair(const Problem& p, const std::vector<Trajectory>& candidates,
                       double tau);

struct IterationRecord {
    int iter = 0;
    std::optional<double> mean_loss; // absent before any optimization
    std::size_t buffer_size = 0;
    std::optional<double> heldout_pref_acc;
    std::optional<double> mean_margin; // teacher margin over buffer
    std::size_t online_pairs = 0;      // accepted this iteration
};

struct PipelineResult {
    Weights final_params;
    std::vector<IterationRecord> history;
    std::vector<PreferencePair> buffer_snapshot;
};

// Full semi-online (or offline) loop. `problems` maps prompt ids to
// problems; `teacher` scores candidate trajectories. The seed pairs are
// split into a buffer-seeding set and a held-out evaluation set.
// `extra_winners` are chosen trajectories from seed rows whose rejected
// side is unusable (format-corrupted); they never enter the buffer or
// the held-out set but do join online candidate pools, so every prompt
// keeps its reference solution during regeneration.
PipelineResult run_pipeline(const DpoConfig& cfg, const Policy& policy,
                            const std::vector<PreferencePair>& seed_pairs,
                            const std::vector<Problem>& prompts,
                            const std::function<TeacherScore(const Problem&,
                                                             const Trajectory&)>& teacher,
                            const Weights& sft_params,
                            const std::vector<std::pair<std::string, Trajectory>>&
                                extra_winners = {});

// Fraction of pairs with logpi(win) > logpi(lose); empty if no pairs.
std::optional<double> preference_accuracy(const Policy& policy, const Weights& params,
                                          const std::map<std::string, const Problem*>& by_id,
                                          const std::vector<PreferencePair>& pairs);

} // namespace svsr
