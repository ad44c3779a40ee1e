#pragma once

// Preference pairs and the bounded preference buffer.

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "svsr/trajectory.hpp"

namespace svsr {

enum class PairSource { Seed, Online };
enum class EvictionPolicy { Fifo, Adaptive };

struct PreferencePair {
    std::string problem_id;
    Trajectory y_win;
    Trajectory y_lose;
    double teacher_margin = 0.0; // score(win) - score(lose), >= 0
    PairSource source = PairSource::Seed;
    int created_iter = 0;
};

class PreferenceBuffer {
public:
    PreferenceBuffer(std::size_t capacity, EvictionPolicy policy)
        : capacity_(capacity), policy_(policy) {}

    // Appends pairs; on overflow evicts oldest (FIFO) or the pair with
    // the smallest teacher margin (ADAPTIVE, ties broken oldest-first).
    void update(const std::vector<PreferencePair>& new_pairs);

    std::size_t size() const { return pairs_.size(); }
    std::size_t capacity() const { return capacity_; }
    const PreferencePair& at(std::size_t i) const { return pairs_.at(i); }
    const std::deque<PreferencePair>& pairs() const { return pairs_; }

private:
    std::size_t capacity_;
    EvictionPolicy policy_;
    std::deque<PreferencePair> pairs_;
};

// JSONL persistence: {problem_id, win_text, lose_text, teacher_margin,
// source, created_iter}. Texts are parsed back through the grammar.
std::vector<PreferencePair> read_pairs(const std::string& path,
                                       AutomatonMode mode = AutomatonMode::Canonical,
                                       int k_max = kDefaultKMax,
                                       bool skip_invalid = false,
                                       std::size_t* skipped = nullptr);
void write_pairs(const std::string& path, const std::vector<PreferencePair>& pairs);

// Raw pair rows (texts not parsed); used where a lose trajectory is
// deliberately format-corrupted and cannot be structured.
struct PairRow {
    std::string problem_id;
    std::string win_text;
    std::string lose_text;
    double teacher_margin = 0.0;
    PairSource source = PairSource::Seed;
    int created_iter = 0;
};

std::vector<PairRow> read_pair_rows(const std::string& path);
void write_pair_rows(const std::string& path, const std::vector<PairRow>& rows);

} // namespace svsr
