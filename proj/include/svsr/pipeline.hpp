#pragma once

// Batch stage orchestration over the output directory:
//   gen-env       -> problems.jsonl
//   build-data    -> sft.jsonl, seed_pairs.jsonl
//   sft           -> sft_params.json
//   dpo           -> final_params.json, history.jsonl, buffer.jsonl
//   eval          -> report.json, report.csv, plot_data.csv

#include <optional>
#include <string>
#include <vector>

#include "svsr/config.hpp"
#include "svsr/env.hpp"

namespace svsr {

struct Artifacts {
    std::string problems;
    std::string sft;
    std::string seed_pairs;
    std::string sft_params;
    std::string final_params;
    std::string history;
    std::string buffer;
    std::string report_json;
    std::string report_csv;
    std::string plot_data;
    std::string remote_calls;
};

Artifacts artifact_paths(const std::string& output_dir);

void write_problems(const std::string& path, const std::vector<Problem>& problems);
std::vector<Problem> read_problems(const std::string& path);

void run_gen_env(const RunConfig& cfg);
void run_build_data(const RunConfig& cfg);
void run_sft(const RunConfig& cfg);
void run_dpo(const RunConfig& cfg);
void run_eval(const RunConfig& cfg, const std::optional<std::string>& params_path = {});
void run_full_pipeline(const RunConfig& cfg);

} // namespace svsr
